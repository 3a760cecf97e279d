// Headless round trip: a scripted client completes the stacking task through
// the live session service, then the recorded server-side trace is replayed
// through the CLI and must reproduce the streamed snapshots byte for byte.

import assert from "node:assert/strict";
import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, readdirSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";
import WebSocket from "ws";

import { newSteerState, steerInput } from "../src/steer.js";
import { ServerMessage, Snapshot } from "../src/protocol.js";

const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..", "..");
const PYTHON = process.env.PYTHON ?? "python3";
const SNAPSHOT_PREFIX = '{"kind":"snapshot","snapshot":';

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function connectWithRetry(url: string, attempts = 60): Promise<WebSocket> {
  for (let i = 0; i < attempts; i++) {
    try {
      return await new Promise<WebSocket>((resolve, reject) => {
        const ws = new WebSocket(url);
        ws.once("open", () => resolve(ws));
        ws.once("error", reject);
      });
    } catch {
      await sleep(250);
    }
  }
  throw new Error(`could not reach ${url}`);
}

function stopServer(proc: ChildProcess): Promise<void> {
  return new Promise((resolve) => {
    proc.once("exit", () => resolve());
    proc.kill("SIGTERM");
    setTimeout(() => {
      proc.kill("SIGKILL");
      resolve();
    }, 5000).unref();
  });
}

test("scripted session completes the task and replays identically", async () => {
  const recordDir = mkdtempSync(join(tmpdir(), "steer-ui-"));
  const port = 18000 + (process.pid % 2000);
  const server = spawn(
    PYTHON,
    ["-m", "telekin.cli", "serve", "--port", String(port), "--record-dir", recordDir],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  let serverLog = "";
  server.stdout.on("data", (chunk) => (serverLog += chunk));
  server.stderr.on("data", (chunk) => (serverLog += chunk));

  const rawSnapshots: string[] = [];
  const events: Array<[string, string | null]> = [];
  let firstAt = 0;
  let lastAt = 0;

  try {
    const ws = await connectWithRetry(`ws://127.0.0.1:${port}/session`);
    const steerState = newSteerState();
    const done = new Promise<void>((resolve, reject) => {
      const guard = setTimeout(
        () => reject(new Error(`task did not complete; server log:\n${serverLog}`)),
        90_000,
      );
      guard.unref();
      ws.on("message", (data) => {
        const raw = data.toString();
        const message = JSON.parse(raw) as ServerMessage;
        if (message.kind === "snapshot") {
          rawSnapshots.push(raw);
          const now = Date.now();
          if (!firstAt) {
            firstAt = now;
          }
          lastAt = now;
          const command = steerInput(message.snapshot as Snapshot, steerState);
          if (command) {
            ws.send(JSON.stringify(command));
          }
        } else if (message.kind === "task_event") {
          events.push([message.event, message.id]);
          if (message.event === "complete") {
            clearTimeout(guard);
            resolve();
          }
        } else if (message.kind === "error") {
          clearTimeout(guard);
          reject(new Error(`server error: ${message.message}`));
        }
      });
      ws.send(JSON.stringify({ kind: "hello" }));
      ws.send(JSON.stringify({
        kind: "configure",
        condition: { concentration: false, strain: false, energy: false },
      }));
    });
    await done;
    ws.close();
    await sleep(500); // let the server flush and close the recording
  } finally {
    await stopServer(server);
  }

  // the task went through all three blocks, in order
  assert.deepEqual(
    events.filter(([e]) => e === "snap").map(([, id]) => id),
    ["red", "green", "blue"],
  );
  assert.equal(events[events.length - 1][0], "complete");

  // throughput: the undecimated stream must sustain at least 30 snapshots/s
  const seconds = (lastAt - firstAt) / 1000;
  const rate = rawSnapshots.length / seconds;
  assert.ok(rate >= 30, `snapshot rate ${rate.toFixed(1)}/s below 30/s`);

  // replay the recorded trace through the CLI and compare byte-for-byte
  const files = readdirSync(recordDir);
  const traceName = files.find((f) => f.endsWith(".trace.jsonl"));
  const calibName = files.find((f) => f.endsWith(".calibration.json"));
  assert.ok(traceName && calibName, `recording missing in ${recordDir}: ${files}`);
  const replayDir = join(recordDir, "replay");
  execFileSync(PYTHON, [
    "-m", "telekin.cli", "run",
    "--condition", "c=no,s=no,e=no",
    "--trace", join(recordDir, traceName!),
    "--calibration", join(recordDir, calibName!),
    "--out", replayDir,
  ], { cwd: REPO_ROOT });
  const replayLines = readFileSync(join(replayDir, "snapshots.jsonl"), "utf-8")
    .trimEnd()
    .split("\n");
  assert.ok(replayLines.length >= rawSnapshots.length,
    `replay shorter than stream: ${replayLines.length} < ${rawSnapshots.length}`);
  for (let i = 0; i < rawSnapshots.length; i++) {
    const raw = rawSnapshots[i];
    assert.ok(raw.startsWith(SNAPSHOT_PREFIX), `unexpected framing at ${i}`);
    const inner = raw.slice(SNAPSHOT_PREFIX.length, raw.length - 1);
    assert.equal(inner, replayLines[i], `snapshot ${i} differs between stream and replay`);
  }

  const report = JSON.parse(
    readFileSync(join(replayDir, "report.json"), "utf-8"),
  ) as { complete: boolean };
  assert.equal(report.complete, true);
});
