// Scripted steering policy: turns a received snapshot into the next input.
//
// Used by the headless round-trip test, and exposed in the UI as an
// "autopilot" toggle. The object copies the hand's movement direction while
// transverse motion dominates, and its speed hysteresis only engages when
// consecutive directions stay similar - so the policy zig-zags +/-60 degrees
// around the wanted direction: every step is transverse-dominant, no two
// steps are similar, and object speed stays fully commanded.

import { InputMessage, Snapshot, Vec } from "./protocol.js";

const RELEASE_RADIUS = 0.03;
const DIST_MIN = 0.25;
const DIST_MAX = 1.05;
const GRIP_OFFSET = 0.45;
const MAX_OBJ_STEP = 0.006;
const DELTA_MIN = 0.003;
const DELTA_MAX = 0.011;
const HAND_MAX_STEP = 0.012;
const COS60 = 0.5;
const SIN60 = Math.sqrt(3) / 2;
const CHEST: Vec = [0.0, 0.15, 0.25];

export interface SteerState {
  zig: number;
}

export function newSteerState(): SteerState {
  return { zig: 1.0 };
}

const sub = (a: Vec, b: Vec): Vec => [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
const add = (a: Vec, b: Vec): Vec => [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
const scale = (a: Vec, c: number): Vec => [a[0] * c, a[1] * c, a[2] * c];
const dot = (a: Vec, b: Vec): number => a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
const norm = (a: Vec): number => Math.sqrt(dot(a, a));
const cross = (a: Vec, b: Vec): Vec => [
  a[1] * b[2] - a[2] * b[1],
  a[2] * b[0] - a[0] * b[2],
  a[0] * b[1] - a[1] * b[0],
];

function unit(a: Vec): Vec | null {
  const n = norm(a);
  return n < 1e-12 ? null : scale(a, 1 / n);
}

/** Next input for the running task, or null once nothing remains to steer. */
export function steerInput(snapshot: Snapshot, state: SteerState): InputMessage | null {
  const nextId = snapshot.task.next;
  const goal = snapshot.task.next_goal;
  if (nextId === null || goal === null) {
    return null;
  }
  const block = snapshot.objects.find((o) => o.id === nextId);
  if (!block) {
    return null;
  }
  const hand = snapshot.hand.pos;
  const e = sub(goal, block.pos);
  const eNorm = norm(e);
  const dist = norm(sub(block.pos, hand));
  const base: InputMessage = { kind: "input", gaze_point: block.pos, strain_level: 1.0 };

  if (eNorm <= RELEASE_RADIUS) {
    // parked: let go so the task can accept the block
    return { ...base, openness: 0.1 };
  }
  if (dist < DIST_MIN || dist > DIST_MAX) {
    // re-grip: close the hand and walk toward a comfortable offset point
    const mid = scale(add(block.pos, goal), 0.5);
    const d = unit(sub(goal, block.pos)) ?? [1, 0, 0];
    const v = sub(CHEST, mid);
    const vPerp = sub(v, scale(d, dot(v, d)));
    const vHat = unit(vPerp) ?? unit(cross(d, [0, 1, 0])) ?? [0, 1, 0];
    const grip = add(mid, scale(vHat, GRIP_OFFSET));
    let step = sub(grip, hand);
    const n = norm(step);
    if (n > HAND_MAX_STEP) {
      step = scale(step, HAND_MAX_STEP / n);
    }
    return { ...base, openness: 0.1, hand_delta: step };
  }
  if (!snapshot.gate.active) {
    // hold still and keep requesting activation
    return { ...base, openness: 0.95 };
  }
  const eHat = unit(e)!;
  const axis = unit(sub(block.pos, hand))!;
  const w = unit(cross(eHat, axis)) ?? unit(cross(axis, [0, 1, 0])) ?? [0, 0, 1];
  const deltaMag = Math.max(
    DELTA_MIN,
    Math.min(DELTA_MAX, Math.min(MAX_OBJ_STEP, 0.45 * eNorm) / dist),
  );
  const s = state.zig;
  state.zig = -s;
  const direction = add(scale(eHat, COS60), scale(w, s * SIN60));
  return { ...base, openness: 0.95, hand_delta: scale(direction, deltaMag) };
}
