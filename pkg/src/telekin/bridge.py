"""Interactive session service: live input in, snapshot stream out.

One engine per websocket connection.  The server synthesizes full sensor
frames from the latest client input at the configured tick rate, runs the
engine, and pushes snapshots; every synthesized frame is also recorded to a
trace file, so an interactive session replays bit-for-bit through the CLI.
The server holds no interaction logic of its own - it is a pure adapter
between messages and the deterministic core.

Client messages (JSON):
    {"kind": "hello"}
    {"kind": "configure", "condition": {...}, "config": {...}, "snapshot_rate": 30}
    {"kind": "input", "hand_delta": [dx,dy,dz], "openness": 0..1,
     "strain_level": 0..1, "gaze_point": [x,y,z], "blink": true}
    {"kind": "reset"}

Server messages:
    {"kind": "snapshot", "snapshot": {...}}
    {"kind": "task_event", "event": "snap"|"complete", "id": ..., "t": ...}
    {"kind": "error", "message": "..."}
"""

from __future__ import annotations

import asyncio
import itertools
import json
import tempfile
from collections import deque
from pathlib import Path

from aiohttp import WSMsgType, web

from telekin.biosignal import Calibration, save_calibration
from telekin.canonical import dumps, dumps_pretty
from telekin.config import EngineConfig, FactorCondition
from telekin.engine import Engine
from telekin.errors import TelekinError
from telekin.geometry import Vec3
from telekin.operator import FrameSynthesizer
from telekin.rng import derive
from telekin.world import HAND_REST

# Matches the frame synthesizer's rest/burst strength range, so live strain
# levels map onto sensible normalized values from the first tick.
SESSION_CALIBRATION = Calibration(mean_interval=3.0, c_th=5.01, f_min=0.02, f_max=0.76)
SESSION_SYNTH_SEED = derive(0, "live-session")
SNAPSHOT_QUEUE_MAX = 4096

CFG_KEY = web.AppKey("cfg", EngineConfig)
RECORD_DIR_KEY = web.AppKey("record_dir", Path)
COUNTER_KEY = web.AppKey("session_counter", itertools.count)


class Session:
    """Engine + synthesizer + latest-input state for one connection."""

    def __init__(self, base_cfg: EngineConfig, record_path: Path):
        self.base_cfg = base_cfg
        self.record_path = record_path
        self.cfg: EngineConfig | None = None
        self.condition: FactorCondition | None = None
        self.engine: Engine | None = None
        self.synth: FrameSynthesizer | None = None
        self.snapshot_every = 1
        self._record_fh = None
        # latest client intent
        self.hand = HAND_REST
        self.pending_delta = Vec3(0.0, 0.0, 0.0)
        self.openness = 0.2
        self.strain_level = 0.0
        self.gaze_point = Vec3(0.0, 0.05, 0.9)
        self.blink_requested = False
        self._prev_stacked = 0
        self._prev_complete = False

    def configure(self, condition: FactorCondition, overrides: dict, snapshot_rate) -> None:
        cfg = EngineConfig.from_dict({**self.base_cfg.as_dict(), **overrides})
        self.cfg = cfg
        self.condition = condition
        if snapshot_rate:
            self.snapshot_every = max(1, round(cfg.tick_rate / float(snapshot_rate)))
        else:
            self.snapshot_every = 1
        meta = {
            "version": 1,
            "condition": condition.as_dict(),
            "config": cfg.as_dict(),
            "calibration": SESSION_CALIBRATION.as_dict(),
            "trace": self.record_path.name,
        }
        self.record_path.with_suffix(".meta.json").write_text(
            dumps_pretty(meta), encoding="utf-8"
        )
        save_calibration(
            SESSION_CALIBRATION, self.record_path.with_suffix(".calibration.json")
        )
        self.reset()

    def reset(self) -> None:
        assert self.cfg is not None and self.condition is not None
        self.engine = Engine(self.cfg, self.condition, SESSION_CALIBRATION)
        self.synth = FrameSynthesizer(self.cfg, SESSION_SYNTH_SEED)
        self.hand = HAND_REST
        self.pending_delta = Vec3(0.0, 0.0, 0.0)
        self.openness = 0.2
        self.strain_level = 0.0
        self.gaze_point = Vec3(0.0, 0.05, 0.9)
        self.blink_requested = False
        self._prev_stacked = 0
        self._prev_complete = False
        if self._record_fh:
            self._record_fh.close()
        self._record_fh = open(self.record_path, "w", encoding="utf-8")

    def apply_input(self, msg: dict) -> None:
        if "hand_delta" in msg:
            dx, dy, dz = (float(v) for v in msg["hand_delta"])
            self.pending_delta = self.pending_delta + Vec3(dx, dy, dz)
        if "openness" in msg:
            self.openness = min(1.0, max(0.0, float(msg["openness"])))
        if "strain_level" in msg:
            self.strain_level = min(1.0, max(0.0, float(msg["strain_level"])))
        if "gaze_point" in msg:
            gx, gy, gz = (float(v) for v in msg["gaze_point"])
            self.gaze_point = Vec3(gx, gy, gz)
        if msg.get("blink"):
            self.blink_requested = True

    def tick(self) -> tuple[list[dict], bool]:
        """Advance one engine tick; returns (messages to send, emit snapshot)."""
        assert self.engine is not None and self.synth is not None
        self.hand = self.hand + self.pending_delta
        self.pending_delta = Vec3(0.0, 0.0, 0.0)
        if self.blink_requested:
            self.synth.trigger_blink()
            self.blink_requested = False
        frame = self.synth.frame(
            hand_pos=self.hand,
            gaze_target=self.gaze_point,
            openness=self.openness,
            strain_level=self.strain_level,
        )
        snapshot = self.engine.tick(frame)
        self._record_fh.write(dumps(frame.as_dict()))
        self._record_fh.write("\n")
        messages = []
        if len(snapshot.stacked) > self._prev_stacked:
            messages.append({
                "kind": "task_event", "event": "snap",
                "id": snapshot.stacked[-1], "t": snapshot.t,
            })
            self._prev_stacked = len(snapshot.stacked)
        if snapshot.complete and not self._prev_complete:
            messages.append({
                "kind": "task_event", "event": "complete", "id": None, "t": snapshot.t,
            })
            self._prev_complete = True
        emit = (self.synth.tick_index - 1) % self.snapshot_every == 0
        if emit:
            messages.append({"kind": "snapshot", "snapshot": snapshot.as_dict()})
        return messages, emit

    def close(self) -> None:
        if self._record_fh:
            self._record_fh.close()
            self._record_fh = None


async def _session_handler(request: web.Request) -> web.WebSocketResponse:
    ws = web.WebSocketResponse()
    await ws.prepare(request)
    app = request.app
    session_no = next(app[COUNTER_KEY])
    record_path = app[RECORD_DIR_KEY] / f"session-{session_no:04d}.trace.jsonl"
    session = Session(app[CFG_KEY], record_path)

    outbox: deque[str] = deque(maxlen=SNAPSHOT_QUEUE_MAX)
    wake = asyncio.Event()

    async def sender():
        while True:
            await wake.wait()
            wake.clear()
            while outbox:
                await ws.send_str(outbox.popleft())

    def push(payload: dict) -> None:
        outbox.append(dumps(payload))
        wake.set()

    async def ticker():
        loop = asyncio.get_running_loop()
        next_at = loop.time()
        while True:
            period = session.cfg.tick_period
            next_at += period
            delay = next_at - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_at = loop.time()  # fell behind; do not burst-tick
            messages, _ = session.tick()
            for msg in messages:
                push(msg)

    sender_task = asyncio.create_task(sender())
    tick_task: asyncio.Task | None = None

    try:
        async for raw in ws:
            if raw.type != WSMsgType.TEXT:
                break
            try:
                msg = json.loads(raw.data)
                if not isinstance(msg, dict) or "kind" not in msg:
                    raise ValueError("message must be an object with a 'kind'")
            except (json.JSONDecodeError, ValueError) as exc:
                push({"kind": "error", "message": f"malformed message: {exc}"})
                break
            kind = msg["kind"]
            try:
                if kind == "hello":
                    continue
                elif kind == "configure":
                    condition = FactorCondition.from_dict(msg.get("condition", {}))
                    if tick_task:
                        tick_task.cancel()
                    session.configure(
                        condition, msg.get("config", {}), msg.get("snapshot_rate")
                    )
                    tick_task = asyncio.create_task(ticker())
                elif kind == "input":
                    if session.engine is None:
                        push({"kind": "error", "message": "input before configure"})
                        continue
                    session.apply_input(msg)
                elif kind == "reset":
                    if session.engine is None:
                        push({"kind": "error", "message": "reset before configure"})
                        continue
                    if tick_task:
                        tick_task.cancel()
                    session.reset()
                    tick_task = asyncio.create_task(ticker())
                else:
                    push({"kind": "error", "message": f"unknown message kind {kind!r}"})
                    break
            except (TelekinError, TypeError, KeyError, ValueError) as exc:
                push({"kind": "error", "message": str(exc)})
                break
    finally:
        if tick_task:
            tick_task.cancel()
        # drain anything still queued before closing
        while outbox:
            try:
                await ws.send_str(outbox.popleft())
            except ConnectionError:
                break
        sender_task.cancel()
        session.close()
        await ws.close()
    return ws


async def _index_fallback(request: web.Request) -> web.Response:
    return web.Response(
        text="session service is running; UI bundle not built "
             "(see frontend/README notes)\n",
        content_type="text/plain",
    )


def default_static_dir() -> Path:
    return Path(__file__).resolve().parents[2] / "frontend" / "dist"


def make_app(
    cfg: EngineConfig,
    record_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> web.Application:
    app = web.Application()
    if record_dir is None:
        record_dir = Path(tempfile.mkdtemp(prefix="telekin-sessions-"))
    record_dir = Path(record_dir)
    record_dir.mkdir(parents=True, exist_ok=True)
    app[CFG_KEY] = cfg
    app[RECORD_DIR_KEY] = record_dir
    app[COUNTER_KEY] = itertools.count(1)
    app.router.add_get("/session", _session_handler)
    static = Path(static_dir) if static_dir else default_static_dir()
    if static.is_dir():
        async def index(_request: web.Request) -> web.FileResponse:
            return web.FileResponse(static / "index.html")

        app.router.add_get("/", index)
        app.router.add_static("/", static)
    else:
        app.router.add_get("/", _index_fallback)
    return app


def serve(cfg: EngineConfig, host: str, port: int, record_dir=None, static_dir=None) -> None:
    app = make_app(cfg, record_dir=record_dir, static_dir=static_dir)
    print(f"session service on http://{host}:{port}  "
          f"(recordings in {app[RECORD_DIR_KEY]})")
    web.run_app(app, host=host, port=port, print=None)
