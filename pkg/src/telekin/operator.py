"""Synthetic operator: deterministic sensor traces that drive the engine.

Two generators live here.  ``synthesize_idle`` produces a relaxed baseline
recording (wandering gaze, normal blinking, resting muscle tone with a couple
of hard squeezes so the strength extrema get seeded).  ``synthesize_operator``
runs a scripted operator closed-loop against a private engine instance and
records the frames it produced; replaying those frames reproduces the run
exactly, completing the stacking task under the requested factor condition.

The steering trick: the control law copies the hand's movement direction onto
the object whenever transverse motion dominates, and its speed-hysteresis only
engages while consecutive directions stay similar.  The operator therefore
zig-zags the hand +/-60 degrees around the wanted object direction - every
move stays in the transverse regime, consecutive directions are dissimilar, so
object speed equals exactly k * step * distance and never coasts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from telekin.biosignal import Calibration, calibrate_from_frames
from telekin.config import EngineConfig, FactorCondition
from telekin.engine import Engine
from telekin.geometry import ZERO, Vec3, unit_or_zero
from telekin.rng import SplitMix64, derive
from telekin.trace import SensorFrame
from telekin.world import GAZE_ORIGIN, HAND_REST

SKIN_TEMPS = {"forearm": 32.0, "forehead": 33.2, "palm": 31.6}

# operator "physiology"
EMG_DC_MV = 0.4
EMG_REST_AMP = 0.03
EMG_BURST_AMP = 1.2
EMG_SINE_HZ = 97.0
EMG_NOISE = 0.01
BLINK_NORMAL_INTERVAL = 3.0
BLINK_FOCUS_INTERVAL = 6.0
BLINK_DIP_TICKS = 2

# steering parameters
OPEN = 0.95
CLOSED = 0.3
RELEASE_OPEN = 0.1
HAND_MAX_STEP = 0.012
MAX_OBJ_STEP = 0.006
DELTA_MIN = 0.003
DELTA_MAX = 0.011
RELEASE_RADIUS = 0.03
GRIP_OFFSET = 0.45
DIST_BAND = (0.25, 1.05)
CHEST = Vec3(0.0, 0.15, 0.25)
UP = Vec3(0.0, 1.0, 0.0)

_COS60 = 0.5
_SIN60 = math.sqrt(3.0) / 2.0


class FrameSynthesizer:
    """Assembles canonical SensorFrames from high-level operator intent.

    Used both by the scripted operator and by the live bridge, so interactive
    play records exactly the kind of trace the CLI replays.
    """

    def __init__(self, cfg: EngineConfig, noise_seed: int, skin_temp: dict | None = None):
        self.cfg = cfg
        self._rng = SplitMix64(noise_seed)
        self._skin = dict(skin_temp or SKIN_TEMPS)
        self.tick_index = 0
        self._emg_cursor = 0
        self._blink_ticks_left = 0

    def trigger_blink(self) -> None:
        if self._blink_ticks_left == 0:
            self._blink_ticks_left = BLINK_DIP_TICKS

    def frame(
        self,
        hand_pos: Vec3,
        gaze_target: Vec3,
        openness: float,
        strain_level: float,
        palm_toward: Vec3 | None = None,
    ) -> SensorFrame:
        cfg = self.cfg
        t = self.tick_index / cfg.tick_rate
        gaze_dir = unit_or_zero(gaze_target - GAZE_ORIGIN)
        if gaze_dir == ZERO:
            gaze_dir = Vec3(0.0, 0.0, 1.0)
        palm_at = palm_toward if palm_toward is not None else gaze_target
        palm = unit_or_zero(palm_at - hand_pos)
        if palm == ZERO:
            palm = Vec3(0.0, 0.0, 1.0)

        if self._blink_ticks_left > 0:
            eye = 0.05
            self._blink_ticks_left -= 1
        else:
            eye = 1.0

        n = cfg.emg_batch_length(self.tick_index)
        amp = EMG_REST_AMP + max(0.0, min(1.0, strain_level)) * (EMG_BURST_AMP - EMG_REST_AMP)
        batch = []
        for j in range(n):
            ts = (self._emg_cursor + j) / cfg.emg_rate
            noise = self._rng.uniform(-EMG_NOISE, EMG_NOISE)
            batch.append(EMG_DC_MV + amp * math.sin(2.0 * math.pi * EMG_SINE_HZ * ts) + noise)
        self._emg_cursor += n

        frame = SensorFrame(
            t=t,
            hand_pos=hand_pos,
            palm_normal=palm,
            hand_openness=openness,
            gaze_origin=GAZE_ORIGIN,
            gaze_dir=gaze_dir,
            eye_openness=eye,
            emg_batch=tuple(batch),
            skin_temp=dict(self._skin),
        ).normalized()
        self.tick_index += 1
        return frame


def synthesize_idle(cfg: EngineConfig, seed: int, duration: float = 90.0) -> list[SensorFrame]:
    """Relaxed baseline: wandering gaze, ~3 s blink cadence, two hard squeezes."""
    synth = FrameSynthesizer(cfg, derive(seed, "idle-noise"))
    rng = SplitMix64(derive(seed, "idle-schedule"))
    ticks = int(round(duration * cfg.tick_rate))
    frames: list[SensorFrame] = []
    next_blink = 1.0 + rng.uniform(-0.2, 0.2)
    burst_windows = [(0.45 * duration, 0.50 * duration), (0.78 * duration, 0.83 * duration)]
    for i in range(ticks):
        t = i / cfg.tick_rate
        if t >= next_blink:
            synth.trigger_blink()
            next_blink += BLINK_NORMAL_INTERVAL + rng.uniform(-0.2, 0.2)
        wobble = Vec3(
            0.02 * math.sin(0.31 * t), 0.02 * math.sin(0.17 * t + 1.0), 0.02 * math.cos(0.23 * t)
        )
        gaze_at = Vec3(0.6 * math.sin(0.11 * t), 1.2, 2.0)  # above the blocks, drifting
        strain = 1.0 if any(a <= t < b for a, b in burst_windows) else 0.0
        frames.append(
            synth.frame(
                hand_pos=HAND_REST + wobble,
                gaze_target=gaze_at,
                openness=0.5,
                strain_level=strain,
            )
        )
    return frames


def operator_calibration(cfg: EngineConfig, seed: int) -> Calibration:
    """The baseline the scripted operator runs against, derived from the seed."""
    return calibrate_from_frames(synthesize_idle(cfg, derive(seed, "calibration")), cfg)


@dataclass(slots=True)
class _Blinker:
    interval: float
    next_at: float = 1.0

    def due(self, t: float) -> bool:
        if t >= self.next_at:
            self.next_at += self.interval
            return True
        return False


class _Policy:
    """Scripted operator state machine: warm up focus, then per block
    reposition -> steer -> release until the stack is complete."""

    def __init__(self, cfg: EngineConfig, condition: FactorCondition, engine: Engine,
                 strain_bursts: bool):
        self.cfg = cfg
        self.condition = condition
        self.engine = engine
        self.strain_bursts = strain_bursts
        self.hand = HAND_REST
        self.phase = "warmup" if condition.concentration else "reposition"
        self.zig = 1.0
        self.grip: Vec3 | None = None
        self.release_ticks = 0
        interval = BLINK_FOCUS_INTERVAL if condition.concentration else BLINK_NORMAL_INTERVAL
        self.blinker = _Blinker(interval=interval)
        self.concentrated_seen = False

    def _steer_delta(self, hand: Vec3, block_pos: Vec3, goal: Vec3) -> Vec3:
        """One zig-zag hand step that advances the block toward its goal."""
        e = goal - block_pos
        e_norm = e.norm()
        axis = unit_or_zero(block_pos - hand)
        e_hat = unit_or_zero(e)
        if e_hat == ZERO or axis == ZERO:
            return ZERO
        w = unit_or_zero(e_hat.cross(axis))
        if w == ZERO:
            w = unit_or_zero(axis.cross(UP))
            if w == ZERO:
                w = unit_or_zero(axis.cross(Vec3(1.0, 0.0, 0.0)))
        dist = (block_pos - hand).norm()
        obj_step = min(MAX_OBJ_STEP, 0.45 * e_norm)
        delta = obj_step / (self.cfg.k * dist)
        delta = max(DELTA_MIN, min(DELTA_MAX, delta))
        direction = e_hat.scaled(_COS60) + w.scaled(self.zig * _SIN60)
        self.zig = -self.zig
        return direction.scaled(delta)

    def _grip_point(self, block_pos: Vec3, goal: Vec3) -> Vec3:
        mid = Vec3(
            (block_pos.x + goal.x) / 2, (block_pos.y + goal.y) / 2, (block_pos.z + goal.z) / 2
        )
        d = unit_or_zero(goal - block_pos)
        if d == ZERO:
            d = Vec3(1.0, 0.0, 0.0)
        v = CHEST - mid
        v_perp = v - d.scaled(v.dot(d))
        v_hat = unit_or_zero(v_perp)
        if v_hat == ZERO:
            v_hat = unit_or_zero(d.cross(UP))
        return mid + v_hat.scaled(GRIP_OFFSET)

    def command(self, t: float) -> dict:
        task = self.engine.task
        target_id = task.next_required()
        blink = self.blinker.due(t)

        if task.complete or target_id is None:
            return {
                "hand_pos": self.hand, "gaze_target": Vec3(0.0, 1.2, 2.0),
                "openness": CLOSED, "strain_level": 0.0, "blink": blink,
            }

        block = task.block(target_id)
        goal = task.goal_slot(target_id)
        strain = 1.0 if (self.condition.strain and self.strain_bursts) else 0.0

        if self.phase == "warmup":
            # hold gaze on the first block until the focus detector latches
            if self.concentrated_seen:
                self.phase = "reposition"
            return {
                "hand_pos": self.hand, "gaze_target": block.position,
                "openness": CLOSED, "strain_level": 0.0, "blink": blink,
            }

        if self.phase == "reposition":
            if self.grip is None:
                self.grip = self._grip_point(block.position, goal)
            to_grip = self.grip - self.hand
            gap = to_grip.norm()
            if gap < 0.01:
                self.phase = "steer"
                self.grip = None
            else:
                step = min(HAND_MAX_STEP, gap)
                self.hand = self.hand + unit_or_zero(to_grip).scaled(step)
            return {
                "hand_pos": self.hand, "gaze_target": block.position,
                "openness": CLOSED, "strain_level": strain, "blink": blink,
            }

        if self.phase == "steer":
            e_norm = (goal - block.position).norm()
            dist = (block.position - self.hand).norm()
            if e_norm <= RELEASE_RADIUS:
                self.phase = "release"
                self.release_ticks = 4
            elif not (DIST_BAND[0] <= dist <= DIST_BAND[1]):
                self.phase = "reposition"   # re-grip: hand drifted out of range
            else:
                self.hand = self.hand + self._steer_delta(self.hand, block.position, goal)
                return {
                    "hand_pos": self.hand, "gaze_target": block.position,
                    "openness": OPEN, "strain_level": strain, "blink": blink,
                }
            return {
                "hand_pos": self.hand, "gaze_target": block.position,
                "openness": CLOSED if self.phase == "reposition" else RELEASE_OPEN,
                "strain_level": strain, "blink": blink,
            }

        # release: hand frozen and closed; the snap check does the rest
        self.release_ticks -= 1
        if self.release_ticks <= 0:
            self.phase = "reposition"
        return {
            "hand_pos": self.hand, "gaze_target": block.position,
            "openness": RELEASE_OPEN, "strain_level": strain, "blink": blink,
        }

    def observe(self, concentrated: bool) -> None:
        if concentrated:
            self.concentrated_seen = True


def synthesize_operator(
    condition: FactorCondition,
    cfg: EngineConfig,
    seed: int,
    strain_bursts: bool = True,
    max_seconds: float = 240.0,
) -> list[SensorFrame]:
    """Closed-loop trace generation; the returned frames replay to completion.

    ``strain_bursts=False`` is a debug/negative-control switch: the operator
    goes through the motions but never produces muscle bursts, so under a
    strain-enabled condition the gate never opens and the task stays
    incomplete.
    """
    calib = operator_calibration(cfg, seed)
    engine = Engine(cfg, condition, calib)
    synth = FrameSynthesizer(cfg, derive(seed, "operator-noise"))
    policy = _Policy(cfg, condition, engine, strain_bursts)
    frames: list[SensorFrame] = []
    max_ticks = int(max_seconds * cfg.tick_rate)
    for i in range(max_ticks):
        cmd = policy.command(i / cfg.tick_rate)
        if cmd.pop("blink", False):
            synth.trigger_blink()
        frame = synth.frame(**cmd)
        snapshot = engine.tick(frame)
        frames.append(frame)
        policy.observe(snapshot.concentrated)
        if snapshot.complete:
            break
    return frames
