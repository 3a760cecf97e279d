"""Sensor traces: the JSONL stream every run consumes or records.

One frame per line, strictly tick-aligned.  Hardware streams (pose tracker,
eye tracker, muscle sensor, skin thermistors) are folded into a single frame
bundle so replays are self-contained.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from telekin.canonical import canon_float, dumps
from telekin.config import THERMAL_SITES
from telekin.errors import TraceParseError, ValidationError
from telekin.geometry import Vec3

# Persisted floats are canonical at 9 significant digits, which can nudge a
# perfectly normalized direction by a few 1e-9; allow that on re-validation.
PERSISTED_UNIT_TOL = 1e-8

_TIME_TOL = 1e-6


@dataclass(frozen=True, slots=True)
class SensorFrame:
    t: float
    hand_pos: Vec3
    palm_normal: Vec3
    hand_openness: float
    gaze_origin: Vec3
    gaze_dir: Vec3
    eye_openness: float
    emg_batch: tuple[float, ...]
    skin_temp: dict[str, float]

    def validate(self) -> "SensorFrame":
        for name in ("hand_pos", "palm_normal", "gaze_origin", "gaze_dir"):
            v: Vec3 = getattr(self, name)
            if not v.is_finite():
                raise ValidationError(f"frame t={self.t}: {name} has non-finite components")
        for name in ("palm_normal", "gaze_dir"):
            v = getattr(self, name)
            if abs(v.norm() - 1.0) > PERSISTED_UNIT_TOL:
                raise ValidationError(f"frame t={self.t}: {name} is not a unit vector")
        for name in ("hand_openness", "eye_openness"):
            x = getattr(self, name)
            if not (math.isfinite(x) and 0.0 <= x <= 1.0):
                raise ValidationError(f"frame t={self.t}: {name} must lie in [0, 1]")
        if not self.emg_batch:
            raise ValidationError(f"frame t={self.t}: emg_batch is empty")
        if set(self.skin_temp) != set(THERMAL_SITES):
            raise ValidationError(
                f"frame t={self.t}: skin_temp must carry exactly sites {THERMAL_SITES}"
            )
        return self

    def normalized(self) -> "SensorFrame":
        """The frame with every float passed through canonical rounding."""
        cv = lambda v: Vec3(canon_float(v.x), canon_float(v.y), canon_float(v.z))
        return SensorFrame(
            t=canon_float(self.t),
            hand_pos=cv(self.hand_pos),
            palm_normal=cv(self.palm_normal),
            hand_openness=canon_float(self.hand_openness),
            gaze_origin=cv(self.gaze_origin),
            gaze_dir=cv(self.gaze_dir),
            eye_openness=canon_float(self.eye_openness),
            emg_batch=tuple(canon_float(s) for s in self.emg_batch),
            skin_temp={site: canon_float(self.skin_temp[site]) for site in THERMAL_SITES},
        )

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "hand_pos": self.hand_pos.as_list(),
            "palm_normal": self.palm_normal.as_list(),
            "hand_openness": self.hand_openness,
            "gaze_origin": self.gaze_origin.as_list(),
            "gaze_dir": self.gaze_dir.as_list(),
            "eye_openness": self.eye_openness,
            "emg_batch": list(self.emg_batch),
            "skin_temp": {site: self.skin_temp[site] for site in THERMAL_SITES},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SensorFrame":
        def vec(key: str) -> Vec3:
            raw = data[key]
            if not (isinstance(raw, list) and len(raw) == 3):
                raise ValidationError(f"field {key} must be a 3-element array")
            return Vec3(float(raw[0]), float(raw[1]), float(raw[2]))

        required = {
            "t", "hand_pos", "palm_normal", "hand_openness",
            "gaze_origin", "gaze_dir", "eye_openness", "emg_batch", "skin_temp",
        }
        missing = sorted(required - set(data))
        if missing:
            raise ValidationError(f"frame is missing fields: {missing}")
        return cls(
            t=float(data["t"]),
            hand_pos=vec("hand_pos"),
            palm_normal=vec("palm_normal"),
            hand_openness=float(data["hand_openness"]),
            gaze_origin=vec("gaze_origin"),
            gaze_dir=vec("gaze_dir"),
            eye_openness=float(data["eye_openness"]),
            emg_batch=tuple(float(s) for s in data["emg_batch"]),
            skin_temp={site: float(data["skin_temp"][site]) for site in THERMAL_SITES},
        )


def _validate_sequence(frames: Sequence[SensorFrame]) -> None:
    if not frames:
        return
    period = None
    for i, frame in enumerate(frames):
        frame.validate()
        if i == 0:
            continue
        dt = frame.t - frames[i - 1].t
        if dt <= 0:
            raise ValidationError(f"frame {i + 1}: time does not increase (dt={dt})")
        if period is None:
            period = dt
        elif abs(dt - period) > _TIME_TOL:
            raise ValidationError(
                f"frame {i + 1}: tick period drifted ({dt} vs {period})"
            )
    _validate_batch_lengths(frames)


def _validate_batch_lengths(frames: Sequence[SensorFrame]) -> None:
    """Batch lengths must be constant, or follow the floor schedule of a
    fixed samples-per-tick ratio (the n / n+1 alternation of non-divisible
    sensor rates)."""
    lengths = [len(f.emg_batch) for f in frames]
    if len(set(lengths)) <= 1:
        return
    values = sorted(set(lengths))
    if len(values) != 2 or values[1] - values[0] != 1:
        idx = next(i for i, n in enumerate(lengths) if n != lengths[0])
        raise ValidationError(
            f"frame {idx + 1}: emg_batch length {lengths[idx]} differs from "
            f"line 1 ({lengths[0]}) beyond any sampling schedule"
        )
    dt = frames[1].t - frames[0].t
    tick_rate = round(1.0 / dt)
    if tick_rate < 1 or len(lengths) < tick_rate:
        return  # too short to pin the schedule; adjacent values already checked
    # any window of tick_rate consecutive ticks of a floor schedule carries a
    # full second of samples, which fixes the ratio; the phase is unknown
    ratio = sum(lengths[:tick_rate]) / tick_rate
    for phase in range(tick_rate):
        if all(
            n == int((i + phase + 1) * ratio + 1e-9) - int((i + phase) * ratio + 1e-9)
            for i, n in enumerate(lengths)
        ):
            return
    raise ValidationError(
        "emg_batch lengths do not follow a fixed sampling schedule"
    )


def load_trace(path: str | Path) -> list[SensorFrame]:
    frames: list[SensorFrame] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceParseError(f"{path}: line {line_no}: {exc.msg}") from exc
            try:
                frames.append(SensorFrame.from_dict(data))
            except (ValidationError, TypeError, KeyError, ValueError) as exc:
                raise TraceParseError(f"{path}: line {line_no}: {exc}") from exc
    try:
        _validate_sequence(frames)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return frames


def save_trace(frames: Iterable[SensorFrame], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(dumps(frame.normalized().as_dict()))
            fh.write("\n")
