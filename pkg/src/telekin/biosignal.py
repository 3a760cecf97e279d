"""Causal detectors for the two operator-state signals.

Focus is read from blink sparseness: blinking slows down when someone locks
onto a target, so the detector keeps the most recent blink-to-blink intervals
(counted in gaze-on-target time only) and reports focus while their mean
exceeds a per-person threshold calibrated from a relaxed baseline.

Effort is read from the muscle channel: per-batch strength is the rectified
mean after removing a trailing-window DC estimate, min-max normalized against
running session extrema.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from telekin.canonical import canon_float, dumps_pretty
from telekin.config import EngineConfig
from telekin.errors import CalibrationError, TraceParseError, ValidationError
from telekin.geometry import Vec3, angle_deg, ray_hits_box

# Ring of intervals survives brief glances away; a longer look-away resets it.
GAZE_RESET_SECONDS = 1.0
# DC estimate window, in seconds of raw samples.
DC_WINDOW_SECONDS = 1.0
# Strength ranges this small (millivolts) are rounding dust, not signal; the
# normalizer treats them as flat so constant streams map to exactly 0.
FLAT_RANGE_EPS = 1e-12


@dataclass(frozen=True, slots=True)
class ConcentrationCalibration:
    mean_interval: float
    c_th: float


class BlinkDetector:
    """Schmitt trigger on eye openness.

    Closing below the low threshold arms a blink; it is reported once the eye
    re-opens above the high threshold, stamped with the closing time.  The
    hysteresis band rejects partial closures.
    """

    def __init__(self, close_th: float, open_th: float):
        if not close_th < open_th:
            raise ValidationError("blink thresholds must satisfy close_th < open_th")
        self.close_th = close_th
        self.open_th = open_th
        self.phase = "open"
        self._pending_onset: float | None = None

    def step(self, eye_openness: float, t: float) -> float | None:
        """Returns the blink onset time when a blink completes, else None."""
        if self.phase == "open":
            if eye_openness < self.close_th:
                self.phase = "closed"
                self._pending_onset = t
        else:
            if eye_openness > self.open_th:
                self.phase = "open"
                onset = self._pending_onset
                self._pending_onset = None
                return onset
        return None


class ConcentrationTracker:
    """Gaze-gated interval ring behind the focus decision.

    The interval clock only runs while the gaze is on the target, so time
    spent looking elsewhere neither shortens nor lengthens an interval.
    Looking away for longer than GAZE_RESET_SECONDS discards the ring.
    """

    def __init__(self, window_blinks: int):
        self.intervals: deque[float] = deque(maxlen=window_blinks)
        self._window = window_blinks
        self._clock = 0.0
        self._off_gaze = 0.0
        self._last_mark: float | None = None

    def tick(self, gaze_on: bool, dt: float, blink: bool) -> None:
        if gaze_on:
            self._clock += dt
            self._off_gaze = 0.0
        else:
            self._off_gaze += dt
            if self._off_gaze > GAZE_RESET_SECONDS and (self.intervals or self._last_mark is not None):
                self.intervals.clear()
                self._last_mark = None
        if blink:
            if self._last_mark is not None:
                interval = self._clock - self._last_mark
                if interval > 0.0:
                    self.intervals.append(interval)
            self._last_mark = self._clock

    def ring_mean(self) -> float | None:
        if not self.intervals:
            return None
        return sum(self.intervals) / len(self.intervals)

    def concentrated(self, calib: ConcentrationCalibration, gaze_on: bool) -> bool:
        if len(self.intervals) < self._window or not gaze_on:
            return False
        mean = sum(self.intervals) / len(self.intervals)
        return mean > calib.c_th


def calibrate(blink_onsets: list[float], c_multiplier: float) -> ConcentrationCalibration:
    """Baseline from a relaxed recording: mean blink-to-blink interval."""
    if len(blink_onsets) < 2:
        raise CalibrationError(
            f"need at least 2 blinks to calibrate, got {len(blink_onsets)}"
        )
    intervals = [b - a for a, b in zip(blink_onsets, blink_onsets[1:])]
    if any(iv <= 0 for iv in intervals):
        raise CalibrationError("blink onsets must strictly increase")
    mean = sum(intervals) / len(intervals)
    return ConcentrationCalibration(mean_interval=mean, c_th=c_multiplier * mean)


def gaze_on_target(
    gaze_origin: Vec3,
    gaze_dir: Vec3,
    center: Vec3,
    half_extent: Vec3,
    gaze_half_angle: float,
) -> bool:
    """Gaze counts as on-target inside the angular cone or on box intersection."""
    to_center = center - gaze_origin
    if to_center.norm() < 1e-12:
        return True
    if angle_deg(gaze_dir, to_center) <= gaze_half_angle:
        return True
    return ray_hits_box(gaze_origin, gaze_dir, center, half_extent)


class EmgPipeline:
    """Raw muscle samples -> rectified batch strength -> normalized [0, 1]."""

    def __init__(self, emg_rate: int):
        n = max(1, int(round(emg_rate * DC_WINDOW_SECONDS)))
        self._dc_window: deque[float] = deque(maxlen=n)
        self._dc_sum = 0.0
        self.f_min: float | None = None
        self.f_max: float | None = None
        self.last_fprime = 0.0

    def seed_extrema(self, f_min: float, f_max: float) -> None:
        if f_min > f_max:
            raise ValidationError("extrema seed requires f_min <= f_max")
        self.f_min = f_min
        self.f_max = f_max

    def strength(self, batch: tuple[float, ...]) -> float:
        if not batch:
            raise ValidationError("emg batch is empty")
        for s in batch:
            if len(self._dc_window) == self._dc_window.maxlen:
                self._dc_sum -= self._dc_window[0]
            self._dc_window.append(s)
            self._dc_sum += s
        dc = self._dc_sum / len(self._dc_window)
        return sum(abs(s - dc) for s in batch) / len(batch)

    def normalize(self, f_t: float) -> float:
        # Extrema absorb the new reading first, so the output never escapes [0, 1].
        self.f_min = f_t if self.f_min is None else min(self.f_min, f_t)
        self.f_max = f_t if self.f_max is None else max(self.f_max, f_t)
        if self.f_max - self.f_min <= FLAT_RANGE_EPS:
            fprime = 0.0
        else:
            fprime = (f_t - self.f_min) / (self.f_max - self.f_min)
        self.last_fprime = fprime
        return fprime

    def process_batch(self, batch: tuple[float, ...]) -> float:
        return self.normalize(self.strength(batch))


def strain_state(fprime: float, f_th: float) -> bool:
    return fprime > f_th


@dataclass(frozen=True, slots=True)
class Calibration:
    """Everything a gated run needs from the baseline pass."""

    mean_interval: float
    c_th: float
    f_min: float
    f_max: float

    def concentration(self) -> ConcentrationCalibration:
        return ConcentrationCalibration(self.mean_interval, self.c_th)

    def as_dict(self) -> dict:
        return {
            "version": 1,
            "mean_interval": canon_float(self.mean_interval),
            "c_th": canon_float(self.c_th),
            "f_min": canon_float(self.f_min),
            "f_max": canon_float(self.f_max),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Calibration":
        try:
            return cls(
                mean_interval=float(data["mean_interval"]),
                c_th=float(data["c_th"]),
                f_min=float(data["f_min"]),
                f_max=float(data["f_max"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad calibration payload: {exc}") from exc


def load_calibration(path: str | Path) -> Calibration:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return Calibration.from_dict(data)


def save_calibration(calib: Calibration, path: str | Path) -> None:
    Path(path).write_text(dumps_pretty(calib.as_dict()), encoding="utf-8")


def calibrate_from_frames(frames, cfg: EngineConfig, window_seconds: float = 60.0) -> Calibration:
    """Run both detectors over a relaxed trace and freeze the baselines.

    Blink intervals come from the first ``window_seconds`` of the recording;
    the strength extrema are taken over the whole of it.
    """
    if not frames:
        raise CalibrationError("calibration trace is empty")
    duration = frames[-1].t - frames[0].t + cfg.tick_period
    if duration + 1e-9 < window_seconds:
        raise CalibrationError(
            f"calibration trace covers {duration:.1f} s, need at least {window_seconds:.0f} s"
        )
    detector = BlinkDetector(cfg.blink_close_th, cfg.blink_open_th)
    pipeline = EmgPipeline(cfg.emg_rate)
    onsets: list[float] = []
    t0 = frames[0].t
    for frame in frames:
        onset = detector.step(frame.eye_openness, frame.t)
        if onset is not None and onset - t0 <= window_seconds:
            onsets.append(onset)
        pipeline.process_batch(frame.emg_batch)
    conc = calibrate(onsets, cfg.c_multiplier)
    if pipeline.f_min is None or pipeline.f_max is None:
        raise CalibrationError("calibration trace produced no strength samples")
    # canonical values so the in-memory calibration equals its persisted form
    return Calibration(
        mean_interval=canon_float(conc.mean_interval),
        c_th=canon_float(conc.c_th),
        f_min=canon_float(pipeline.f_min),
        f_max=canon_float(pipeline.f_max),
    )
