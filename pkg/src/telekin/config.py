"""Engine configuration and the three-factor experiment condition.

All tunables live here rather than being hard-coded at the point of use;
defaults are desk-scale values that make the stacking task comfortable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from telekin.canonical import canon_float, dumps_pretty
from telekin.errors import TraceParseError, ValidationError

THERMAL_SITES = ("forearm", "forehead", "palm")


@dataclass(frozen=True, slots=True)
class FactorCondition:
    """One cell of the 2x2x2 design: each factor gate is enabled or not."""

    concentration: bool = False
    strain: bool = False
    energy: bool = False

    def key(self) -> str:
        yn = lambda b: "yes" if b else "no"
        return f"c={yn(self.concentration)},s={yn(self.strain)},e={yn(self.energy)}"

    def as_dict(self) -> dict:
        return {
            "concentration": self.concentration,
            "strain": self.strain,
            "energy": self.energy,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FactorCondition":
        return cls(
            concentration=bool(data.get("concentration", False)),
            strain=bool(data.get("strain", False)),
            energy=bool(data.get("energy", False)),
        )

    @classmethod
    def parse(cls, text: str) -> "FactorCondition":
        """Parse a flag string like ``c=yes,s=no,e=yes``.

        Keys may be abbreviated (c/s/e) or spelled out; unknown keys are
        rejected, omitted keys default to "no".
        """
        aliases = {
            "c": "concentration",
            "concentration": "concentration",
            "s": "strain",
            "strain": "strain",
            "e": "energy",
            "energy": "energy",
        }
        values = {"concentration": False, "strain": False, "energy": False}
        if text.strip():
            for part in text.split(","):
                if "=" not in part:
                    raise ValidationError(f"bad condition item {part!r}, expected key=yes|no")
                key, _, raw = part.partition("=")
                key = key.strip().lower()
                raw = raw.strip().lower()
                if key not in aliases:
                    raise ValidationError(f"unknown condition key {key!r}")
                if raw not in ("yes", "no"):
                    raise ValidationError(f"condition value for {key!r} must be yes or no, got {raw!r}")
                values[aliases[key]] = raw == "yes"
        return cls(**values)


def all_conditions() -> list[FactorCondition]:
    """The 8 cells, in a fixed canonical order (concentration, strain, energy)."""
    out = []
    for c in (False, True):
        for s in (False, True):
            for e in (False, True):
                out.append(FactorCondition(c, s, e))
    return out


@dataclass(frozen=True, slots=True)
class EngineConfig:
    k: float = 1.0                  # control-law sensitivity
    sim_th: float = 0.7             # direction-similarity threshold (dot product)
    m_th: float = 0.002             # hand-movement threshold, meters/tick
    f_th: float = 0.5               # normalized muscle-strength threshold
    openness_th: float = 0.7        # hand counts as open above this
    gaze_half_angle: float = 5.0    # degrees
    tick_rate: int = 90             # Hz
    emg_rate: int = 2000            # Hz
    blink_close_th: float = 0.3
    blink_open_th: float = 0.6
    c_multiplier: float = 1.67      # focus threshold = multiplier x baseline blink interval
    window_blinks: int = 5
    temp_offset: float = 2.0        # degC above baseline
    temp_cap: float = 40.0          # degC hard ceiling
    temp_hysteresis: float = 0.2    # degC
    snap_tolerance: float = 0.05    # meters

    @property
    def tick_period(self) -> float:
        return 1.0 / self.tick_rate

    def validate(self) -> "EngineConfig":
        problems = []
        if not self.k > 0:
            problems.append("k must be > 0")
        if not (isinstance(self.tick_rate, int) and self.tick_rate > 0):
            problems.append("tick_rate must be a positive integer")
        if not (isinstance(self.emg_rate, int) and self.emg_rate > 0):
            problems.append("emg_rate must be a positive integer")
        if isinstance(self.tick_rate, int) and isinstance(self.emg_rate, int) \
                and self.tick_rate > 0 and self.emg_rate < self.tick_rate:
            problems.append("emg_rate must be >= tick_rate")
        if not 0 < self.f_th < 1:
            problems.append("f_th must lie strictly between 0 and 1")
        if not -1 <= self.sim_th <= 1:
            problems.append("sim_th must lie in [-1, 1]")
        if not self.blink_close_th < self.blink_open_th:
            problems.append("blink_close_th must be < blink_open_th")
        if not self.m_th >= 0:
            problems.append("m_th must be >= 0")
        if not 0 <= self.openness_th <= 1:
            problems.append("openness_th must lie in [0, 1]")
        if not self.gaze_half_angle > 0:
            problems.append("gaze_half_angle must be > 0")
        if not self.window_blinks >= 1:
            problems.append("window_blinks must be >= 1")
        if not self.c_multiplier > 0:
            problems.append("c_multiplier must be > 0")
        if not self.temp_hysteresis >= 0:
            problems.append("temp_hysteresis must be >= 0")
        if not self.snap_tolerance > 0:
            problems.append("snap_tolerance must be > 0")
        if problems:
            raise ValidationError("invalid config: " + "; ".join(problems))
        return self

    def emg_batch_length(self, tick_index: int) -> int:
        """Samples carried by the frame at ``tick_index``.

        The per-second sample budget is spread over ticks with the floor
        schedule, so non-divisible rates (2000 Hz over 90 ticks) alternate
        between n and n+1 samples and sum exactly to emg_rate each second.
        """
        i = tick_index % self.tick_rate
        r = self.emg_rate / self.tick_rate
        return int((i + 1) * r + 1e-9) - int(i * r + 1e-9)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = canon_float(v) if isinstance(v, float) else v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config fields: {unknown}")
        kwargs = {}
        for f in fields(cls):
            if f.name not in data:
                continue
            v = data[f.name]
            if f.type in ("float", float) and isinstance(v, int) and not isinstance(v, bool):
                v = float(v)
            kwargs[f.name] = v
        return cls(**kwargs).validate()


def load_config(path: str | Path) -> EngineConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: config root must be an object")
    return EngineConfig.from_dict(data)


def save_config(cfg: EngineConfig, path: str | Path) -> None:
    Path(path).write_text(dumps_pretty(cfg.as_dict()), encoding="utf-8")
