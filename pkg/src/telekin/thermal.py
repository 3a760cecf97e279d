"""Warmth feedback: bang-bang heater control over a simulated skin patch.

The controller holds skin temperature at baseline + offset while stimulation
is requested, with a hysteresis band so the relay does not chatter, and a hard
ceiling that always wins.  The plant standing in for heater-on-skin is a
first-order lag with separate heat-up and cool-down time constants, stepped
with the exact exponential update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from telekin.config import EngineConfig
from telekin.errors import ValidationError


@dataclass(slots=True)
class ThermalController:
    site: str
    baseline: float
    setpoint: float
    heater_on: bool = False

    @classmethod
    def for_site(cls, site: str, baseline: float, cfg: EngineConfig) -> "ThermalController":
        if not math.isfinite(baseline):
            raise ValidationError(f"{site}: baseline temperature must be finite")
        return cls(site=site, baseline=baseline,
                   setpoint=min(baseline + cfg.temp_offset, cfg.temp_cap))


def controller_step(
    ctrl: ThermalController, measured: float, stimulate: bool, cfg: EngineConfig
) -> bool:
    """One relay decision; returns (and stores) the heater command."""
    if not stimulate or measured >= cfg.temp_cap:
        ctrl.heater_on = False
    elif measured < ctrl.setpoint - cfg.temp_hysteresis:
        ctrl.heater_on = True
    elif measured > ctrl.setpoint + cfg.temp_hysteresis:
        ctrl.heater_on = False
    # inside the band: hold the previous command
    return ctrl.heater_on


@dataclass(slots=True)
class ThermalPlant:
    temp: float
    ambient: float
    tau_heat: float = 8.0      # seconds
    tau_cool: float = 20.0     # seconds
    heater_gain: float = 12.0  # degC above ambient at saturation

    def __post_init__(self) -> None:
        if self.tau_heat <= 0 or self.tau_cool <= 0:
            raise ValidationError("plant time constants must be positive")
        if not math.isfinite(self.temp):
            raise ValidationError("plant temperature must be finite")


def plant_step(plant: ThermalPlant, heater_on: bool, dt: float) -> ThermalPlant:
    if dt <= 0:
        raise ValidationError("plant step requires dt > 0")
    if heater_on:
        target = plant.ambient + plant.heater_gain
        tau = plant.tau_heat
    else:
        target = plant.ambient
        tau = plant.tau_cool
    plant.temp = target + (plant.temp - target) * math.exp(-dt / tau)
    return plant
