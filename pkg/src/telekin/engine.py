"""Per-tick world orchestrator.

Each sensor frame flows through the detectors, the activation gate, the
object-follow law for the selected block, the per-site warmth loops, and the
stacking scorer, producing one immutable snapshot.  The whole tick is a pure
function of (trace, config, condition, calibration): replaying a trace twice
yields byte-identical snapshot streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from telekin import manipulation
from telekin.biosignal import (
    BlinkDetector,
    Calibration,
    ConcentrationTracker,
    EmgPipeline,
    gaze_on_target,
    strain_state,
)
from telekin.canonical import canon_float, dumps
from telekin.config import THERMAL_SITES, EngineConfig, FactorCondition
from telekin.errors import CalibrationError, ValidationError
from telekin.geometry import ZERO, Vec3, angle_deg, unit_or_zero
from telekin.thermal import ThermalController, ThermalPlant, controller_step, plant_step
from telekin.trace import SensorFrame
from telekin.world import ObjectState, TaskState, default_task

# A dropped gate keeps its target this long, so saccades mid-gesture do not
# flick the selection elsewhere.
STICKY_SECONDS = 0.25


@dataclass(frozen=True, slots=True)
class TelekinesisGate:
    gaze_ok: bool
    palm_ok: bool
    open_ok: bool
    conc_ok: bool
    strain_ok: bool
    active: bool


def gate_from_conjuncts(
    gaze_ok: bool,
    palm_ok: bool,
    open_ok: bool,
    conc_ok: bool,
    strain_ok: bool,
    condition: FactorCondition,
) -> TelekinesisGate:
    """Conjunction with disabled factors contributing true.

    Enabling a factor can only remove activations, never add them; that
    monotonicity is what makes the factor conditions comparable.
    """
    active = (
        gaze_ok
        and palm_ok
        and open_ok
        and (conc_ok or not condition.concentration)
        and (strain_ok or not condition.strain)
    )
    return TelekinesisGate(gaze_ok, palm_ok, open_ok, conc_ok, strain_ok, active)


def select_target(
    gaze_origin: Vec3,
    gaze_dir: Vec3,
    palm_normal: Vec3,
    hand_pos: Vec3,
    objects: list[ObjectState],
    gaze_half_angle: float,
) -> str | None:
    """Best gazed-at object the palm is facing, by smallest angular offset."""
    best_id: str | None = None
    best_angle = float("inf")
    for obj in objects:
        if not gaze_on_target(gaze_origin, gaze_dir, obj.position, obj.half_extent, gaze_half_angle):
            continue
        toward = unit_or_zero(obj.position - hand_pos)
        if toward == ZERO or palm_normal.dot(toward) <= 0.0:
            continue
        offset = angle_deg(gaze_dir, obj.position - gaze_origin)
        if offset < best_angle:
            best_angle = offset
            best_id = obj.id
    return best_id


@dataclass(frozen=True, slots=True)
class EngineSnapshot:
    t: float
    hand_pos: Vec3
    hand_openness: float
    gate: TelekinesisGate
    selected: str | None
    objects: tuple[tuple[str, Vec3, bool], ...]   # (id, position, snapped)
    fprime: float
    blink_mean: float | None
    concentrated: bool
    thermal: dict[str, tuple[float, bool]]        # site -> (temp, heater_on)
    stacked: tuple[str, ...]
    next_block: str | None
    next_goal: Vec3 | None
    complete: bool
    elapsed: float

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "hand": {"pos": self.hand_pos.as_list(), "openness": self.hand_openness},
            "gate": {
                "gaze": self.gate.gaze_ok,
                "palm": self.gate.palm_ok,
                "open": self.gate.open_ok,
                "concentration": self.gate.conc_ok,
                "strain": self.gate.strain_ok,
                "active": self.gate.active,
            },
            "selected": self.selected,
            "objects": [
                {"id": oid, "pos": pos.as_list(), "snapped": snapped}
                for oid, pos, snapped in self.objects
            ],
            "detectors": {
                "fprime": self.fprime,
                "blink_mean": self.blink_mean,
                "concentrated": self.concentrated,
            },
            "thermal": {
                site: {"temp": temp, "heater": heater}
                for site, (temp, heater) in self.thermal.items()
            },
            "task": {
                "stacked": list(self.stacked),
                "next": self.next_block,
                "next_goal": self.next_goal.as_list() if self.next_goal else None,
                "complete": self.complete,
                "elapsed": self.elapsed,
            },
        }

    def to_json(self) -> str:
        return dumps(self.as_dict())


@dataclass(slots=True)
class RunStats:
    ticks: int = 0
    active_ticks: int = 0
    stimulated_ticks: int = 0
    conjunct_ticks: dict = field(default_factory=lambda: {
        "gaze": 0, "palm": 0, "open": 0, "concentration": 0, "strain": 0,
    })
    completion_time: float | None = None


class Engine:
    def __init__(
        self,
        cfg: EngineConfig,
        condition: FactorCondition,
        calibration: Calibration | None = None,
        task: TaskState | None = None,
        plant_params: dict | None = None,
    ):
        cfg.validate()
        if condition.concentration and calibration is None:
            raise CalibrationError(
                "the concentration factor needs a calibration (focus threshold)"
            )
        self.cfg = cfg
        self.condition = condition
        self.calibration = calibration
        self.task = task if task is not None else default_task()
        self._plant_params = dict(plant_params or {})

        self._blink = BlinkDetector(cfg.blink_close_th, cfg.blink_open_th)
        self._conc = ConcentrationTracker(cfg.window_blinks)
        self._emg = EmgPipeline(cfg.emg_rate)
        if calibration is not None:
            self._emg.seed_extrema(calibration.f_min, calibration.f_max)

        self._thermal: dict[str, tuple[ThermalController, ThermalPlant]] = {}
        self._prev_hand: Vec3 | None = None
        self._sticky_id: str | None = None
        self._sticky_gap = 0.0
        self._bound_id: str | None = None
        self._prev_m = 0.0
        self._prev_dir = ZERO
        self._last_t: float | None = None
        self.stats = RunStats()

    # -- per-tick pipeline -------------------------------------------------

    def tick(self, frame: SensorFrame) -> EngineSnapshot:
        cfg = self.cfg
        period = cfg.tick_period
        if self._last_t is not None and frame.t <= self._last_t + 1e-9:
            raise ValidationError(
                f"out-of-order frame: t={frame.t} after t={self._last_t}"
            )
        self._last_t = frame.t
        if self._prev_hand is None:
            self._prev_hand = frame.hand_pos
        if not self._thermal:
            for site in THERMAL_SITES:
                baseline = frame.skin_temp[site]
                ctrl = ThermalController.for_site(site, baseline, cfg)
                plant = ThermalPlant(temp=baseline, ambient=baseline, **self._plant_params)
                self._thermal[site] = (ctrl, plant)

        # detectors first: the gate judges this frame's outputs
        f_t = self._emg.strength(frame.emg_batch)
        fprime = self._emg.normalize(f_t)
        strain_ok = strain_state(fprime, cfg.f_th)
        onset = self._blink.step(frame.eye_openness, frame.t)

        # target selection: sticky target wins while the hold window lasts
        candidate = select_target(
            frame.gaze_origin, frame.gaze_dir, frame.palm_normal, frame.hand_pos,
            self.task.blocks, cfg.gaze_half_angle,
        )
        selected = self._sticky_id if self._sticky_id is not None else candidate

        gaze_ok = palm_ok = False
        if selected is not None:
            obj = self.task.block(selected)
            gaze_ok = gaze_on_target(
                frame.gaze_origin, frame.gaze_dir, obj.position, obj.half_extent,
                cfg.gaze_half_angle,
            )
            toward = unit_or_zero(obj.position - frame.hand_pos)
            palm_ok = toward != ZERO and frame.palm_normal.dot(toward) > 0.0
        open_ok = frame.hand_openness > cfg.openness_th

        self._conc.tick(gaze_on=gaze_ok, dt=period, blink=onset is not None)
        conc_ok = False
        if self.calibration is not None:
            conc_ok = self._conc.concentrated(self.calibration.concentration(), gaze_ok)

        gate = gate_from_conjuncts(gaze_ok, palm_ok, open_ok, conc_ok, strain_ok, self.condition)

        # stickiness keys on the condition-independent core of the gate, so
        # the selection stream is identical whatever factors are enabled
        if gaze_ok and palm_ok and open_ok and selected is not None:
            self._sticky_id = selected
            self._sticky_gap = 0.0
        elif self._sticky_id is not None:
            self._sticky_gap += period
            if self._sticky_gap > STICKY_SECONDS:
                self._sticky_id = None
                self._sticky_gap = 0.0

        # move the selected block, if it is the one the task currently allows
        steerable = (
            selected is not None
            and not self.task.complete
            and selected == self.task.next_required()
        )
        if selected != self._bound_id:
            self._bound_id = selected
            self._prev_m = 0.0
            self._prev_dir = ZERO
        if selected is not None:
            obj = self.task.block(selected)
            state = manipulation.ManipulationState(
                prev_hand=self._prev_hand,
                prev_m=self._prev_m,
                prev_dir=self._prev_dir,
                object_pos=obj.position,
            )
            state = manipulation.step(state, frame.hand_pos, gate.active and steerable, cfg)
            self._prev_m = state.prev_m
            self._prev_dir = state.prev_dir
            obj.position = state.object_pos
        self._prev_hand = frame.hand_pos

        # warmth loops, one per site, closed over the simulated skin
        stimulate = gate.active and self.condition.energy
        thermal_out: dict[str, tuple[float, bool]] = {}
        for site in THERMAL_SITES:
            ctrl, plant = self._thermal[site]
            heater = controller_step(ctrl, plant.temp, stimulate, cfg)
            plant_step(plant, heater, period)
            thermal_out[site] = (plant.temp, heater)

        # score the task
        self.task.elapsed += period
        nxt = self.task.next_required()
        if nxt is not None:
            block = self.task.block(nxt)
            goal = self.task.goal_slot(nxt)
            gate_held = gate.active and selected == nxt
            if not gate_held and (block.position - goal).norm() <= cfg.snap_tolerance:
                block.position = goal
                self.task.stacked.append(nxt)
                if self.task.stacked == self.task.required_order:
                    self.task.complete = True
        for b in self.task.blocks:
            b.selected = b.id == selected

        self._update_stats(gate, stimulate)
        return self._snapshot(frame, gate, selected, fprime, conc_ok, thermal_out)

    def _update_stats(self, gate: TelekinesisGate, stimulate: bool) -> None:
        s = self.stats
        s.ticks += 1
        s.active_ticks += gate.active
        s.stimulated_ticks += stimulate
        s.conjunct_ticks["gaze"] += gate.gaze_ok
        s.conjunct_ticks["palm"] += gate.palm_ok
        s.conjunct_ticks["open"] += gate.open_ok
        s.conjunct_ticks["concentration"] += gate.conc_ok
        s.conjunct_ticks["strain"] += gate.strain_ok
        if self.task.complete and s.completion_time is None:
            s.completion_time = self.task.elapsed

    def _snapshot(
        self,
        frame: SensorFrame,
        gate: TelekinesisGate,
        selected: str | None,
        fprime: float,
        conc_ok: bool,
        thermal_out: dict[str, tuple[float, bool]],
    ) -> EngineSnapshot:
        task = self.task
        nxt = task.next_required()
        mean = self._conc.ring_mean()
        return EngineSnapshot(
            t=frame.t,
            hand_pos=frame.hand_pos,
            hand_openness=frame.hand_openness,
            gate=gate,
            selected=selected,
            objects=tuple(
                (b.id, b.position, b.id in task.stacked) for b in task.blocks
            ),
            fprime=canon_float(fprime),
            blink_mean=None if mean is None else canon_float(mean),
            concentrated=conc_ok,
            thermal={site: (canon_float(t), h) for site, (t, h) in thermal_out.items()},
            stacked=tuple(task.stacked),
            next_block=nxt,
            next_goal=task.goal_slot(nxt) if nxt is not None else None,
            complete=task.complete,
            elapsed=canon_float(task.elapsed),
        )

    def report(self) -> dict:
        s = self.stats
        return {
            "version": 1,
            "condition": self.condition.as_dict(),
            "complete": self.task.complete,
            "completion_time": None if s.completion_time is None else canon_float(s.completion_time),
            "ticks": s.ticks,
            "active_ticks": s.active_ticks,
            "stimulated_ticks": s.stimulated_ticks,
            "conjunct_ticks": dict(s.conjunct_ticks),
            "stacked": list(self.task.stacked),
        }


def run_trace(
    frames,
    cfg: EngineConfig,
    condition: FactorCondition,
    calibration: Calibration | None = None,
    task: TaskState | None = None,
) -> tuple[list[EngineSnapshot], dict]:
    engine = Engine(cfg, condition, calibration, task)
    snapshots = [engine.tick(frame) for frame in frames]
    return snapshots, engine.report()
