"""Per-tick object-follow control law.

The object tracks the open hand without contact.  Each tick the hand motion is
split into a component along the hand-object line (depth) and a transverse
remainder; whichever dominates picks the object's direction, a direction-
similarity hysteresis lets a strong gesture coast through a momentary slowdown,
and the displacement scales with both hand speed and hand-object distance:

    step      = k * s * dir(t)
    s         = m(t) * |object - hand|
    m(t)      = m(t-1)            if m(t-1) > m_raw and dir similar
                m_raw             otherwise
    dir(t)    = D * unit(object - hand)   if depth motion dominates
                unit(hand_t - hand_t-1)   if transverse motion dominates
                dir(t-1)                  otherwise

D = -sign(depth motion): drawing the hand in pulls the object closer, backing
it off pushes the object away.  All of it is a pure state transition; the
caller owns activation.
"""

from __future__ import annotations

from dataclasses import dataclass

from telekin.config import EngineConfig
from telekin.geometry import ZERO, Vec3, unit_or_zero

_AXIS_EPS = 1e-12


@dataclass(frozen=True, slots=True)
class ManipulationState:
    prev_hand: Vec3
    prev_m: float          # effective hand movement last tick, meters/tick
    prev_dir: Vec3         # unit direction or the zero sentinel
    object_pos: Vec3


@dataclass(frozen=True, slots=True)
class MotionDecomposition:
    m_d: float             # along the hand-object axis, >= 0
    m_vh: float            # transverse remainder, >= 0
    d_sign: int            # +1 push / -1 pull orientation for the depth case


def initial_state(hand: Vec3, object_pos: Vec3) -> ManipulationState:
    return ManipulationState(prev_hand=hand, prev_m=0.0, prev_dir=ZERO, object_pos=object_pos)


def decompose_motion(h_t: Vec3, state: ManipulationState) -> MotionDecomposition:
    dh = h_t - state.prev_hand
    axis = state.object_pos - h_t
    n = axis.norm()
    if n < _AXIS_EPS:
        # Hand sits on the object: no depth axis, everything is transverse.
        return MotionDecomposition(m_d=0.0, m_vh=dh.norm(), d_sign=+1)
    a = axis.scaled(1.0 / n)
    along = dh.dot(a)
    trans = dh - a.scaled(along)
    return MotionDecomposition(
        m_d=abs(along),
        m_vh=trans.norm(),
        d_sign=-1 if along > 0.0 else +1,
    )


def similarity(dir_t: Vec3, dir_prev: Vec3, sim_th: float) -> bool:
    """Strictly-greater dot-product test; the zero sentinel never matches."""
    if dir_t == ZERO or dir_prev == ZERO:
        return False
    return dir_t.dot(dir_prev) > sim_th


def effective_magnitude(m_raw: float, state: ManipulationState, sim: bool) -> float:
    if state.prev_m > m_raw and sim:
        return state.prev_m
    return m_raw


def select_direction(
    h_t: Vec3, state: ManipulationState, dec: MotionDecomposition, m_th: float
) -> Vec3:
    if dec.m_d > dec.m_vh and dec.m_d > m_th:
        u = unit_or_zero(state.object_pos - h_t)
        if u != ZERO:
            return u.scaled(float(dec.d_sign))
    elif dec.m_vh > dec.m_d and dec.m_vh > m_th:
        u = unit_or_zero(h_t - state.prev_hand)
        if u != ZERO:
            return u
    return state.prev_dir


def speed(m_eff: float, h_t: Vec3, object_pos: Vec3) -> float:
    return m_eff * (object_pos - h_t).norm()


def displacement(k: float, s: float, direction: Vec3) -> Vec3:
    return direction.scaled(k * s)


def step(state: ManipulationState, h_t: Vec3, active: bool, cfg: EngineConfig) -> ManipulationState:
    """Advance one tick.

    Inactive ticks leave the object alone but keep tracking the hand, with the
    movement memory cleared so a fresh activation cannot inherit stale speed.
    """
    if not active:
        return ManipulationState(prev_hand=h_t, prev_m=0.0, prev_dir=ZERO,
                                 object_pos=state.object_pos)
    dec = decompose_motion(h_t, state)
    dir_t = select_direction(h_t, state, dec, cfg.m_th)
    sim = similarity(dir_t, state.prev_dir, cfg.sim_th)
    m_raw = (h_t - state.prev_hand).norm()
    m_eff = effective_magnitude(m_raw, state, sim)
    s = speed(m_eff, h_t, state.object_pos)
    dx = displacement(cfg.k, s, dir_t)
    return ManipulationState(prev_hand=h_t, prev_m=m_eff, prev_dir=dir_t,
                             object_pos=state.object_pos + dx)
