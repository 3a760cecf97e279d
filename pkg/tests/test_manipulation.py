"""Control-law unit behavior plus equivalence against a second transcription.

The oracle below re-derives the five update rules from scratch on raw tuples,
sharing no code with the package; trajectories from both must agree to 1e-9.
"""

import math

import pytest

from telekin import manipulation as m
from telekin.config import EngineConfig
from telekin.geometry import ZERO, Vec3
from telekin.rng import SplitMix64

CFG = EngineConfig()


# --- independent oracle (tuple math, transcribed separately) ----------------

def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _mag(a):
    return math.sqrt(_dot(a, a))


def _norm(a):
    n = _mag(a)
    if n < 1e-12:
        return None
    return (a[0] / n, a[1] / n, a[2] / n)


def oracle_step(prev_hand, prev_m, prev_dir, obj, hand, k, sim_th, m_th):
    """One tick of the follow law, written straight from the update rules."""
    dh = _sub(hand, prev_hand)
    axis = _sub(obj, hand)
    axis_hat = _norm(axis)
    if axis_hat is None:
        m_d, m_vh, d_sign = 0.0, _mag(dh), 1
    else:
        along = _dot(dh, axis_hat)
        perp = _sub(dh, tuple(c * along for c in axis_hat))
        m_d = abs(along)
        m_vh = _mag(perp)
        d_sign = -1 if along > 0 else 1

    # direction
    direction = prev_dir
    if m_d > m_vh and m_d > m_th:
        u = _norm(_sub(obj, hand))
        if u is not None:
            direction = tuple(d_sign * c for c in u)
    elif m_vh > m_d and m_vh > m_th:
        u = _norm(dh)
        if u is not None:
            direction = u

    # similarity of consecutive directions (zero sentinel never similar)
    if direction == (0.0, 0.0, 0.0) or prev_dir == (0.0, 0.0, 0.0):
        sim = False
    else:
        sim = _dot(direction, prev_dir) > sim_th

    m_raw = _mag(dh)
    m_eff = prev_m if (prev_m > m_raw and sim) else m_raw
    s = m_eff * _mag(_sub(obj, hand))
    new_obj = tuple(o + k * s * d for o, d in zip(obj, direction))
    return hand, m_eff, direction, new_obj


# --- decomposition -----------------------------------------------------------

def _state(prev_hand=Vec3(0, 0, 0), prev_m=0.0, prev_dir=ZERO, obj=Vec3(0, 0, 2)):
    return m.ManipulationState(prev_hand, prev_m, prev_dir, obj)


def test_decompose_pure_depth():
    st = _state(prev_hand=Vec3(0, 0, 0), obj=Vec3(0, 0, 2))
    dec = m.decompose_motion(Vec3(0, 0, 0.05), st)
    assert dec.m_d == pytest.approx(0.05, abs=1e-12)
    assert dec.m_vh == pytest.approx(0.0, abs=1e-12)
    assert dec.d_sign == -1  # hand moved toward the object


def test_decompose_pure_transverse():
    st = _state(prev_hand=Vec3(0, 0.03, 0), obj=Vec3(0, 0, 2))
    dec = m.decompose_motion(Vec3(0, 0, 0), st)
    assert dec.m_d == pytest.approx(0.0, abs=1e-12)
    assert dec.m_vh == pytest.approx(0.03, abs=1e-12)


def test_decompose_45_degrees():
    # hand ends at origin with the object along +z; the previous hand position
    # sits so that the move is 0.01 along z and 0.01 along x
    st = _state(prev_hand=Vec3(-0.01, 0, -0.01), obj=Vec3(0, 0, 2))
    dec = m.decompose_motion(Vec3(0, 0, 0), st)
    assert dec.m_d == pytest.approx(0.01, abs=1e-12)
    assert dec.m_vh == pytest.approx(0.01, abs=1e-12)
    assert dec.d_sign == -1


def test_decompose_hand_on_object():
    st = _state(prev_hand=Vec3(0.01, 0, 0), obj=Vec3(0.03, 0, 0))
    dec = m.decompose_motion(Vec3(0.03, 0, 0), st)
    assert dec.m_d == 0.0
    assert dec.m_vh == pytest.approx(0.02, abs=1e-12)
    assert dec.d_sign == 1


# --- similarity / magnitude hysteresis ---------------------------------------

def test_similarity_cases():
    u = Vec3(1, 0, 0)
    v = Vec3(0, 1, 0)
    assert m.similarity(u, u, 0.7)
    assert not m.similarity(u, v, 0.7)
    assert not m.similarity(u, ZERO, 0.7)
    assert not m.similarity(ZERO, u, 0.7)


def test_similarity_equality_is_false():
    a = Vec3(1, 0, 0)
    b = Vec3(0.7, math.sqrt(1 - 0.49), 0)  # dot exactly 0.7
    assert a.dot(b) == pytest.approx(0.7, abs=1e-15)
    assert not m.similarity(a, b, 0.7)


def test_effective_magnitude():
    st = _state(prev_m=0.03)
    assert m.effective_magnitude(0.01, st, sim=True) == 0.03
    assert m.effective_magnitude(0.01, st, sim=False) == 0.01
    st2 = _state(prev_m=0.01)
    assert m.effective_magnitude(0.03, st2, sim=True) == 0.03


def test_hysteresis_nondecreasing_under_decay():
    # with sustained direction similarity, effective magnitude never drops
    rng = SplitMix64(2024)
    for _ in range(200):
        start = rng.uniform(0.01, 0.1)
        decay = rng.uniform(0.8, 0.99)
        raw = start
        st = _state(prev_m=0.0)
        prev_eff = 0.0
        for _ in range(50):
            eff = m.effective_magnitude(raw, st, sim=True)
            assert eff >= prev_eff - 1e-15
            st = m.ManipulationState(st.prev_hand, eff, st.prev_dir, st.object_pos)
            prev_eff = eff
            raw *= decay


# --- direction selection ------------------------------------------------------

def test_select_direction_depth_case():
    st = _state(prev_hand=Vec3(0, 0, 0), obj=Vec3(2, 0, 0))
    dec = m.MotionDecomposition(m_d=0.05, m_vh=0.01, d_sign=-1)
    out = m.select_direction(Vec3(0, 0, 0), st, dec, m_th=0.002)
    assert out == Vec3(-1, 0, 0)


def test_select_direction_transverse_case():
    st = _state(prev_hand=Vec3(0, -0.04, 0), obj=Vec3(0, 0, 2))
    dec = m.MotionDecomposition(m_d=0.0, m_vh=0.04, d_sign=1)
    out = m.select_direction(Vec3(0, 0, 0), st, dec, m_th=0.002)
    assert out.x == pytest.approx(0.0, abs=1e-12)
    assert out.y == pytest.approx(1.0, abs=1e-12)


def test_select_direction_below_threshold_keeps_previous():
    prev = Vec3(0, 0, 1)
    st = _state(prev_dir=prev)
    dec = m.MotionDecomposition(m_d=0.001, m_vh=0.001, d_sign=1)
    assert m.select_direction(Vec3(0, 0, 0), st, dec, m_th=0.002) == prev


def test_select_direction_tie_keeps_previous():
    prev = Vec3(1, 0, 0)
    st = _state(prev_dir=prev)
    dec = m.MotionDecomposition(m_d=0.01, m_vh=0.01, d_sign=-1)
    assert m.select_direction(Vec3(0, 0, 0), st, dec, m_th=0.002) == prev


# --- speed & displacement ------------------------------------------------------

def test_speed():
    assert m.speed(0.02, Vec3(0, 0, 0), Vec3(0, 0, 2)) == pytest.approx(0.04)
    assert m.speed(0.0, Vec3(0, 0, 0), Vec3(5, 5, 5)) == 0.0
    assert m.speed(0.01, Vec3(0, 0, 0), Vec3(3, 4, 0)) == pytest.approx(0.05)


def test_displacement():
    assert m.displacement(1.0, 0.5, Vec3(1, 0, 0)) == Vec3(0.5, 0, 0)
    assert m.displacement(2.0, 0.0, Vec3(1, 0, 0)) == ZERO
    assert m.displacement(2.0, 0.1, Vec3(0, -1, 0)) == Vec3(0.0, -0.2, 0.0)


# --- step ----------------------------------------------------------------------

def test_step_stationary_hand_keeps_object_still_from_rest():
    st = m.initial_state(Vec3(0, 0, 0), Vec3(0, 0, 2))
    out = m.step(st, Vec3(0, 0, 0), active=True, cfg=CFG)
    assert out.object_pos == Vec3(0, 0, 2)
    assert out.prev_m == 0.0


def test_step_lateral_move_scales_with_distance():
    st = m.initial_state(Vec3(-0.04, 0, 0), Vec3(0, 0, 2))
    out = m.step(st, Vec3(0, 0, 0), active=True, cfg=CFG)
    assert out.object_pos.x == pytest.approx(0.08, abs=1e-12)
    assert out.object_pos.y == pytest.approx(0.0, abs=1e-12)
    assert out.object_pos.z == pytest.approx(2.0, abs=1e-12)


def test_step_inactive_freezes_object_and_clears_memory():
    st = m.ManipulationState(Vec3(0, 0, 0), 0.05, Vec3(1, 0, 0), Vec3(0, 0, 2))
    out = m.step(st, Vec3(0.5, 0.5, 0.5), active=False, cfg=CFG)
    assert out.object_pos == st.object_pos
    assert out.prev_m == 0.0
    assert out.prev_dir == ZERO
    assert out.prev_hand == Vec3(0.5, 0.5, 0.5)


def test_inactivity_invariant_over_interval():
    rng = SplitMix64(77)
    st = m.initial_state(Vec3(0, 0, 0), Vec3(0.3, 0.2, 1.0))
    for _ in range(200):
        hand = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
        st = m.step(st, hand, active=False, cfg=CFG)
        assert st.object_pos == Vec3(0.3, 0.2, 1.0)


def test_displacement_magnitude_identity():
    # |step| = k * m_eff * distance whenever a direction is established
    rng = SplitMix64(31)
    st = m.initial_state(Vec3(0, 0, 0), Vec3(0.5, 0.1, 1.5))
    hand = Vec3(0, 0, 0)
    for _ in range(500):
        prev_obj = st.object_pos
        prev_hand = st.prev_hand
        hand = Vec3(
            hand.x + rng.uniform(-0.02, 0.02),
            hand.y + rng.uniform(-0.02, 0.02),
            hand.z + rng.uniform(-0.02, 0.02),
        )
        st = m.step(st, hand, active=True, cfg=CFG)
        if st.prev_dir != ZERO:
            moved = (st.object_pos - prev_obj).norm()
            expected = CFG.k * st.prev_m * (prev_obj - hand).norm()
            assert moved == pytest.approx(expected, abs=1e-12)


def test_scale_covariance_of_single_step():
    # doubling k doubles the step, same direction, for identical arguments
    st1 = m.initial_state(Vec3(-0.03, 0.01, 0), Vec3(0.2, 0, 1.2))
    st2 = m.initial_state(Vec3(-0.03, 0.01, 0), Vec3(0.2, 0, 1.2))
    cfg1 = EngineConfig(k=1.0)
    cfg2 = EngineConfig(k=2.0)
    out1 = m.step(st1, Vec3(0, 0, 0), True, cfg1)
    out2 = m.step(st2, Vec3(0, 0, 0), True, cfg2)
    d1 = out1.object_pos - Vec3(0.2, 0, 1.2)
    d2 = out2.object_pos - Vec3(0.2, 0, 1.2)
    assert d2.x == pytest.approx(2 * d1.x, abs=1e-15)
    assert d2.y == pytest.approx(2 * d1.y, abs=1e-15)
    assert d2.z == pytest.approx(2 * d1.z, abs=1e-15)


def test_oracle_equivalence_random_walk():
    rng = SplitMix64(123456)
    st = m.initial_state(Vec3(0, 0, 0), Vec3(0.4, 0.1, 1.1))
    o_hand, o_m, o_dir, o_obj = (0.0, 0.0, 0.0), 0.0, (0.0, 0.0, 0.0), (0.4, 0.1, 1.1)
    hand = Vec3(0, 0, 0)
    for i in range(1000):
        hand = Vec3(
            hand.x + rng.uniform(-0.03, 0.03),
            hand.y + rng.uniform(-0.03, 0.03),
            hand.z + rng.uniform(-0.03, 0.03),
        )
        st = m.step(st, hand, active=True, cfg=CFG)
        o_hand, o_m, o_dir, o_obj = oracle_step(
            o_hand, o_m, o_dir, o_obj, (hand.x, hand.y, hand.z),
            CFG.k, CFG.sim_th, CFG.m_th,
        )
        assert st.object_pos.x == pytest.approx(o_obj[0], abs=1e-9), f"tick {i}"
        assert st.object_pos.y == pytest.approx(o_obj[1], abs=1e-9), f"tick {i}"
        assert st.object_pos.z == pytest.approx(o_obj[2], abs=1e-9), f"tick {i}"
        assert st.prev_m == pytest.approx(o_m, abs=1e-12)
