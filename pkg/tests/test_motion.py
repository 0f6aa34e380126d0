import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualmcl.motion import (
    ProcessNoise,
    RobotLimits,
    RobotState,
    relative_dynamics,
    step_robot,
    velocity_tracking_accel,
)

vec = st.tuples(st.floats(-50, 50), st.floats(-50, 50))


def test_step_constant_velocity():
    out = step_robot(RobotState((0, 0), (1, 0)), (0, 0), 0.1)
    np.testing.assert_allclose(out.p, [0.1, 0])
    np.testing.assert_allclose(out.v, [1, 0])


def test_step_saturates_velocity():
    out = step_robot(RobotState((0, 0), (1.9, 0), RobotLimits.symmetric(2, 5)), (2, 0), 0.1)
    np.testing.assert_allclose(out.v, [2, 0])


def test_acceleration_clamped_before_integration():
    out = step_robot(RobotState((0, 0), (0, 0), RobotLimits.symmetric(2, 5)), (100, 0), 0.1)
    np.testing.assert_allclose(out.p, [0.5 * 0.01 * 5, 0])
    np.testing.assert_allclose(out.v, [0.5, 0])


def test_process_noise_variance():
    rng = np.random.default_rng(5)
    limits = RobotLimits.symmetric(1e6, 5)
    state = RobotState((0, 0), (0, 0), limits)
    noise = ProcessNoise(0.01)
    increments = []
    for _ in range(10_000):
        nxt = step_robot(state, (0, 0), 0.1, noise, rng)
        increments.append(nxt.v - state.v)
        state = nxt
    var = np.var(increments, axis=0, ddof=1)
    np.testing.assert_allclose(var, 0.01, rtol=0.1)


def test_noise_requires_rng():
    with pytest.raises(ValueError):
        step_robot(RobotState((0, 0), (0, 0)), (0, 0), 0.1, ProcessNoise(0.1), None)


@pytest.mark.parametrize(
    "v, v_des, expected",
    [((0.3, 0.3), (0.3, 0.3), (0, 0)), ((0, 0), (1, 0), (5, 0)), ((0, 0), (0.2, 0), (2, 0))],
)
def test_velocity_tracking(v, v_des, expected):
    np.testing.assert_allclose(velocity_tracking_accel(v, v_des, 0.1, RobotLimits.symmetric(2, 5)), expected)


def test_velocity_tracking_accepts_limit_pair():
    out = velocity_tracking_accel((0, 0), (1, -1), 0.1, ((-5, -5), (5, 5)))
    np.testing.assert_allclose(out, [5, -5])


@pytest.mark.parametrize(
    "r, v0, v1, a0, a1, expected",
    [
        ((1, 2), (0.3, 0.3), (0.3, 0.3), (1, 1), (1, 1), (1, 2)),
        ((1, 0), (0, 0), (1, 0), (0, 0), (0, 0), (1.1, 0)),
        ((0, 0), (0, 0), (0, 0), (0, 0), (2, 0), (0.01, 0)),
    ],
)
def test_relative_dynamics_examples(r, v0, v1, a0, a1, expected):
    np.testing.assert_allclose(relative_dynamics(r, v0, v1, a0, a1, 0.1), expected, atol=1e-15)


@given(vec, vec, vec, vec)
def test_velocity_saturation_always_holds(v, a, p, v_rand):
    limits = RobotLimits.symmetric(2, 5)
    out = step_robot(RobotState(p, v, limits), a, 0.1, ProcessNoise(0.5), np.random.default_rng(0))
    assert np.all(out.v <= limits.v_max) and np.all(out.v >= limits.v_min)


@given(vec, vec, vec, vec)
def test_composition_matches_relative_dynamics(p0, p1, v0, v1):
    limits = RobotLimits.symmetric(100, 5)
    v0, v1 = np.clip(v0, -100, 100), np.clip(v1, -100, 100)
    s0, s1 = RobotState(p0, v0, limits), RobotState(p1, v1, limits)
    n0, n1 = step_robot(s0, (0, 0), 0.1), step_robot(s1, (0, 0), 0.1)
    expected = relative_dynamics(s1.p - s0.p, s0.v, s1.v, (0, 0), (0, 0), 0.1)
    np.testing.assert_allclose(n1.p - n0.p, expected, atol=1e-12)
