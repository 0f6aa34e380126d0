import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dualmcl.control import FormationGoal, anchor_velocity_setpoint, formation_control

GOAL = FormationGoal(r_des=(2.0, 2.0), K_v=1.0, deadzone=0.2, v_limits=(2.0, 2.0))
err = st.tuples(st.floats(-20, 20), st.floats(-20, 20))


def command_for_error(e, goal=GOAL):
    return formation_control(goal.r_des - np.asarray(e), goal)


def test_zero_error():
    np.testing.assert_array_equal(formation_control(GOAL.r_des, GOAL), [0, 0])


def test_proportional_outside_deadzone():
    np.testing.assert_allclose(command_for_error((1.0, 0.5)), [1.0, 0.5])


def test_inside_deadzone():
    np.testing.assert_array_equal(command_for_error((0.1, -0.15)), [0, 0])


def test_anchor_setpoint_opposes_relative_rate():
    # r = p1 - p0 grows when the anchor moves backwards
    r_hat = np.array([1.0, 1.5])
    np.testing.assert_allclose(anchor_velocity_setpoint(r_hat, GOAL), -formation_control(r_hat, GOAL))


@pytest.mark.parametrize("kwargs", [dict(K_v=0.0), dict(deadzone=-0.1), dict(v_limits=(-1, 1))])
def test_invalid_goal(kwargs):
    with pytest.raises(ValueError):
        FormationGoal(r_des=(0, 0), **kwargs)


@given(err)
def test_output_within_limits(e):
    v = command_for_error(e)
    assert np.all(np.abs(v) <= GOAL.v_limits)


@given(err)
def test_odd_symmetry(e):
    # r_des - (r_des - e) is not exactly e, so stay clear of the band edge
    assume(np.all(np.abs(np.abs(e) - GOAL.deadzone) > 1e-9))
    np.testing.assert_allclose(command_for_error(np.negative(e)), -command_for_error(e), atol=1e-12)
