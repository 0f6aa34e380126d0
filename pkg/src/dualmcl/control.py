"""Proportional formation controller with a per-axis dead-zone."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_positive, check_vector2


@dataclass(frozen=True)
class FormationGoal:
    r_des: np.ndarray
    K_v: float = 1.0
    deadzone: float = 0.2
    v_limits: np.ndarray = (2.0, 2.0)

    def __post_init__(self):
        object.__setattr__(self, "r_des", check_vector2(self.r_des, "r_des"))
        object.__setattr__(self, "K_v", check_positive(self.K_v, "K_v"))
        if not np.isfinite(self.deadzone) or self.deadzone < 0:
            raise ValueError(f"deadzone must be >= 0, got {self.deadzone!r}")
        v_lim = check_vector2(self.v_limits, "v_limits")
        if np.any(v_lim < 0):
            raise ValueError("v_limits must be nonnegative")
        object.__setattr__(self, "v_limits", v_lim)


def formation_control(r_hat, goal):
    """Proportional velocity command ``K_v * (r_des - r_hat)`` with dead-zone and clamping.

    The command is the rate at which the relative position should change.
    Since ``r = p1 - p0``, the anchor robot realizes it by moving with the
    opposite velocity; see :func:`anchor_velocity_setpoint`. Axes whose error
    magnitude is within the dead-zone receive a zero command.
    """
    e = goal.r_des - np.asarray(r_hat, dtype=float)
    v = np.clip(goal.K_v * e, -goal.v_limits, goal.v_limits)
    v[np.abs(e) <= goal.deadzone] = 0.0
    return v


def anchor_velocity_setpoint(r_hat, goal):
    """Velocity setpoint for the anchor robot (the tag's own velocity is unknown to it)."""
    return -formation_control(r_hat, goal)
