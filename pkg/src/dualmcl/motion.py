"""Planar double-integrator kinematics with saturation and velocity tracking."""

from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import check_diag_cov, check_positive, check_vector2


@dataclass(frozen=True)
class RobotLimits:
    v_min: np.ndarray = field(default_factory=lambda: np.array([-2.0, -2.0]))
    v_max: np.ndarray = field(default_factory=lambda: np.array([2.0, 2.0]))
    a_min: np.ndarray = field(default_factory=lambda: np.array([-5.0, -5.0]))
    a_max: np.ndarray = field(default_factory=lambda: np.array([5.0, 5.0]))

    def __post_init__(self):
        for name in ("v_min", "v_max", "a_min", "a_max"):
            object.__setattr__(self, name, check_vector2(getattr(self, name), name))
        if np.any(self.v_min > self.v_max) or np.any(self.a_min > self.a_max):
            raise ValueError("lower limits must not exceed upper limits")

    @classmethod
    def symmetric(cls, v_max, a_max):
        v = np.broadcast_to(np.asarray(v_max, dtype=float), (2,))
        a = np.broadcast_to(np.asarray(a_max, dtype=float), (2,))
        return cls(-v, v.copy(), -a, a.copy())


@dataclass(frozen=True)
class RobotState:
    p: np.ndarray
    v: np.ndarray
    limits: RobotLimits = field(default_factory=RobotLimits)

    def __post_init__(self):
        object.__setattr__(self, "p", check_vector2(self.p, "p"))
        v = check_vector2(self.v, "v")
        object.__setattr__(self, "v", np.clip(v, self.limits.v_min, self.limits.v_max))


@dataclass(frozen=True)
class ProcessNoise:
    """Velocity random-walk covariance (diagonal, (m/s)^2)."""

    q_mot: np.ndarray = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q_mot", check_diag_cov(self.q_mot, "q_mot"))

    @property
    def cov(self):
        return np.diag(self.q_mot)


def step_robot(state, accel_cmd, Ts, noise=None, rng=None):
    """Advance one robot by ``Ts`` seconds under a clamped acceleration command.

    Position integrates exactly for constant acceleration; process noise
    enters the velocity only, which is then saturated.
    """
    Ts = check_positive(Ts, "Ts")
    lim = state.limits
    a = np.clip(check_vector2(accel_cmd, "accel_cmd"), lim.a_min, lim.a_max)
    p = state.p + Ts * state.v + 0.5 * Ts**2 * a
    v = state.v + Ts * a
    if noise is not None and np.any(noise.q_mot > 0):
        if rng is None:
            raise ValueError("a random generator is required when process noise is nonzero")
        v = v + rng.standard_normal(2) * np.sqrt(noise.q_mot)
    return replace(state, p=p, v=np.clip(v, lim.v_min, lim.v_max))


def velocity_tracking_accel(v, v_des, Ts, a_limits):
    """Deadbeat velocity tracking: the acceleration reaching ``v_des`` in one step, clamped.

    ``a_limits`` is a RobotLimits or an ``(a_min, a_max)`` pair.
    """
    Ts = check_positive(Ts, "Ts")
    if isinstance(a_limits, RobotLimits):
        a_min, a_max = a_limits.a_min, a_limits.a_max
    else:
        a_min, a_max = (np.asarray(x, dtype=float) for x in a_limits)
    a = (np.asarray(v_des, dtype=float) - np.asarray(v, dtype=float)) / Ts
    return np.clip(a, a_min, a_max)


def relative_dynamics(r, v0, v1, a0, a1, Ts):
    """Propagate the tag position relative to the anchor robot by one step."""
    Ts = check_positive(Ts, "Ts")
    r, v0, v1, a0, a1 = (np.asarray(x, dtype=float) for x in (r, v0, v1, a0, a1))
    return r + (v1 - v0) * Ts + 0.5 * (a1 - a0) * Ts**2
