"""Deterministic two-robot scenario engine.

Each step follows the order sense -> estimate -> command -> integrate: the
ranges are taken at the state at the start of the step, the estimator runs,
velocity setpoints are issued from the profiles or the formation controller,
and both robots are integrated over one period.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import check_count, check_positive, check_vector2
from .control import FormationGoal, anchor_velocity_setpoint
from .estimators import DualMCLLocalizer, EKFLocalizer, ParticleFilterLocalizer
from .geometry import AnchorLayout, true_ranges
from .motion import ProcessNoise, RobotLimits, RobotState, step_robot, velocity_tracking_accel
from .sensing import RangeNoiseModel, corrupt_ranges


class SimulationError(RuntimeError):
    """Raised when a run produces a non-finite state."""


@dataclass(frozen=True)
class VelocityProfile:
    """Velocity setpoint as a function of time.

    kinds
        ``constant``: ``v``.
        ``square_wave``: ``base`` plus ``+v_amp`` on ``axis``, switching sign
        every ``period_s`` seconds (positive on ``[0, period_s)``); the full
        cycle therefore lasts ``2 * period_s``.
        ``piecewise``: value of the latest ``(t_start, v)`` segment with
        ``t_start <= t``; zero before the first segment.
    """

    kind: str = "constant"
    v: np.ndarray = (0.0, 0.0)
    v_amp: float = 0.0
    period_s: float = 1.0
    axis: int = 0
    base: np.ndarray = (0.0, 0.0)
    segments: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "square_wave", "piecewise"):
            raise ValueError(f"unknown velocity profile kind {self.kind!r}")
        object.__setattr__(self, "v", check_vector2(self.v, "v"))
        object.__setattr__(self, "base", check_vector2(self.base, "base"))
        if self.kind == "square_wave":
            check_positive(self.period_s, "period_s")
        axis = {"x": 0, "y": 1}.get(self.axis, self.axis)
        if axis not in (0, 1):
            raise ValueError(f"axis must be 0/'x' or 1/'y', got {self.axis!r}")
        object.__setattr__(self, "axis", axis)
        segs = tuple(sorted((float(t0), tuple(check_vector2(v, "segment velocity"))) for t0, v in self.segments))
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, v):
        return cls("constant", v=v)

    @classmethod
    def square_wave(cls, v_amp, period_s, axis, base=(0.0, 0.0)):
        return cls("square_wave", v_amp=float(v_amp), period_s=float(period_s), axis=axis, base=base)

    @classmethod
    def piecewise(cls, segments):
        return cls("piecewise", segments=tuple(segments))


def velocity_profile_at(profile, t):
    """Velocity setpoint (2-vector) of ``profile`` at time ``t`` seconds."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if profile.kind == "constant":
        return profile.v.copy()
    if profile.kind == "square_wave":
        hold = int(np.floor(t / profile.period_s))
        out = profile.base.copy()
        out[profile.axis] += profile.v_amp if hold % 2 == 0 else -profile.v_amp
        return out
    out = np.zeros(2)
    for t_start, v in profile.segments:
        if t_start <= t:
            out = np.array(v)
        else:
            break
    return out


@dataclass(frozen=True)
class RobotConfig:
    p0: np.ndarray = (0.0, 0.0)
    v0: np.ndarray = (0.0, 0.0)
    limits: RobotLimits = field(default_factory=RobotLimits)
    q_mot: np.ndarray = 0.0
    profile: VelocityProfile = None

    def __post_init__(self):
        object.__setattr__(self, "p0", check_vector2(self.p0, "p0"))
        object.__setattr__(self, "v0", check_vector2(self.v0, "v0"))

    def initial_state(self):
        return RobotState(self.p0, self.v0, self.limits)


@dataclass(frozen=True)
class FilterConfig:
    """Estimator choice and its tuning.

    ``range_sigma`` of None means the estimator assumes the scenario's range
    noise level (i.e. a calibrated sensor). EKF fields are ignored by the
    particle filters and vice versa.
    """

    estimator: str = "dual_mcl"
    m: int = 200
    sigma_obs: np.ndarray = (1.0, 1.0)
    q_mot: np.ndarray = (0.5, 0.5)
    bandwidth: object = "scott"
    range_sigma: object = None
    ekf_init_position_var: float = 4.0
    ekf_init_velocity_var: float = 1.0
    ekf_q_position: float = 0.01
    ekf_q_velocity: float = 0.5

    def __post_init__(self):
        if self.estimator not in ("dual_mcl", "standard_pf", "ekf"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        check_count(self.m, "m")
        sigma_obs = np.broadcast_to(np.asarray(self.sigma_obs, dtype=float), (2,)).copy()
        q_mot = np.broadcast_to(np.asarray(self.q_mot, dtype=float), (2,)).copy()
        if np.any(sigma_obs < 0) or np.any(q_mot < 0):
            raise ValueError("sigma_obs and q_mot must be nonnegative")
        object.__setattr__(self, "sigma_obs", sigma_obs)
        object.__setattr__(self, "q_mot", q_mot)


@dataclass(frozen=True)
class ScenarioConfig:
    f: float = 10.0
    n_steps: int = 300
    a: float = 0.44
    noise: RangeNoiseModel = field(default_factory=lambda: RangeNoiseModel(0.0, 0.05))
    anchor: RobotConfig = field(default_factory=RobotConfig)
    tag: RobotConfig = field(default_factory=RobotConfig)
    controller: FormationGoal = None
    filter: FilterConfig = field(default_factory=FilterConfig)
    init_region: np.ndarray = ((-4.2, -0.2), (-0.2, 3.8))
    seed: int = 0

    def __post_init__(self):
        check_positive(self.f, "f")
        check_count(self.n_steps, "n_steps")
        check_positive(self.a, "a")
        if self.anchor.profile is None and self.controller is None:
            raise ValueError("the anchor robot needs either a velocity profile or a controller")
        if self.tag.profile is None:
            raise ValueError("the tag robot needs a velocity profile")
        region = np.asarray(self.init_region, dtype=float)
        if region.shape not in ((2,), (2, 2)):
            raise ValueError(f"init_region must be a point or a 2x2 box, got shape {region.shape}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed!r}")

    @property
    def Ts(self):
        return 1.0 / self.f


@dataclass
class ScenarioTrace:
    """Per-step record of one run; every array has ``n_steps`` rows."""

    t: np.ndarray
    r_true: np.ndarray
    ranges: np.ndarray
    r_meas: np.ndarray
    r_hat: np.ndarray
    v1_hat: np.ndarray
    v0_cmd: np.ndarray
    p0: np.ndarray
    v0: np.ndarray
    p1: np.ndarray
    v1: np.ndarray

    def __len__(self):
        return self.t.shape[0]

    @property
    def k(self):
        return np.arange(len(self))

    @property
    def err(self):
        """Relative-position error ``|r_hat - r|`` per step."""
        return np.linalg.norm(self.r_hat - self.r_true, axis=1)

    @property
    def velocity_err(self):
        return np.linalg.norm(self.v1_hat - self.v1, axis=1)


def make_localizer(config, random_state):
    """Instantiate the estimator named in ``config.filter`` for this scenario."""
    fc = config.filter
    range_sigma = config.noise.sigma_dist if fc.range_sigma is None else fc.range_sigma
    # guard against a zero-noise scenario making the range likelihood singular
    range_sigma = np.maximum(np.broadcast_to(np.asarray(range_sigma, dtype=float), (3,)), 1e-3)
    common = dict(Ts=config.Ts, anchor_leg=config.a, random_state=random_state)
    init_region = np.asarray(config.init_region, dtype=float)
    if fc.estimator == "dual_mcl":
        return DualMCLLocalizer(
            n_particles=fc.m, sigma_obs=fc.sigma_obs, q_mot=fc.q_mot, bandwidth=fc.bandwidth,
            init_region=init_region, **common,
        )
    if fc.estimator == "standard_pf":
        return ParticleFilterLocalizer(
            n_particles=fc.m, q_mot=fc.q_mot, range_sigma=range_sigma, init_region=init_region, **common
        )
    return EKFLocalizer(
        init_region=init_region,
        init_position_var=fc.ekf_init_position_var,
        init_velocity_var=fc.ekf_init_velocity_var,
        q_position=fc.ekf_q_position,
        q_velocity=fc.ekf_q_velocity,
        range_sigma=range_sigma,
        **common,
    )


def run_scenario(config, anchor_command=None):
    """Simulate ``config`` and return its :class:`ScenarioTrace`.

    Parameters
    ----------
    config : ScenarioConfig
    anchor_command : callable ``(k, t, r_hat) -> v0_des``, optional
        Overrides the anchor's velocity source (profile or controller).

    The run is a pure function of ``config``: range noise, robot process
    noise and the estimator each draw from their own stream spawned from
    ``config.seed``, so switching estimators leaves the true trajectory and
    the measurements unchanged.
    """
    Ts = config.Ts
    layout = AnchorLayout(config.a)
    noise_seq, motion_seq, filter_seq = np.random.SeedSequence(config.seed).spawn(3)
    noise_rng = np.random.default_rng(noise_seq)
    motion_rng = np.random.default_rng(motion_seq)
    localizer = make_localizer(config, np.random.default_rng(filter_seq))
    localizer.reset()

    anchor = config.anchor.initial_state()
    tag = config.tag.initial_state()
    anchor_noise = ProcessNoise(config.anchor.q_mot)
    tag_noise = ProcessNoise(config.tag.q_mot)

    n = config.n_steps
    rec = {name: np.empty((n, 2)) for name in ("r_true", "r_meas", "r_hat", "v1_hat", "v0_cmd", "p0", "v0", "p1", "v1")}
    rec["ranges"] = np.empty((n, 3))
    t = np.arange(n) * Ts

    v0_last = np.zeros(2)
    for k in range(n):
        r = tag.p - anchor.p
        d = corrupt_ranges(true_ranges(r, layout).as_array(), config.noise, noise_rng)
        est = localizer.update(d, v0_last)

        if anchor_command is not None:
            v0_des = np.asarray(anchor_command(k, t[k], est.r_hat), dtype=float)
        elif config.controller is not None:
            v0_des = anchor_velocity_setpoint(est.r_hat, config.controller)
        else:
            v0_des = velocity_profile_at(config.anchor.profile, t[k])
        v1_des = velocity_profile_at(config.tag.profile, t[k])
        if not np.all(np.isfinite(v0_des)):
            raise SimulationError(f"non-finite anchor command at step {k}: {v0_des}")

        for name, value in (
            ("r_true", r), ("r_meas", est.r_meas), ("r_hat", est.r_hat), ("v1_hat", est.v1_hat),
            ("v0_cmd", v0_des), ("p0", anchor.p), ("v0", anchor.v), ("p1", tag.p), ("v1", tag.v),
        ):
            rec[name][k] = value
        rec["ranges"][k] = d

        a0 = velocity_tracking_accel(anchor.v, v0_des, Ts, anchor.limits)
        a1 = velocity_tracking_accel(tag.v, v1_des, Ts, tag.limits)
        next_anchor = step_robot(anchor, a0, Ts, anchor_noise, motion_rng)
        tag = step_robot(tag, a1, Ts, tag_noise, motion_rng)
        v0_last = (next_anchor.p - anchor.p) / Ts
        anchor = next_anchor

        if not all(np.all(np.isfinite(x)) for x in (anchor.p, anchor.v, tag.p, tag.v, est.r_hat, est.v1_hat)):
            raise SimulationError(f"non-finite state at step {k}: r_hat={est.r_hat}, v1_hat={est.v1_hat}")

    return ScenarioTrace(t=t, **rec)


# -- presets -----------------------------------------------------------------

CASE1_INIT_BOX = ((-4.2, -0.2), (-0.2, 3.8))


def case1_config(m=200, sigma_obs=1.0, q_mot=0.5, sigma_dist=0.05, n_steps=300, seed=0, estimator="dual_mcl"):
    """Externally actuated robots: anchor at [0, 0.2] m/s, tag at [0, 0.3] m/s, 10 Hz."""
    limits = RobotLimits.symmetric(2.0, 5.0)
    return ScenarioConfig(
        f=10.0,
        n_steps=n_steps,
        a=0.44,
        noise=RangeNoiseModel(0.0, sigma_dist),
        anchor=RobotConfig((0.0, 0.0), (0.0, 0.0), limits, 0.0, VelocityProfile.constant((0.0, 0.2))),
        tag=RobotConfig((-2.0, 2.0), (0.0, 0.0), limits, 0.0, VelocityProfile.constant((0.0, 0.3))),
        filter=FilterConfig(estimator=estimator, m=m, sigma_obs=sigma_obs, q_mot=q_mot),
        init_region=CASE1_INIT_BOX,
        seed=seed,
    )


def agile_config(estimator="dual_mcl", m=200, sigma_obs=1.0, q_mot=0.5, n_steps=300, seed=0, period_s=3.0):
    """Case 1 with the tag's x velocity switching between +4 and -4 m/s every ``period_s`` seconds."""
    base = case1_config(m=m, sigma_obs=sigma_obs, q_mot=q_mot, n_steps=n_steps, seed=seed, estimator=estimator)
    tag_limits = RobotLimits.symmetric(5.0, 20.0)
    tag = replace(
        base.tag,
        limits=tag_limits,
        profile=VelocityProfile.square_wave(4.0, period_s, "x", base=(0.0, 0.3)),
    )
    return replace(base, tag=tag)


def static_config(m=200, sigma_obs=1.0, r=(-2.0, 2.0), n_steps=30, seed=0, sigma_dist=0.0, a=1.0, init_region=CASE1_INIT_BOX):
    """Both robots hovering with zero range noise."""
    still = VelocityProfile.constant((0.0, 0.0))
    return ScenarioConfig(
        f=10.0,
        n_steps=n_steps,
        a=a,
        noise=RangeNoiseModel(0.0, sigma_dist),
        anchor=RobotConfig((0.0, 0.0), profile=still),
        tag=RobotConfig(r, profile=still),
        filter=FilterConfig(m=m, sigma_obs=sigma_obs, q_mot=0.5),
        init_region=init_region,
        seed=seed,
    )


def formation_config(tag_profile=None, m=400, sigma_obs=1.0, q_mot=0.5, sigma_dist=0.05, n_steps=120, seed=0):
    """Closed loop at 3.3 Hz: the anchor holds r = [2, 2] with K_v = 1 and a 0.2 m dead-zone.

    ``tag_profile`` defaults to a straight line at [0, 0.3] m/s; the string
    ``"periodic"`` selects a +-1.2 m/s y velocity switching every 6 s.
    """
    if tag_profile is None:
        tag_profile = VelocityProfile.constant((0.0, 0.3))
    elif isinstance(tag_profile, str):
        if tag_profile != "periodic":
            raise ValueError(f"unknown tag profile {tag_profile!r}")
        tag_profile = VelocityProfile.square_wave(1.2, 6.0, "y")
    limits = RobotLimits.symmetric(2.0, 5.0)
    goal = FormationGoal(r_des=(2.0, 2.0), K_v=1.0, deadzone=0.2, v_limits=(2.0, 2.0))
    return ScenarioConfig(
        f=3.3,
        n_steps=n_steps,
        a=0.44,
        noise=RangeNoiseModel(0.0, sigma_dist),
        anchor=RobotConfig((0.0, 0.0), (0.0, 0.0), limits),
        tag=RobotConfig((2.0, 2.0), (0.0, 0.0), limits, 0.0, tag_profile),
        controller=goal,
        filter=FilterConfig(m=m, sigma_obs=sigma_obs, q_mot=q_mot),
        init_region=((0.0, 4.0), (0.0, 4.0)),
        seed=seed,
    )
