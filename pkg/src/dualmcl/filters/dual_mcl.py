"""Dual Monte-Carlo localization of a tag robot from three on-board UWB ranges.

Roles of the two models are swapped relative to a conventional particle
filter: particles are drawn around the position reconstructed from the
current ranges, and weighted by a kernel density of the previous posterior
pushed through the relative motion model.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .._validation import InvalidParameterError, check_count, check_diag_cov, check_positive, check_vector2
from ..geometry import AnchorLayout, construct_measurement
from .particles import (
    ParticleSet,
    auxiliary_positions,
    estimate_from_particles,
    find_density,
    gaussian_logpdf,
    importance_weights,
    low_variance_resample,
    normalize_log_weights,
    sample_proposal,
    sample_velocities,
)


@dataclass(frozen=True)
class DualMclConfig:
    """Tuning of the dual MCL filter.

    ``Q_obs`` and ``Q_1mot`` are diagonal covariances (given as a scalar,
    a diagonal, or a 2x2 matrix). ``kde_bandwidth`` is ``"scott"`` or a
    fixed bandwidth in meters.
    """

    m: int = 200
    Q_obs: np.ndarray = 1.0
    Q_1mot: np.ndarray = 0.5
    Ts: float = 0.1
    layout: AnchorLayout = field(default_factory=lambda: AnchorLayout(1.0))
    kde_bandwidth: object = "scott"

    def __post_init__(self):
        object.__setattr__(self, "m", check_count(self.m, "m"))
        object.__setattr__(self, "Q_obs", check_diag_cov(self.Q_obs, "Q_obs"))
        object.__setattr__(self, "Q_1mot", check_diag_cov(self.Q_1mot, "Q_1mot"))
        object.__setattr__(self, "Ts", check_positive(self.Ts, "Ts"))
        if not isinstance(self.layout, AnchorLayout):
            object.__setattr__(self, "layout", AnchorLayout(self.layout))
        if isinstance(self.kde_bandwidth, str):
            if self.kde_bandwidth != "scott":
                raise InvalidParameterError(f"unknown bandwidth rule {self.kde_bandwidth!r}")
        else:
            check_positive(float(self.kde_bandwidth), "kde_bandwidth")


@dataclass(frozen=True)
class FilterEstimate:
    r_hat: np.ndarray
    v1_hat: np.ndarray
    step: int
    r_meas: np.ndarray = None


@dataclass(frozen=True)
class FilterState:
    """Posterior particle set and the running tag-velocity estimate."""

    particles: ParticleSet
    v1_hat: np.ndarray = field(default_factory=lambda: np.zeros(2))
    step: int = 0


def init_dual_mcl(init_region, m, rng):
    """Initial belief: uniform over a box ``((x_lo, x_hi), (y_lo, y_hi))`` or a point mass.

    A 2-vector ``init_region`` is treated as a point.
    """
    m = check_count(m, "m")
    region = np.asarray(init_region, dtype=float)
    if region.shape == (2,):
        x = np.tile(check_vector2(region, "init point"), (m, 1))
    elif region.shape == (2, 2):
        lo, hi = region[:, 0], region[:, 1]
        if not np.all(np.isfinite(region)) or np.any(hi <= lo):
            raise InvalidParameterError(f"initialization box is empty: {region.tolist()}")
        x = lo + rng.uniform(size=(m, 2)) * (hi - lo)
    else:
        raise InvalidParameterError(
            f"init_region must be a point (2,) or a box (2, 2), got shape {region.shape}"
        )
    return FilterState(ParticleSet(x), np.zeros(2), 0)


def dual_mcl_step(state, ranges, v0_k, config, rng):
    """One filter cycle: reconstruct, sample around the reconstruction, weight, resample.

    Parameters
    ----------
    state : FilterState
        Posterior from the previous step.
    ranges : RangeTriple or array-like of 3 floats
    v0_k : array-like of 2 floats
        Anchor-robot velocity over the last interval (global frame).
    config : DualMclConfig
    rng : numpy.random.Generator

    Returns
    -------
    (FilterState, FilterEstimate)
    """
    k = state.step + 1
    v0_k = check_vector2(v0_k, "v0_k")
    r_meas = construct_measurement(ranges, config.layout).r_meas

    proposal = sample_proposal(r_meas, config.Q_obs, config.m, rng)
    density = find_density(
        state.particles, v0_k, state.v1_hat, config.Q_1mot, config.Ts, config.kde_bandwidth, rng
    )
    velocities = sample_velocities(state.v1_hat, config.Q_1mot, config.m, rng)
    r_prev = estimate_from_particles(state.particles)
    aux = auxiliary_positions(r_prev, velocities - v0_k, config.Ts)

    # The weight factors into a position term and a velocity term because each
    # particle and its velocity hypothesis are drawn independently. The
    # velocity mean uses its own factor only, and the unweighted sample mean
    # is swapped for its expectation v1_hat (a control variate): same target,
    # without the common-mode sampling noise that would random-walk v1_hat.
    proposal.w = importance_weights(proposal, density, aux, r_meas, config.Q_obs)
    velocity_w = normalize_log_weights(gaussian_logpdf(aux, r_meas, config.Q_obs))
    v1_hat = state.v1_hat + velocity_w @ velocities - velocities.mean(axis=0)

    posterior = low_variance_resample(replace(proposal, step=k), rng)
    r_hat = estimate_from_particles(posterior)
    new_state = FilterState(posterior, v1_hat, k)
    return new_state, FilterEstimate(r_hat, v1_hat, k, r_meas)
