"""Conventional particle filter baseline: motion-model proposal, range-likelihood weights."""

from dataclasses import dataclass, field, replace

import numpy as np

from .._validation import check_count, check_diag_cov, check_positive, check_vector2
from ..geometry import AnchorLayout, construct_measurement, ranges_to_anchors
from .dual_mcl import FilterEstimate, FilterState
from .particles import ParticleSet, estimate_from_particles, low_variance_resample, normalize_log_weights


@dataclass(frozen=True)
class StandardPfConfig:
    m: int = 200
    Q_1mot: np.ndarray = 0.5
    Ts: float = 0.1
    layout: AnchorLayout = field(default_factory=lambda: AnchorLayout(1.0))
    # per-anchor range standard deviation used by the likelihood
    range_sigma: np.ndarray = 0.05

    def __post_init__(self):
        object.__setattr__(self, "m", check_count(self.m, "m"))
        object.__setattr__(self, "Q_1mot", check_diag_cov(self.Q_1mot, "Q_1mot"))
        object.__setattr__(self, "Ts", check_positive(self.Ts, "Ts"))
        if not isinstance(self.layout, AnchorLayout):
            object.__setattr__(self, "layout", AnchorLayout(self.layout))
        sigma = np.broadcast_to(np.asarray(self.range_sigma, dtype=float), (3,)).copy()
        if np.any(sigma <= 0) or not np.all(np.isfinite(sigma)):
            raise ValueError(f"range_sigma must be positive, got {self.range_sigma!r}")
        object.__setattr__(self, "range_sigma", sigma)


def range_log_likelihood(points, ranges, layout, range_sigma):
    """Sum over anchors of log N(d_j; |x - q_j|, sigma_j^2) for each row of ``points``."""
    d = np.asarray(ranges.as_array() if hasattr(ranges, "as_array") else ranges, dtype=float)
    predicted = ranges_to_anchors(points, layout)
    z = (d - predicted) / range_sigma
    return -0.5 * np.sum(z**2, axis=1) - np.sum(np.log(np.sqrt(2 * np.pi) * range_sigma))


def standard_pf_step(state, ranges, v0_k, config, rng):
    """Propagate through the relative motion model, weight by the three ranges, resample."""
    k = state.step + 1
    v0_k = check_vector2(v0_k, "v0_k")
    m = len(state.particles)
    velocities = state.v1_hat + rng.standard_normal((m, 2)) * np.sqrt(config.Q_1mot)
    predicted = state.particles.x + (velocities - v0_k) * config.Ts

    w = normalize_log_weights(range_log_likelihood(predicted, ranges, config.layout, config.range_sigma))
    v1_hat = w @ velocities
    posterior = low_variance_resample(ParticleSet(predicted, w, k), rng)
    r_hat = estimate_from_particles(posterior)
    r_meas = construct_measurement(ranges, config.layout).r_meas
    return FilterState(posterior, v1_hat, k), FilterEstimate(r_hat, v1_hat, k, r_meas)
