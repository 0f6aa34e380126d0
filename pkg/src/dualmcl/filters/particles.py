"""Particle-set primitives: proposal sampling, kernel density, weighting, resampling."""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .._validation import check_count, check_diag_cov, check_positive, check_vector2

# Keeps the kernel density proper when every propagated particle coincides.
MIN_BANDWIDTH = 1e-6


@dataclass
class ParticleSet:
    """``m`` planar hypotheses ``x`` (m, 2) with normalized weights ``w`` (m,)."""

    x: np.ndarray
    w: np.ndarray = None
    step: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1, 2)
        m = self.x.shape[0]
        if m < 1:
            raise ValueError("a particle set needs at least one particle")
        if not np.all(np.isfinite(self.x)):
            raise ValueError("particle hypotheses must be finite")
        if self.w is None:
            self.w = np.full(m, 1.0 / m)
        else:
            self.w = np.asarray(self.w, dtype=float).reshape(m)

    def __len__(self):
        return self.x.shape[0]


def sample_proposal(r_meas, Q_obs, m, rng):
    """Draw ``m`` particles from N(r_meas, Q_obs) with uniform weights."""
    r_meas = check_vector2(r_meas, "r_meas")
    std = np.sqrt(check_diag_cov(Q_obs, "Q_obs"))
    m = check_count(m, "m")
    return ParticleSet(r_meas + rng.standard_normal((m, 2)) * std)


def sample_velocities(v1_hat_prev, Q_1mot, m, rng):
    """Draw ``m`` tag-velocity hypotheses from N(v1_hat_prev, Q_1mot); returns (m, 2)."""
    mean = check_vector2(v1_hat_prev, "v1_hat_prev")
    std = np.sqrt(check_diag_cov(Q_1mot, "Q_1mot"))
    m = check_count(m, "m")
    return mean + rng.standard_normal((m, 2)) * std


def auxiliary_positions(r_avg, velocities, Ts):
    """Positions reached from ``r_avg`` after ``Ts`` seconds at each sampled velocity."""
    Ts = check_positive(Ts, "Ts")
    return check_vector2(r_avg, "r_avg") + np.asarray(velocities, dtype=float).reshape(-1, 2) * Ts


class KernelDensity2D:
    """Gaussian product-kernel density over a planar point cloud.

    Parameters
    ----------
    points : ndarray of shape (n, 2)
    bandwidth : "scott" or float or array-like of 2 floats
        ``"scott"`` uses the per-axis rule ``h = std * n ** (-1 / 6)``.
    """

    def __init__(self, points, bandwidth="scott"):
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        n = self.points.shape[0]
        if n < 1:
            raise ValueError("kernel density needs at least one point")
        if isinstance(bandwidth, str):
            if bandwidth != "scott":
                raise ValueError(f"unknown bandwidth rule {bandwidth!r}")
            std = self.points.std(axis=0, ddof=1) if n > 1 else np.zeros(2)
            h = std * n ** (-1.0 / 6.0)
        else:
            h = np.broadcast_to(np.asarray(bandwidth, dtype=float), (2,)).copy()
            if np.any(h <= 0) or not np.all(np.isfinite(h)):
                raise ValueError(f"fixed bandwidth must be positive, got {bandwidth!r}")
        self.bandwidth = np.maximum(h, MIN_BANDWIDTH)
        self._log_norm = np.log(n) + np.log(2 * np.pi) + np.log(self.bandwidth).sum()

    def logpdf(self, query):
        q = np.asarray(query, dtype=float)
        single = q.ndim == 1
        q = q.reshape(-1, 2) / self.bandwidth
        p = self.points / self.bandwidth
        log_k = -0.5 * ((q[:, 0, None] - p[None, :, 0]) ** 2 + (q[:, 1, None] - p[None, :, 1]) ** 2)
        peak = log_k.max(axis=1)
        out = peak + np.log(np.exp(log_k - peak[:, None]).sum(axis=1)) - self._log_norm
        return out[0] if single else out

    def __call__(self, query):
        return np.exp(self.logpdf(query))


def find_density(prev, v0_k, v1_hat_prev, Q_1mot, Ts, bandwidth_rule, rng):
    """Motion-predicted belief density built from the previous posterior.

    Every previous particle moves by ``(v - v0_k) * Ts`` with its own tag
    velocity ``v ~ N(v1_hat_prev, Q_1mot)``; a kernel density is fitted to
    the moved particles.
    """
    if prev is None or len(prev) == 0:
        raise ValueError("cannot build a density from an empty particle set")
    Ts = check_positive(Ts, "Ts")
    v0_k = check_vector2(v0_k, "v0_k")
    v = sample_velocities(v1_hat_prev, Q_1mot, len(prev), rng)
    moved = prev.x + (v - v0_k) * Ts
    return KernelDensity2D(moved, bandwidth_rule)


def gaussian_logpdf(points, mean, var):
    """Log density of N(mean, diag(var)) at each row of ``points``.

    Zero-variance axes act as a point mass: 0 at the mean, -inf elsewhere.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    diff = points - np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    out = np.zeros(points.shape[0])
    for axis in range(2):
        if var[axis] > 0:
            out += -0.5 * diff[:, axis] ** 2 / var[axis] - 0.5 * np.log(2 * np.pi * var[axis])
        else:
            out[diff[:, axis] != 0] = -np.inf
    return out


def normalize_log_weights(log_w):
    """Normalize log weights; all -inf or non-finite input falls back to uniform."""
    log_w = np.asarray(log_w, dtype=float)
    log_w = np.where(np.isnan(log_w), -np.inf, log_w)
    if np.any(log_w == np.inf) or not np.any(np.isfinite(log_w)):
        return np.full(log_w.shape[0], 1.0 / log_w.shape[0])
    w = np.exp(log_w - logsumexp(log_w))
    return w / w.sum()


def importance_weights(particles, density, aux, r_meas, Q_obs):
    """Dual weights: predicted-belief density at each particle times the
    measurement likelihood of the matching auxiliary position.

    Returns normalized weights of shape (m,).
    """
    x = particles.x if isinstance(particles, ParticleSet) else np.asarray(particles, dtype=float)
    aux = np.asarray(aux, dtype=float).reshape(-1, 2)
    if x.shape[0] != aux.shape[0]:
        raise ValueError(f"particle count {x.shape[0]} does not match auxiliary count {aux.shape[0]}")
    var = check_diag_cov(Q_obs, "Q_obs")
    log_w = density.logpdf(x) + gaussian_logpdf(aux, r_meas, var)
    return normalize_log_weights(log_w)


def systematic_indices(weights, u):
    """Indices selected by a comb of ``m`` pointers ``u + j / m`` over the weight CDF."""
    w = np.asarray(weights, dtype=float)
    m = w.shape[0]
    total = w.sum()
    if not np.isfinite(total) or total <= 0:
        w = np.full(m, 1.0 / m)
    # accumulate in extended precision and round once, so edges that are
    # exactly j/m (e.g. uniform weights) compare equal to the pointers
    cumulative = np.cumsum(w, dtype=np.longdouble)
    cumulative = (cumulative / cumulative[-1]).astype(float)
    pointers = u + np.arange(m) / m
    return np.minimum(np.searchsorted(cumulative, pointers, side="right"), m - 1)


def low_variance_resample(particles, rng, u=None):
    """Systematic resampling with a single offset ``u ~ U(0, 1/m)``.

    ``u`` may be passed explicitly for reproducible tests. The returned set
    carries uniform weights.
    """
    m = len(particles)
    if u is None:
        u = rng.uniform(0.0, 1.0 / m)
    idx = systematic_indices(particles.w, u)
    return ParticleSet(particles.x[idx].copy(), step=particles.step)


def estimate_from_particles(particles):
    """Weighted mean of the hypotheses."""
    if particles is None or len(particles) == 0:
        raise ValueError("cannot estimate from an empty particle set")
    return particles.w @ particles.x
