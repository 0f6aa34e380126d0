"""scikit-learn style front ends for the localization filters.

All localizers consume a table ``X`` with one row per time step::

    d1, d2, d3[, v0x, v0y]

where ``d*`` are the anchor ranges (meters) and ``v0`` is the anchor robot's
own velocity over the preceding interval (zero when the columns are absent).
``fit`` filters the whole sequence from the initial belief, ``partial_fit``
continues from the current posterior, and ``transform`` continues from the
fitted posterior without modifying it. Outputs are relative positions of
shape (n_steps, 2).

Examples
--------
>>> import numpy as np
>>> from dualmcl import DualMCLLocalizer
>>> X = np.tile([2.0, np.sqrt(8.0), np.sqrt(5.0)], (20, 1))
>>> loc = DualMCLLocalizer(n_particles=100, sigma_obs=0.5, random_state=0).fit(X)
>>> loc.estimates_.shape
(20, 2)
"""

import copy

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import InvalidParameterError, check_range_matrix
from .filters import (
    DualMclConfig,
    EkfState,
    StandardPfConfig,
    dual_mcl_step,
    ekf_step,
    init_dual_mcl,
    standard_pf_step,
)
from .geometry import AnchorLayout, construct_measurements

DEFAULT_INIT_BOX = ((-5.0, 5.0), (-5.0, 5.0))


def _split_columns(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and X.shape[1] == 3:
        X = check_range_matrix(X, 3)
        return X, np.zeros((X.shape[0], 2))
    X = check_range_matrix(X, 5)
    return X[:, :3], X[:, 3:5]


class MeasurementConstructor(TransformerMixin, BaseEstimator):
    """Stateless transformer from range triples (n, 3) to reconstructed positions (n, 2)."""

    def __init__(self, anchor_leg=1.0):
        self.anchor_leg = anchor_leg

    def fit(self, X, y=None):
        check_range_matrix(X, 3)
        self.layout_ = AnchorLayout(self.anchor_leg)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "layout_")
        return construct_measurements(check_range_matrix(X, 3), self.layout_)


class _BaseLocalizer(BaseEstimator):
    """Shared sequential machinery; subclasses provide ``_initial_state`` and ``_step``."""

    def _initial_state(self, rng):
        raise NotImplementedError

    def _step(self, state, ranges, v0, rng):
        raise NotImplementedError

    def reset(self):
        """Discard the posterior and return to the initial belief."""
        self.layout_ = AnchorLayout(self.anchor_leg)
        self._rng = np.random.default_rng(self.random_state)
        self.state_ = self._initial_state(self._rng)
        self.n_steps_ = 0
        return self

    def update(self, ranges, v0=(0.0, 0.0)):
        """Process one epoch of ranges and return its :class:`FilterEstimate`."""
        if not hasattr(self, "state_"):
            self.reset()
        self.state_, estimate = self._step(self.state_, ranges, np.asarray(v0, dtype=float), self._rng)
        self.n_steps_ += 1
        return estimate

    def _run(self, X):
        D, V0 = _split_columns(X)
        r_hat = np.empty((D.shape[0], 2))
        v1_hat = np.empty((D.shape[0], 2))
        for i in range(D.shape[0]):
            est = self.update(D[i], V0[i])
            r_hat[i] = est.r_hat
            v1_hat[i] = est.v1_hat
        return r_hat, v1_hat

    def partial_fit(self, X, y=None):
        """Continue filtering from the current posterior."""
        r_hat, v1_hat = self._run(X)
        self.estimates_ = r_hat
        self.velocity_estimates_ = v1_hat
        self.n_features_in_ = np.asarray(X).shape[1]
        return self

    def fit(self, X, y=None):
        """Filter the full sequence from the initial belief."""
        self.reset()
        return self.partial_fit(X)

    def transform(self, X):
        """Relative-position estimates for ``X`` continuing from the fitted posterior.

        The fitted state is left untouched.
        """
        check_is_fitted(self, "state_")
        clone = copy.deepcopy(self)
        return clone._run(X)[0]

    def fit_transform(self, X, y=None):
        return self.fit(X).estimates_

    predict = transform

    def score(self, X, y):
        """Negative position RMSE of the estimates of a fresh run over ``X`` against ``y``."""
        y = np.asarray(y, dtype=float).reshape(-1, 2)
        est = copy.deepcopy(self).fit(X).estimates_
        return -float(np.sqrt(np.mean(np.sum((est - y) ** 2, axis=1))))


class DualMCLLocalizer(_BaseLocalizer):
    """Dual Monte-Carlo localization of the tag robot.

    Parameters
    ----------
    n_particles : int, default=200
    sigma_obs : float or (float, float), default=1.0
        Standard deviation (m) of the Gaussian placed around the reconstructed position.
    q_mot : float or (float, float), default=0.5
        Variance ((m/s)^2) of the tag-velocity hypotheses.
    Ts : float, default=0.1
        Sampling period in seconds.
    anchor_leg : float, default=1.0
        Anchor triangle leg length ``a`` in meters.
    bandwidth : "scott" or float, default="scott"
        Kernel bandwidth rule for the motion-predicted density.
    init_region : (2, 2) box, 2-vector point or None
        Initial belief; None uses a 10 m square around the anchors.
    random_state : int, Generator or None
    """

    def __init__(
        self,
        n_particles=200,
        sigma_obs=1.0,
        q_mot=0.5,
        Ts=0.1,
        anchor_leg=1.0,
        bandwidth="scott",
        init_region=None,
        random_state=None,
    ):
        self.n_particles = n_particles
        self.sigma_obs = sigma_obs
        self.q_mot = q_mot
        self.Ts = Ts
        self.anchor_leg = anchor_leg
        self.bandwidth = bandwidth
        self.init_region = init_region
        self.random_state = random_state

    def _config(self):
        sigma_obs = np.broadcast_to(np.asarray(self.sigma_obs, dtype=float), (2,))
        if not np.all(np.isfinite(sigma_obs)) or np.any(sigma_obs < 0):
            raise InvalidParameterError(f"sigma_obs must be finite and >= 0, got {self.sigma_obs!r}")
        return DualMclConfig(
            m=self.n_particles,
            Q_obs=np.square(sigma_obs),
            Q_1mot=self.q_mot,
            Ts=self.Ts,
            layout=AnchorLayout(self.anchor_leg),
            kde_bandwidth=self.bandwidth,
        )

    def _initial_state(self, rng):
        self.config_ = self._config()
        region = DEFAULT_INIT_BOX if self.init_region is None else self.init_region
        return init_dual_mcl(region, self.config_.m, rng)

    def _step(self, state, ranges, v0, rng):
        return dual_mcl_step(state, ranges, v0, self.config_, rng)


class ParticleFilterLocalizer(_BaseLocalizer):
    """Conventional bootstrap particle filter on the raw ranges.

    Parameters
    ----------
    n_particles : int, default=200
    q_mot : float or (float, float), default=0.5
    range_sigma : float or 3 floats, default=0.05
        Range noise standard deviation assumed by the likelihood.
    Ts, anchor_leg, init_region, random_state
        As in :class:`DualMCLLocalizer`.
    """

    def __init__(
        self,
        n_particles=200,
        q_mot=0.5,
        range_sigma=0.05,
        Ts=0.1,
        anchor_leg=1.0,
        init_region=None,
        random_state=None,
    ):
        self.n_particles = n_particles
        self.q_mot = q_mot
        self.range_sigma = range_sigma
        self.Ts = Ts
        self.anchor_leg = anchor_leg
        self.init_region = init_region
        self.random_state = random_state

    def _initial_state(self, rng):
        self.config_ = StandardPfConfig(
            m=self.n_particles,
            Q_1mot=self.q_mot,
            Ts=self.Ts,
            layout=AnchorLayout(self.anchor_leg),
            range_sigma=self.range_sigma,
        )
        region = DEFAULT_INIT_BOX if self.init_region is None else self.init_region
        return init_dual_mcl(region, self.config_.m, rng)

    def _step(self, state, ranges, v0, rng):
        return standard_pf_step(state, ranges, v0, self.config_, rng)


class EKFLocalizer(_BaseLocalizer):
    """Extended Kalman filter on ``[r, v1]`` with constant-velocity prediction.

    Parameters
    ----------
    init_position : 2 floats or None
        Initial relative-position guess; None uses the center of ``init_region``
        (or the origin).
    init_region : (2, 2) box or None
        Used only to derive a default ``init_position``.
    init_position_var, init_velocity_var : float
        Initial covariance diagonal entries.
    q_position, q_velocity : float
        Per-step process noise variances.
    range_sigma : float or 3 floats
    Ts, anchor_leg, random_state
        ``random_state`` is accepted for interface parity; the EKF is deterministic.
    """

    def __init__(
        self,
        init_position=None,
        init_region=None,
        init_position_var=4.0,
        init_velocity_var=1.0,
        q_position=0.01,
        q_velocity=0.5,
        range_sigma=0.05,
        Ts=0.1,
        anchor_leg=1.0,
        random_state=None,
    ):
        self.init_position = init_position
        self.init_region = init_region
        self.init_position_var = init_position_var
        self.init_velocity_var = init_velocity_var
        self.q_position = q_position
        self.q_velocity = q_velocity
        self.range_sigma = range_sigma
        self.Ts = Ts
        self.anchor_leg = anchor_leg
        self.random_state = random_state

    def _initial_state(self, rng):
        if self.init_position is not None:
            r0 = np.asarray(self.init_position, dtype=float)
        elif self.init_region is not None and np.shape(self.init_region) == (2, 2):
            r0 = np.asarray(self.init_region, dtype=float).mean(axis=1)
        elif self.init_region is not None:
            r0 = np.asarray(self.init_region, dtype=float)
        else:
            r0 = np.zeros(2)
        self.process_cov_ = np.diag([self.q_position] * 2 + [self.q_velocity] * 2)
        self.meas_cov_ = np.square(np.broadcast_to(np.asarray(self.range_sigma, dtype=float), (3,)))
        cov = np.diag([self.init_position_var] * 2 + [self.init_velocity_var] * 2)
        return EkfState(np.concatenate([r0, np.zeros(2)]), cov)

    def _step(self, state, ranges, v0, rng):
        return ekf_step(state, ranges, v0, self.process_cov_, self.meas_cov_, self.Ts, self.layout_)


ESTIMATORS = {
    "dual_mcl": DualMCLLocalizer,
    "standard_pf": ParticleFilterLocalizer,
    "ekf": EKFLocalizer,
}
