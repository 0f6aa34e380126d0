"""Extended Kalman filter baseline on the state [r, v1] with raw range updates."""

from dataclasses import dataclass

import numpy as np

from .._validation import check_positive, check_vector2
from ..geometry import construct_measurement
from .dual_mcl import FilterEstimate

# Ranges closer than this to an anchor carry no usable direction.
MIN_LINEARIZATION_RANGE = 1e-6


@dataclass(frozen=True)
class EkfState:
    mean: np.ndarray
    cov: np.ndarray
    step: int = 0

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(4)
        cov = np.asarray(self.cov, dtype=float).reshape(4, 4)
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("EKF state must be finite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def measurement_function(mean, layout):
    """Predicted anchor ranges for the state ``[r_x, r_y, v_x, v_y]``."""
    return np.linalg.norm(np.asarray(mean, dtype=float)[:2] - layout.anchors, axis=1)


def measurement_jacobian(mean, layout):
    """Rows ``[(r - q_i) / |r - q_i|, 0, 0]``; near-singular rows are returned as zeros."""
    diff = np.asarray(mean, dtype=float)[:2] - layout.anchors
    dist = np.linalg.norm(diff, axis=1)
    H = np.zeros((3, 4))
    ok = dist >= MIN_LINEARIZATION_RANGE
    H[ok, :2] = diff[ok] / dist[ok, None]
    return H


def transition_matrix(Ts):
    F = np.eye(4)
    F[0, 2] = F[1, 3] = Ts
    return F


def ekf_step(state, ranges, v0_k, process_cov, meas_cov, Ts, layout):
    """Constant-velocity prediction followed by a range update.

    Parameters
    ----------
    state : EkfState
    ranges : RangeTriple or array-like of 3 floats
    v0_k : array-like of 2 floats
        Anchor-robot velocity over the last interval.
    process_cov : ndarray of shape (4, 4)
    meas_cov : ndarray of shape (3, 3) or (3,)
    Ts : float
    layout : AnchorLayout

    Range rows whose linearization point is within
    ``MIN_LINEARIZATION_RANGE`` of their anchor are skipped.
    """
    Ts = check_positive(Ts, "Ts")
    v0_k = check_vector2(v0_k, "v0_k")
    d = np.asarray(ranges.as_array() if hasattr(ranges, "as_array") else ranges, dtype=float)
    R = np.asarray(meas_cov, dtype=float)
    if R.ndim == 1:
        R = np.diag(R)

    F = transition_matrix(Ts)
    x = F @ state.mean
    x[:2] -= v0_k * Ts
    P = F @ state.cov @ F.T + np.asarray(process_cov, dtype=float)

    dist = np.linalg.norm(x[:2] - layout.anchors, axis=1)
    rows = np.flatnonzero(dist >= MIN_LINEARIZATION_RANGE)
    if rows.size:
        H = measurement_jacobian(x, layout)[rows]
        innovation = d[rows] - dist[rows]
        S = H @ P @ H.T + R[np.ix_(rows, rows)]
        # three ranges constrain a 2-D position, so S is singular when R = 0
        K = P @ H.T @ np.linalg.pinv(S, hermitian=True)
        x = x + K @ innovation
        I_KH = np.eye(4) - K @ H
        # Joseph form keeps P positive semidefinite
        P = I_KH @ P @ I_KH.T + K @ R[np.ix_(rows, rows)] @ K.T
    P = 0.5 * (P + P.T)

    k = state.step + 1
    r_meas = construct_measurement(d, layout).r_meas
    return EkfState(x, P, k), FilterEstimate(x[:2].copy(), x[2:].copy(), k, r_meas)
