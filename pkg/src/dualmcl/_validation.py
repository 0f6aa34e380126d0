"""Input validation helpers shared by the estimators and the functional core."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array


class InvalidParameterError(ValueError):
    """Raised when a model or scenario parameter is out of range."""


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_count(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise InvalidParameterError(f"{name} must be an integer >= 1, got {value!r}")
    return int(value)


def check_vector2(value, name):
    """Return ``value`` as a finite float array of shape (2,)."""
    arr = np.asarray(value, dtype=float)
    if arr.shape != (2,):
        raise InvalidParameterError(f"{name} must be a 2-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} must be finite, got {arr!r}")
    return arr


def check_diag_cov(value, name):
    """Accept a scalar, a length-2 diagonal or a 2x2 diagonal matrix.

    Returns the diagonal as a float array of shape (2,).
    """
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(2, float(arr))
    elif arr.shape == (2, 2):
        if arr[0, 1] != 0 or arr[1, 0] != 0:
            raise InvalidParameterError(f"{name} must be diagonal")
        arr = np.diag(arr).copy()
    elif arr.shape != (2,):
        raise InvalidParameterError(f"{name} must be a 2x2 diagonal covariance, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidParameterError(f"{name} diagonal must be finite and >= 0, got {arr!r}")
    return arr


def check_range_matrix(X, n_columns=3):
    """Validate a (n_samples, n_columns) table whose first three columns are ranges."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != n_columns:
        raise ValueError(f"expected {n_columns} columns, got {X.shape[1]}")
    if np.any(X[:, :3] < 0):
        raise ValueError("ranges must be nonnegative")
    return X
