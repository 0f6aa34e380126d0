"""UWB range noise synthesis and per-anchor bias/variance calibration."""

import csv
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_range_matrix
from .geometry import RangeTriple


class InsufficientDataError(ValueError):
    """Raised when a calibration record has fewer than two pairs for an anchor."""


def _per_anchor(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(3, float(arr))
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a scalar or a length-3 sequence, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class RangeNoiseModel:
    """Additive Gaussian range error with a constant per-anchor bias.

    ``bias`` and ``sigma_dist`` accept a scalar (shared by all anchors) or one
    value per anchor.
    """

    bias: np.ndarray = 0.0
    sigma_dist: np.ndarray = 0.0

    def __post_init__(self):
        bias = _per_anchor(self.bias, "bias")
        sigma = _per_anchor(self.sigma_dist, "sigma_dist")
        if np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise ValueError(f"sigma_dist must be finite and >= 0, got {sigma!r}")
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "sigma_dist", sigma)


@dataclass
class CalibrationRecord:
    """Measured/true range pairs keyed by anchor id (1, 2, 3)."""

    pairs: dict

    @classmethod
    def from_csv(cls, path):
        """Read a CSV with columns ``anchor_id, measured_m, truth_m``."""
        pairs = {1: [], 2: [], 3: []}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"anchor_id", "measured_m", "truth_m"} - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"calibration CSV is missing columns: {sorted(missing)}")
            for line, row in enumerate(reader, start=2):
                anchor = int(row["anchor_id"])
                if anchor not in pairs:
                    raise ValueError(f"line {line}: anchor_id must be 1, 2 or 3, got {anchor}")
                pairs[anchor].append((float(row["measured_m"]), float(row["truth_m"])))
        return cls(pairs)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["anchor_id", "measured_m", "truth_m"])
            for anchor in sorted(self.pairs):
                for measured, truth in self.pairs[anchor]:
                    writer.writerow([anchor, repr(float(measured)), repr(float(truth))])


def corrupt_ranges(true, model, rng):
    """Add bias and Gaussian noise to noiseless ranges; results are clipped at 0.

    ``true`` is a :class:`RangeTriple` or an (..., 3) array. The return type
    matches the input.
    """
    if isinstance(true, RangeTriple):
        noisy = _corrupt(true.as_array(), model, rng)
        return RangeTriple.from_array(noisy, true.step)
    return _corrupt(np.asarray(true, dtype=float), model, rng)


def _corrupt(d, model, rng):
    if np.any(d < 0):
        raise ValueError("true ranges must be nonnegative")
    noise = rng.standard_normal(d.shape) * model.sigma_dist
    return np.maximum(0.0, d + model.bias + noise)


def calibrate(records):
    """Estimate per-anchor bias (sample mean) and noise std (unbiased sample std).

    Parameters
    ----------
    records : CalibrationRecord

    Returns
    -------
    RangeNoiseModel
    """
    bias = np.empty(3)
    sigma = np.empty(3)
    for i, anchor in enumerate((1, 2, 3)):
        pairs = np.asarray(records.pairs.get(anchor, ()), dtype=float).reshape(-1, 2)
        if pairs.shape[0] < 2:
            raise InsufficientDataError(
                f"anchor {anchor} has {pairs.shape[0]} calibration pair(s); at least 2 are required"
            )
        err = pairs[:, 0] - pairs[:, 1]
        bias[i] = err.mean()
        sigma[i] = np.std(err - bias[i], ddof=1)
    return RangeNoiseModel(bias=bias, sigma_dist=sigma)


class RangeCalibrator(TransformerMixin, BaseEstimator):
    """Learn per-anchor range bias and noise level; ``transform`` removes the bias.

    ``fit(X, y)`` takes measured ranges ``X`` and true ranges ``y``, both of
    shape (n_samples, 3).

    Attributes
    ----------
    bias_ : ndarray of shape (3,)
    sigma_ : ndarray of shape (3,)
    noise_model_ : RangeNoiseModel
    """

    def __init__(self, clip_negative=True):
        self.clip_negative = clip_negative

    def fit(self, X, y):
        X = check_range_matrix(X)
        y = check_range_matrix(y)
        if X.shape != y.shape:
            raise ValueError(f"X and y shapes differ: {X.shape} vs {y.shape}")
        pairs = {anchor: list(zip(X[:, anchor - 1], y[:, anchor - 1])) for anchor in (1, 2, 3)}
        self.noise_model_ = calibrate(CalibrationRecord(pairs))
        self.bias_ = self.noise_model_.bias
        self.sigma_ = self.noise_model_.sigma_dist
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "bias_")
        X = check_range_matrix(X)
        out = X - self.bias_
        if self.clip_negative:
            out = np.maximum(out, 0.0)
        return out
