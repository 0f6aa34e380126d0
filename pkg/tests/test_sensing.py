import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone

from dualmcl.geometry import RangeTriple
from dualmcl.sensing import (
    CalibrationRecord,
    InsufficientDataError,
    RangeCalibrator,
    RangeNoiseModel,
    calibrate,
    corrupt_ranges,
)


def test_identity_without_noise(rng):
    out = corrupt_ranges(RangeTriple(1, 2, 3), RangeNoiseModel(0.0, 0.0), rng)
    assert isinstance(out, RangeTriple)
    np.testing.assert_array_equal(out.as_array(), [1, 2, 3])


def test_pure_bias(rng):
    out = corrupt_ranges(np.array([1.0, 2.0, 3.0]), RangeNoiseModel(0.3, 0.0), rng)
    np.testing.assert_allclose(out, [1.3, 2.3, 3.3])


def test_noise_statistics():
    rng = np.random.default_rng(1)
    d = corrupt_ranges(np.full((10_000, 3), 2.0), RangeNoiseModel(0.0, 0.05), rng)[:, 0]
    assert abs(d.mean() - 2.0) < 0.01
    assert abs(d.std(ddof=1) - 0.05) < 0.005


def test_per_anchor_parameters(rng):
    model = RangeNoiseModel((0.1, 0.2, 0.3), (0.0, 0.0, 0.0))
    np.testing.assert_allclose(corrupt_ranges(np.ones(3), model, rng), [1.1, 1.2, 1.3])


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        RangeNoiseModel(0.0, -0.01)


@given(st.floats(0, 3), st.floats(-5, 0), st.floats(0, 2), st.integers(0, 2**32 - 1))
def test_output_never_negative(d, bias, sigma, seed):
    out = corrupt_ranges(np.full(3, d), RangeNoiseModel(bias, sigma), np.random.default_rng(seed))
    assert np.all(out >= 0)


def test_calibrate_constant_offset():
    records = CalibrationRecord({a: [(2.3, 2.0)] * 4 for a in (1, 2, 3)})
    model = calibrate(records)
    np.testing.assert_allclose(model.bias, 0.3)
    np.testing.assert_allclose(model.sigma_dist, 0.0, atol=1e-12)


def test_calibrate_needs_two_pairs():
    records = CalibrationRecord({1: [(2.3, 2.0)], 2: [(1, 1), (1, 1)], 3: [(1, 1), (1, 1)]})
    with pytest.raises(InsufficientDataError):
        calibrate(records)


@pytest.mark.parametrize("seed", [0, 7, 99])
def test_calibration_recovers_corruption(seed):
    rng = np.random.default_rng(seed)
    truth = rng.uniform(0.5, 10.0, size=(10_000, 3))
    measured = corrupt_ranges(truth, RangeNoiseModel(0.3, 0.05), rng)
    pairs = {a: list(zip(measured[:, a - 1], truth[:, a - 1])) for a in (1, 2, 3)}
    model = calibrate(CalibrationRecord(pairs))
    np.testing.assert_allclose(model.bias, 0.3, atol=0.005)
    np.testing.assert_allclose(model.sigma_dist, 0.05, rtol=0.1)


def test_calibration_csv_round_trip(tmp_path):
    records = CalibrationRecord({1: [(1.1, 1.0), (1.2, 1.0)], 2: [(2.0, 2.0), (2.1, 2.0)], 3: [(0.5, 0.5), (0.45, 0.5)]})
    path = tmp_path / "cal.csv"
    records.to_csv(path)
    back = CalibrationRecord.from_csv(path)
    assert back.pairs == records.pairs


def test_calibration_csv_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("anchor_id,measured_m\n1,1.0\n")
    with pytest.raises(ValueError, match="truth_m"):
        CalibrationRecord.from_csv(path)


def test_range_calibrator_estimator():
    rng = np.random.default_rng(3)
    truth = rng.uniform(1, 5, size=(2000, 3))
    measured = corrupt_ranges(truth, RangeNoiseModel((0.1, -0.2, 0.05), 0.02), rng)
    cal = RangeCalibrator().fit(measured, truth)
    np.testing.assert_allclose(cal.bias_, (0.1, -0.2, 0.05), atol=0.003)
    residual = cal.transform(measured) - truth
    assert np.all(np.abs(residual.mean(axis=0)) < 1e-9)
    assert clone(cal).get_params() == {"clip_negative": True}
