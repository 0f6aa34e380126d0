import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from dualmcl import (
    DualMCLLocalizer,
    EKFLocalizer,
    MeasurementConstructor,
    ParticleFilterLocalizer,
    true_ranges,
)
from dualmcl.geometry import AnchorLayout
from dualmcl.sim import case1_config, run_scenario

LOCALIZERS = [
    lambda: DualMCLLocalizer(n_particles=100, anchor_leg=0.44, random_state=0),
    lambda: ParticleFilterLocalizer(n_particles=100, anchor_leg=0.44, random_state=0),
    lambda: EKFLocalizer(anchor_leg=0.44, init_position=(-2.0, 2.0)),
]
IDS = ["dual_mcl", "standard_pf", "ekf"]


@pytest.fixture(scope="module")
def logged():
    """Ranges, anchor velocities and truth from a short Case-1 run."""
    trace = run_scenario(case1_config(n_steps=60, seed=5))
    X = np.column_stack([trace.ranges, np.vstack([np.zeros((1, 2)), np.diff(trace.p0, axis=0) / 0.1])])
    return X, trace.r_true


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
def test_params_and_clone(make):
    est = make()
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params
    assert not hasattr(twin, "state_")
    est.set_params(random_state=3)
    assert est.get_params()["random_state"] == 3


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
def test_fit_shapes_and_accuracy(make, logged):
    X, truth = logged
    est = make().fit(X)
    assert est.estimates_.shape == (60, 2)
    assert est.velocity_estimates_.shape == (60, 2)
    assert est.n_steps_ == 60
    assert est.n_features_in_ == 5
    err = np.linalg.norm(est.estimates_[10:] - truth[10:], axis=1)
    assert np.sqrt(np.mean(err**2)) < 1.5


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
def test_fit_is_reproducible(make, logged):
    X, _ = logged
    np.testing.assert_array_equal(make().fit(X).estimates_, make().fit(X).estimates_)


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
def test_transform_leaves_state_untouched(make, logged):
    X, _ = logged
    est = make().fit(X[:30])
    before = est.estimates_.copy()
    steps = est.n_steps_
    first = est.transform(X[30:])
    second = est.transform(X[30:])
    np.testing.assert_array_equal(first, second)
    assert est.n_steps_ == steps
    np.testing.assert_array_equal(est.estimates_, before)


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
def test_partial_fit_continues(make, logged):
    X, _ = logged
    whole = make().fit(X).estimates_
    split = make().fit(X[:25])
    head = split.estimates_
    tail = split.partial_fit(X[25:]).estimates_
    assert split.n_steps_ == 60
    np.testing.assert_allclose(np.vstack([head, tail]), whole, rtol=0, atol=1e-12)


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
def test_three_column_input_means_still_anchor(make, logged):
    X, _ = logged
    padded = np.column_stack([X[:, :3], np.zeros((60, 2))])
    np.testing.assert_array_equal(make().fit(X[:, :3]).estimates_, make().fit(padded).estimates_)


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
def test_score_is_negative_rmse(make, logged):
    X, truth = logged
    est = make()
    score = est.score(X, truth)
    fitted = make().fit(X).estimates_
    assert score == pytest.approx(-np.sqrt(np.mean(np.sum((fitted - truth) ** 2, axis=1))))
    assert not hasattr(est, "state_")


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
def test_transform_before_fit(make, logged):
    with pytest.raises(NotFittedError):
        make().transform(logged[0])


@pytest.mark.parametrize("make", LOCALIZERS, ids=IDS)
@pytest.mark.parametrize("bad", [np.ones((4, 4)), np.ones(3), np.array([[1.0, np.nan, 1.0]]), np.array([[1.0, -1.0, 1.0]])],
                         ids=["4-col", "1-d", "nan", "negative"])
def test_rejects_bad_input(make, bad):
    with pytest.raises(ValueError):
        make().fit(bad)


def test_update_matches_fit(logged):
    X, _ = logged
    est = DualMCLLocalizer(n_particles=80, anchor_leg=0.44, random_state=1)
    online = np.array([est.update(row[:3], row[3:]).r_hat for row in X])
    np.testing.assert_array_equal(online, DualMCLLocalizer(n_particles=80, anchor_leg=0.44, random_state=1).fit(X).estimates_)


def test_invalid_hyperparameters_raise_at_fit(logged):
    X, _ = logged
    for est in (DualMCLLocalizer(n_particles=0), DualMCLLocalizer(sigma_obs=-1.0), DualMCLLocalizer(Ts=0.0),
                DualMCLLocalizer(bandwidth="silverman"), ParticleFilterLocalizer(range_sigma=0.0)):
        with pytest.raises(ValueError):
            est.fit(X)


# -- measurement constructor -------------------------------------------------------

def test_measurement_constructor_round_trip(rng):
    layout = AnchorLayout(0.44)
    pts = rng.uniform(-5, 5, size=(200, 2))
    X = np.array([true_ranges(p, layout).as_array() for p in pts])
    out = MeasurementConstructor(anchor_leg=0.44).fit_transform(X)
    np.testing.assert_allclose(out, pts, atol=1e-9)


def test_measurement_constructor_params():
    tr = MeasurementConstructor(anchor_leg=2.0)
    assert clone(tr).get_params() == {"anchor_leg": 2.0}
    with pytest.raises(NotFittedError):
        tr.transform(np.ones((1, 3)))
    with pytest.raises(ValueError):
        tr.fit(np.ones((2, 5)))
