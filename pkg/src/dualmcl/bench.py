"""Error metrics and seeded parameter sweeps over scenario runs."""

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from .io import ConfigError, from_dict, to_dict
from .sensing import RangeNoiseModel
from .sim import ScenarioConfig, run_scenario

# transient steps dropped before computing RMSE for thresholds; 0 gives the whole-run figure
DEFAULT_SKIP_TRANSIENT = 10
SWEEP_AXES = ("m", "sigma_obs", "sigma_dist", "estimator")


def rmse(trace, skip_transient=DEFAULT_SKIP_TRANSIENT):
    """Root mean square relative-position error after ``skip_transient`` steps.

    Parameters
    ----------
    trace : ScenarioTrace or mapping
        Needs ``r_hat`` and ``r_true`` arrays of shape (n, 2).
    skip_transient : int, default=10
        Leading steps to drop; 0 scores the whole run.

    Raises
    ------
    ValueError
        If nothing is left after skipping.
    """
    if isinstance(trace, dict):
        r_hat, r_true = np.asarray(trace["r_hat"]), np.asarray(trace["r_true"])
    else:
        r_hat, r_true = np.asarray(trace.r_hat), np.asarray(trace.r_true)
    skip = int(skip_transient)
    if skip < 0:
        raise ValueError("skip_transient must be >= 0")
    if r_hat.shape[0] <= skip:
        raise ValueError(f"no steps left: trace has {r_hat.shape[0]} steps, skip_transient={skip}")
    diff = r_hat[skip:] - r_true[skip:]
    return float(np.sqrt(np.mean(np.sum(diff**2, axis=1))))


def apply_axis(base, axis, value):
    """Copy of ``base`` with one swept parameter replaced."""
    if axis == "m":
        return replace(base, filter=replace(base.filter, m=int(value)))
    if axis == "sigma_obs":
        return replace(base, filter=replace(base.filter, sigma_obs=value))
    if axis == "sigma_dist":
        return replace(base, noise=RangeNoiseModel(base.noise.bias, value))
    if axis == "estimator":
        return replace(base, filter=replace(base.filter, estimator=str(value)))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


@dataclass(frozen=True)
class SweepSpec:
    """``repeats`` seeded runs of ``base`` for every value on ``axis``.

    Run ``i`` of every value uses seed ``base.seed + i``, so the values are
    compared on the same seeds.
    """

    base: ScenarioConfig
    axis: str
    values: tuple
    repeats: int = 5
    skip_transient: int = DEFAULT_SKIP_TRANSIENT

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; expected one of {SWEEP_AXES}")
        values = tuple(self.values)
        if not values:
            raise ValueError("a sweep needs at least one value")
        object.__setattr__(self, "values", values)
        if isinstance(self.repeats, bool) or not isinstance(self.repeats, (int, np.integer)) or self.repeats < 1:
            raise ValueError(f"repeats must be an integer >= 1, got {self.repeats!r}")
        for value in values:
            apply_axis(self.base, self.axis, value)

    def runs(self):
        """Yield ``(value, seed, config)`` for every run."""
        for value in self.values:
            for i in range(self.repeats):
                seed = self.base.seed + i
                yield value, seed, replace(apply_axis(self.base, self.axis, value), seed=seed)


@dataclass
class SweepResult:
    """Raw per-run RMSE entries ``(value, seed, rmse)`` and their per-value statistics."""

    axis: str
    entries: list = field(default_factory=list)

    @property
    def values(self):
        seen = []
        for value, _, _ in self.entries:
            if value not in seen:
                seen.append(value)
        return seen

    def rmses(self, value):
        return np.array([r for v, _, r in self.entries if v == value])

    def mean(self, value):
        return float(np.mean(self.rmses(value)))

    def std(self, value):
        """Sample standard deviation (ddof=1); 0 for a single run."""
        r = self.rmses(value)
        return float(np.std(r, ddof=1)) if r.size > 1 else 0.0

    def summary(self):
        """Rows ``(value, n, mean, std)`` in sweep order."""
        return [(v, self.rmses(v).size, self.mean(v), self.std(v)) for v in self.values]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["axis", "value", "seed", "rmse"])
            for value, seed, r in self.entries:
                writer.writerow([self.axis, value, seed, repr(float(r))])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: no sweep entries")
        axis = rows[0]["axis"]
        entries = [(_parse_value(axis, row["value"]), int(row["seed"]), float(row["rmse"])) for row in rows]
        return cls(axis, entries)


def _parse_value(axis, text):
    if axis == "estimator":
        return text
    if axis == "m":
        return int(text)
    return float(text)


def _score(value, seed, config, skip):
    return value, seed, rmse(run_scenario(config), skip)


def run_sweep(spec, n_jobs=1):
    """Execute every run of ``spec`` and collect RMSEs.

    Runs are independent; ``n_jobs`` > 1 spreads them over processes. The
    entries come back in spec order regardless of completion order.
    """
    jobs = [delayed(_score)(value, seed, config, spec.skip_transient) for value, seed, config in spec.runs()]
    entries = Parallel(n_jobs=n_jobs)(jobs)
    return SweepResult(spec.axis, list(entries))


def sweep_spec_from_json(text):
    """Parse ``{"base": <scenario>, "axis": ..., "values": [...], "repeats": n, "skip_transient": n}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("sweep spec must be an object")
    allowed = {"base", "axis", "values", "repeats", "skip_transient"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r} in sweep spec", key=unknown[0])
    for key in ("base", "axis", "values"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}", key=key)
    base = from_dict(ScenarioConfig, data["base"], "base")
    kwargs = {k: data[k] for k in ("repeats", "skip_transient") if k in data}
    try:
        return SweepSpec(base, data["axis"], data["values"], **kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid sweep spec: {exc}") from exc


def sweep_spec_to_json(spec):
    return json.dumps(
        {
            "base": to_dict(spec.base),
            "axis": spec.axis,
            "values": list(spec.values),
            "repeats": spec.repeats,
            "skip_transient": spec.skip_transient,
        },
        indent=2,
    )


def read_sweep_spec(path):
    with open(path) as fh:
        return sweep_spec_from_json(fh.read())
