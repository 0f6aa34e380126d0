"""Plain-text persistence: scenario/sweep JSON and trace/sweep CSV.

Scenario documents mirror :class:`~dualmcl.sim.ScenarioConfig` field for
field. Parsing is strict: unknown keys are rejected, and every top-level key
except ``controller`` must be present. Nested objects may omit fields that
have defaults.
"""

import csv
import dataclasses
import json

import numpy as np

from .control import FormationGoal
from .motion import RobotLimits
from .sensing import RangeNoiseModel
from .sim import FilterConfig, RobotConfig, ScenarioConfig, VelocityProfile

TRACE_COLUMNS = (
    "k", "t", "r_x", "r_y", "rhat_x", "rhat_y", "d1", "d2", "d3",
    "rmeas_x", "rmeas_y", "v0x_cmd", "v0y_cmd", "err",
)

# which fields hold nested dataclasses, per owning type
_NESTED = {
    ScenarioConfig: {
        "noise": RangeNoiseModel,
        "anchor": RobotConfig,
        "tag": RobotConfig,
        "controller": FormationGoal,
        "filter": FilterConfig,
    },
    RobotConfig: {"limits": RobotLimits, "profile": VelocityProfile},
}
_OPTIONAL_TOP_LEVEL = {"controller"}


class ConfigError(ValueError):
    """Malformed configuration document; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


def _plain(value):
    if dataclasses.is_dataclass(value):
        return to_dict(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def to_dict(obj):
    """JSON-ready nested dict of a config dataclass."""
    return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}


def from_dict(cls, data, path=""):
    """Build ``cls`` from a nested dict, rejecting unknown keys.

    Raises
    ------
    ConfigError
        Naming the dotted path of the unknown, missing or invalid key.
    """
    where = path or cls.__name__
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}", key=path or None)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        key = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError(f"unknown key {key!r} in {where}", key=key)
    if cls is ScenarioConfig:
        missing = [name for name in fields if name not in data and name not in _OPTIONAL_TOP_LEVEL]
        if missing:
            raise ConfigError(f"missing required key {missing[0]!r}", key=missing[0])
    kwargs = {}
    nested = _NESTED.get(cls, {})
    for name, value in data.items():
        key = f"{path}.{name}" if path else name
        if name in nested and value is not None:
            value = from_dict(nested[name], value, key)
        elif name == "segments":
            value = tuple((t0, tuple(v)) for t0, v in value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {where}: {exc}", key=path or None) from exc


def scenario_to_json(config):
    return json.dumps(to_dict(config), indent=2)


def scenario_from_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    return from_dict(ScenarioConfig, data)


def write_scenario(config, path):
    with open(path, "w") as fh:
        fh.write(scenario_to_json(config) + "\n")


def read_scenario(path):
    with open(path) as fh:
        return scenario_from_json(fh.read())


def trace_columns(trace):
    """Column name -> array mapping of a :class:`~dualmcl.sim.ScenarioTrace`."""
    return {
        "k": trace.k, "t": trace.t,
        "r_x": trace.r_true[:, 0], "r_y": trace.r_true[:, 1],
        "rhat_x": trace.r_hat[:, 0], "rhat_y": trace.r_hat[:, 1],
        "d1": trace.ranges[:, 0], "d2": trace.ranges[:, 1], "d3": trace.ranges[:, 2],
        "rmeas_x": trace.r_meas[:, 0], "rmeas_y": trace.r_meas[:, 1],
        "v0x_cmd": trace.v0_cmd[:, 0], "v0y_cmd": trace.v0_cmd[:, 1],
        "err": trace.err,
    }


def write_trace(trace, path):
    """Write one row per step with the columns of :data:`TRACE_COLUMNS`.

    ``trace`` is a ScenarioTrace or a column mapping as returned by
    :func:`read_trace`. Floats are written with ``repr`` so reading back is
    exact.
    """
    columns = trace if isinstance(trace, dict) else trace_columns(trace)
    table = np.column_stack([np.asarray(columns[name], dtype=float) for name in TRACE_COLUMNS])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in table:
            writer.writerow([int(row[0])] + [repr(float(x)) for x in row[1:]])


def read_trace(path):
    """Read a trace CSV into a dict of column name -> ndarray."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_COLUMNS:
            raise ConfigError(f"{path}: expected trace header {','.join(TRACE_COLUMNS)}")
        rows = [[float(x) for x in row] for row in reader if row]
    if not rows:
        raise ConfigError(f"{path}: trace has no rows")
    table = np.asarray(rows, dtype=float)
    out = {name: table[:, i] for i, name in enumerate(TRACE_COLUMNS)}
    out["k"] = out["k"].astype(int)
    return out
