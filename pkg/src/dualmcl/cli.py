"""Command-line entry point: ``dualmcl {simulate,sweep,calibrate,replay,preset}``.

Every subcommand prints a JSON document on stdout. The exit status is 0 when
the run completed and every reported number is finite, 1 for a non-finite
result or a failed run, and 2 for bad arguments or malformed input files.
"""

import argparse
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import sim
from .bench import DEFAULT_SKIP_TRANSIENT, read_sweep_spec, rmse, run_sweep
from .estimators import DEFAULT_INIT_BOX, ESTIMATORS
from .io import ConfigError, read_scenario, read_trace, scenario_to_json, write_trace
from .sensing import CalibrationRecord, InsufficientDataError, calibrate

PRESETS = {
    "case1": sim.case1_config,
    "agile": sim.agile_config,
    "static": sim.static_config,
    "formation": sim.formation_config,
}


class _Failure(Exception):
    """A run that completed abnormally (exit status 1)."""


def _all_finite(obj):
    if isinstance(obj, dict):
        return all(_all_finite(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return all(_all_finite(v) for v in obj)
    if isinstance(obj, float):
        return math.isfinite(obj)
    return True


def _override(config, args):
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.steps is not None:
        config = replace(config, n_steps=args.steps)
    return config


def _cmd_simulate(args):
    config = _override(read_scenario(args.config), args)
    try:
        trace = sim.run_scenario(config)
    except sim.SimulationError as exc:
        raise _Failure(str(exc)) from exc
    if args.trace:
        write_trace(trace, args.trace)
    return {
        "estimator": config.filter.estimator,
        "steps": len(trace),
        "seed": config.seed,
        "skip_transient": args.skip_transient,
        "rmse": rmse(trace, args.skip_transient),
        "rmse_whole_run": rmse(trace, 0),
        "final_error": float(trace.err[-1]),
        "trace": args.trace,
    }


def _cmd_sweep(args):
    spec = read_sweep_spec(args.spec)
    if args.seed is not None or args.steps is not None:
        spec = replace(spec, base=_override(spec.base, args))
    if args.skip_transient is not None:
        spec = replace(spec, skip_transient=args.skip_transient)
    result = run_sweep(spec, n_jobs=args.jobs)
    if args.out:
        result.to_csv(args.out)
    return {
        "axis": spec.axis,
        "repeats": spec.repeats,
        "skip_transient": spec.skip_transient,
        "summary": [{"value": v, "n": n, "mean": m, "std": s} for v, n, m, s in result.summary()],
        "out": args.out,
    }


def _cmd_calibrate(args):
    try:
        records = CalibrationRecord.from_csv(args.records)
    except ValueError as exc:
        raise ConfigError(f"{args.records}: {exc}") from exc
    model = calibrate(records)
    return {"bias": model.bias.tolist(), "sigma_dist": model.sigma_dist.tolist()}


def _replay_config(args, n_steps, Ts):
    if args.config:
        config = read_scenario(args.config)
    else:
        still = sim.VelocityProfile.constant((0.0, 0.0))
        config = sim.ScenarioConfig(
            anchor=sim.RobotConfig(profile=still),
            tag=sim.RobotConfig(profile=still),
            init_region=DEFAULT_INIT_BOX,
        )
    config = replace(config, f=1.0 / Ts, n_steps=n_steps, filter=replace(config.filter, estimator=args.estimator))
    if args.a is not None:
        config = replace(config, a=args.a)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config


def _cmd_replay(args):
    log = read_trace(args.trace)
    n = log["k"].size if args.steps is None else min(args.steps, log["k"].size)
    if n < 1:
        raise ConfigError("nothing to replay")
    dt = np.diff(log["t"][:n]) if n > 1 else np.array([])
    Ts = float(np.median(dt)) if dt.size else 0.1
    if not Ts > 0:
        raise ConfigError(f"{args.trace}: time column is not increasing")
    config = _replay_config(args, n, Ts)
    localizer = sim.make_localizer(config, np.random.default_rng(config.seed))
    localizer.reset()

    ranges = np.column_stack([log["d1"], log["d2"], log["d3"]])[:n]
    commands = np.column_stack([log["v0x_cmd"], log["v0y_cmd"]])[:n]
    # the anchor's velocity over the previous interval is approximated by the command issued then
    v0 = np.vstack([np.zeros((1, 2)), commands[:-1]])
    r_hat = np.empty((n, 2))
    r_meas = np.empty((n, 2))
    for k in range(n):
        est = localizer.update(ranges[k], v0[k])
        r_hat[k], r_meas[k] = est.r_hat, est.r_meas
    r_true = np.column_stack([log["r_x"], log["r_y"]])[:n]

    if args.out:
        columns = {name: values[:n] for name, values in log.items()}
        columns.update(
            rhat_x=r_hat[:, 0], rhat_y=r_hat[:, 1], rmeas_x=r_meas[:, 0], rmeas_y=r_meas[:, 1],
            err=np.linalg.norm(r_hat - r_true, axis=1),
        )
        write_trace(columns, args.out)
    skip = min(args.skip_transient, n - 1)
    return {
        "estimator": args.estimator,
        "steps": n,
        "Ts": Ts,
        "skip_transient": skip,
        "rmse": rmse({"r_hat": r_hat, "r_true": r_true}, skip),
        "out": args.out,
    }


def _cmd_preset(args):
    config = PRESETS[args.name]()
    config = _override(config, args)
    if args.estimator:
        config = replace(config, filter=replace(config.filter, estimator=args.estimator))
    text = scenario_to_json(config)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        return {"preset": args.name, "out": args.out}
    return json.loads(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="dualmcl", description="Relative localization from on-board UWB ranges.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--steps", type=int, default=None, help="override the number of steps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run one scenario")
    p.add_argument("config", help="scenario JSON")
    p.add_argument("--trace", help="write the per-step trace CSV here")
    p.add_argument("--skip-transient", type=int, default=DEFAULT_SKIP_TRANSIENT)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="run a seeded parameter sweep")
    p.add_argument("spec", help="sweep spec JSON")
    p.add_argument("--out", help="write raw per-run RMSEs as CSV")
    p.add_argument("--skip-transient", type=int, default=None, help="override the transient window set in the sweep file")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("calibrate", help="estimate per-anchor range bias and noise")
    p.add_argument("records", help="CSV with anchor_id, measured_m, truth_m")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("replay", parents=[common], help="re-run an estimator over a logged trace")
    p.add_argument("trace", help="trace CSV written by simulate --trace")
    p.add_argument("--estimator", required=True, choices=sorted(ESTIMATORS))
    p.add_argument("--config", help="scenario JSON supplying layout and filter tuning")
    p.add_argument("--a", type=float, default=None, help="anchor leg length in meters")
    p.add_argument("--out", help="write the replayed trace CSV here")
    p.add_argument("--skip-transient", type=int, default=DEFAULT_SKIP_TRANSIENT)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("preset", parents=[common], help="print a built-in scenario as JSON")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--estimator", choices=sorted(ESTIMATORS), default=None)
    p.add_argument("--out", help="write the scenario JSON here")
    p.set_defaults(func=_cmd_preset)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except (ConfigError, InsufficientDataError, FileNotFoundError) as exc:
        print(f"dualmcl {args.command}: {exc}", file=sys.stderr)
        return 2
    except (_Failure, ValueError) as exc:
        print(f"dualmcl {args.command}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(report, indent=2))
    if not _all_finite(report):
        print(f"dualmcl {args.command}: non-finite result", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
