import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from dualmcl.bench import SweepSpec, sweep_spec_to_json
from dualmcl.cli import main
from dualmcl.io import TRACE_COLUMNS, read_trace, to_dict, write_scenario
from dualmcl.sensing import CalibrationRecord
from dualmcl.sim import case1_config, static_config


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 else None), out.err


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "case1.json"
    write_scenario(case1_config(n_steps=40), path)
    return path


def test_simulate_writes_trace(capsys, scenario, tmp_path):
    trace_path = tmp_path / "trace.csv"
    code, report, _ = run(capsys, "simulate", scenario, "--trace", trace_path)
    assert code == 0
    assert report["steps"] == 40 and report["skip_transient"] == 10
    log = read_trace(trace_path)
    err = log["err"]
    assert report["rmse"] == pytest.approx(np.sqrt(np.mean(err[10:] ** 2)), rel=1e-12)
    assert report["rmse_whole_run"] == pytest.approx(np.sqrt(np.mean(err**2)), rel=1e-12)


def test_simulate_overrides(capsys, scenario):
    code, report, _ = run(capsys, "simulate", scenario, "--seed", 9, "--steps", 15, "--skip-transient", 0)
    assert code == 0
    assert (report["seed"], report["steps"], report["skip_transient"]) == (9, 15, 0)


def test_simulate_same_seed_same_report(capsys, scenario):
    assert run(capsys, "simulate", scenario)[1] == run(capsys, "simulate", scenario)[1]


@pytest.mark.parametrize("mutate, needle", [
    (lambda d: d.pop("seed"), "seed"),
    (lambda d: d.update(foo=1), "foo"),
    (lambda d: d.update(n_steps=0), "n_steps"),
])
def test_simulate_bad_config_exit_2(capsys, tmp_path, mutate, needle):
    data = to_dict(case1_config())
    mutate(data)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "simulate", path)
    assert code == 2
    assert needle in err


def test_missing_file_exit_2(capsys, tmp_path):
    assert run(capsys, "simulate", tmp_path / "nope.json")[0] == 2


def test_skip_longer_than_run_exit_1(capsys, scenario):
    assert run(capsys, "simulate", scenario, "--steps", 5)[0] == 1


def test_sweep(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(sweep_spec_to_json(SweepSpec(static_config(n_steps=20), "m", [50, 100], repeats=2)))
    out = tmp_path / "sweep.csv"
    code, report, _ = run(capsys, "sweep", spec, "--out", out, "--jobs", 2)
    assert code == 0
    assert [row["value"] for row in report["summary"]] == [50, 100]
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    for row in report["summary"]:
        raw = np.array([float(r["rmse"]) for r in rows if int(r["value"]) == row["value"]])
        assert abs(raw.mean() - row["mean"]) < 1e-9 and abs(raw.std(ddof=1) - row["std"]) < 1e-9


def test_sweep_bad_spec_exit_2(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"axis": "m", "values": [50]}))
    code, _, err = run(capsys, "sweep", spec)
    assert code == 2 and "base" in err


def test_calibrate(capsys, tmp_path):
    rng = np.random.default_rng(0)
    truth = rng.uniform(1, 5, size=200)
    pairs = {i: list(zip(truth + 0.1 * i + rng.normal(0, 0.05, 200), truth)) for i in (1, 2, 3)}
    path = tmp_path / "records.csv"
    CalibrationRecord(pairs).to_csv(path)
    code, report, _ = run(capsys, "calibrate", path)
    assert code == 0
    np.testing.assert_allclose(report["bias"], [0.1, 0.2, 0.3], atol=0.02)
    np.testing.assert_allclose(report["sigma_dist"], [0.05] * 3, atol=0.01)


def test_calibrate_malformed_exit_2(capsys, tmp_path):
    path = tmp_path / "records.csv"
    path.write_text("anchor,measured\n1,2\n")
    assert run(capsys, "calibrate", path)[0] == 2
    path.write_text("anchor_id,measured_m,truth_m\n1,2.0,2.0\n")
    assert run(capsys, "calibrate", path)[0] == 2


@pytest.mark.parametrize("estimator", ["dual_mcl", "standard_pf", "ekf"])
def test_replay(capsys, scenario, tmp_path, estimator):
    trace_path = tmp_path / "trace.csv"
    assert run(capsys, "simulate", scenario, "--trace", trace_path)[0] == 0
    out = tmp_path / "replayed.csv"
    code, report, _ = run(capsys, "replay", trace_path, "--estimator", estimator, "--config", scenario, "--out", out)
    assert code == 0
    assert report["steps"] == 40 and report["Ts"] == pytest.approx(0.1)
    replayed = read_trace(out)
    original = read_trace(trace_path)
    for name in ("d1", "d2", "d3", "r_x", "r_y"):
        np.testing.assert_array_equal(replayed[name], original[name])
    assert report["rmse"] == pytest.approx(np.sqrt(np.mean(replayed["err"][10:] ** 2)), rel=1e-12)


def test_replay_without_config(capsys, scenario, tmp_path):
    trace_path = tmp_path / "trace.csv"
    run(capsys, "simulate", scenario, "--trace", trace_path)
    code, report, _ = run(capsys, "replay", trace_path, "--estimator", "dual_mcl", "--a", 0.44)
    assert code == 0 and np.isfinite(report["rmse"])


def test_replay_non_finite_ranges_exit_1(capsys, scenario, tmp_path):
    trace_path = tmp_path / "trace.csv"
    run(capsys, "simulate", scenario, "--trace", trace_path)
    rows = trace_path.read_text().splitlines()
    cells = rows[5].split(",")
    cells[TRACE_COLUMNS.index("d2")] = "nan"
    rows[5] = ",".join(cells)
    trace_path.write_text("\n".join(rows) + "\n")
    assert run(capsys, "replay", trace_path, "--estimator", "ekf")[0] == 1


@pytest.mark.parametrize("name", ["agile", "case1", "formation", "static"])
def test_preset_round_trips_through_simulate(capsys, tmp_path, name):
    path = tmp_path / f"{name}.json"
    assert run(capsys, "preset", name, "--out", path, "--steps", 20)[0] == 0
    code, report, _ = run(capsys, "simulate", path)
    assert code == 0 and report["steps"] == 20


def test_preset_stdout_is_scenario(capsys):
    code, report, _ = run(capsys, "preset", "case1", "--estimator", "ekf")
    assert code == 0
    assert report["filter"]["estimator"] == "ekf"


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["replay", "x.csv", "--estimator", "ukf"])
    assert info.value.code == 2


def test_console_entry_point(scenario):
    proc = subprocess.run(
        [sys.executable, "-m", "dualmcl.cli", "simulate", str(scenario), "--steps", "12"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["steps"] == 12
