import csv
import io
import json
import subprocess
import sys

import pytest

from predint.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, ConfigError, main, resolve_config, run


@pytest.fixture
def invoke(tmp_path, capsys):
    def _invoke(task, cfg, *extra):
        path = tmp_path / "cfg.json"
        path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
        code = main([task, "--config", str(path), *extra])
        out, err = capsys.readouterr()
        return code, out, err
    return _invoke


def _csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_plugin_symmetry_example(invoke):
    cfg = {"family": "normal", "method": "plugin", "alpha": 0.5, "side": "upper", "data": [1, 2, 3]}
    code, out, _ = invoke("predict", cfg)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["bounds"][0]["endpoint"] == 2.0
    assert doc["config"]["side"] == "upper" and doc["config"]["seed"] == 0


def test_missing_alpha_names_the_field(invoke):
    code, out, err = invoke("predict", {"family": "normal", "method": "plugin", "data": [1, 2, 3]})
    assert code == EXIT_CONFIG and out == ""
    assert "alpha" in err and "missing" in err


def test_malformed_json_reports_position(invoke):
    code, _, err = invoke("predict", '{"family": "normal",\n "alpha": }')
    assert code == EXIT_CONFIG
    assert "line 2" in err


@pytest.mark.parametrize("cfg,field", [
    ({"family": "normal", "method": "plugin", "alpha": 1.5, "data": [1, 2]}, "alpha"),
    ({"family": "weibull", "method": "plugin", "alpha": 0.1, "data": [1, 2]}, "family"),
    ({"family": "normal", "method": "magic", "alpha": 0.1, "data": [1, 2]}, "method"),
    ({"family": "normal", "method": "plugin", "alpha": 0.1, "data": {"path": "/nonexistent.csv"}},
     "data.path"),
    ({"family": "binomial", "method": "kp", "alpha": 0.1, "x": 3, "n": 10}, "m"),
    ({"family": "poisson", "method": "wang", "alpha": 0.1, "x": 3, "n": 1, "m": 1}, "method"),
])
def test_config_errors_name_fields(invoke, cfg, field):
    code, _, err = invoke("predict", cfg)
    assert code == EXIT_CONFIG
    assert f"{field}:" in err


def test_numeric_failure_exit_code(invoke):
    code, _, err = invoke("fit", {"family": "gamma", "data": [2, 2, 2]})
    assert code == EXIT_NUMERIC
    assert "fit" in err


def test_fit_reads_censored_csv(invoke, tmp_path):
    data = tmp_path / "life.csv"
    data.write_text("hours,status\n1.2,1\n0.7,1\n2.5,1\n2.5,0\n2.5,0\n")
    code, out, _ = invoke("fit", {"family": "sev", "data": {"path": str(data), "column": "hours"}})
    assert code == EXIT_OK
    doc = json.loads(out)
    assert (doc["n"], doc["r"]) == (5, 3)
    assert doc["converged"]


def test_inconsistent_censoring_is_rejected(invoke, tmp_path):
    data = tmp_path / "bad.csv"
    data.write_text("1.0,1\n0.5,0\n2.0,1\n3.0,1\n")
    code, _, err = invoke("fit", {"family": "normal", "data": {"path": str(data)}})
    assert code == EXIT_CONFIG and "data.status" in err


def test_headerless_single_column(invoke, tmp_path):
    data = tmp_path / "x.csv"
    data.write_text("1\n2\n4\n")
    code, out, _ = invoke("fit", {"family": "normal", "data": {"path": str(data)}}, "--format", "csv")
    rows = _csv_rows(out)
    assert code == EXIT_OK and rows[0] == ["family", "parameter", "value"]
    assert float(rows[1][2]) == pytest.approx(7 / 3)


def test_predict_cdf_table(invoke):
    cfg = {"family": "logistic", "method": "direct_bootstrap", "alpha": 0.1, "B": 300,
           "data": [0.3, 1.1, 2.0, 2.2, 3.9], "cdf_grid": {"lower": -5, "upper": 8, "points": 27}}
    code, out, _ = invoke("predict", cfg, "--format", "csv")
    assert code == EXIT_OK
    rows = _csv_rows(out)
    start = rows.index(["y", "F_p"])
    table = [(float(a), float(b)) for a, b in rows[start + 1:]]
    assert len(table) == 27
    assert all(f1 <= f2 for (_, f1), (_, f2) in zip(table, table[1:]))


def test_seed_override_and_out_file(invoke, tmp_path):
    cfg = {"family": "normal", "method": "calibration", "alpha": 0.1, "B": 400, "seed": 1,
           "data": [4.1, 5.0, 6.3, 5.5, 4.8]}
    out_file = tmp_path / "res.json"
    code, stdout, _ = invoke("predict", cfg, "--seed", "7", "--out", str(out_file))
    assert code == EXIT_OK and stdout == ""
    doc = json.loads(out_file.read_text())
    assert doc["config"]["seed"] == 7


@pytest.mark.parametrize("cfg", [
    {"family": "gamma", "method": "calibration", "u_method": "integrated", "alpha": 0.05, "B": 300,
     "side": "two-sided", "data": [1.3, 0.4, 2.2, 0.9, 3.1, 1.7]},
    {"family": "inverse_gaussian", "method": "fiducial", "alpha": 0.1, "B": 500,
     "data": [1.3, 0.4, 2.2, 0.9, 3.1, 1.7]},
    {"family": "binomial", "method": "fiducial", "alpha": 0.05, "x": 4, "n": 12, "m": 6, "B": 2000,
     "side": "two-sided"},
])
def test_predict_round_trip_from_embedded_config(invoke, cfg):
    code, out, _ = invoke("predict", cfg)
    assert code == EXIT_OK
    first = json.loads(out)
    code, out2, _ = invoke("predict", first["config"])
    second = json.loads(out2)
    assert first == second


def test_coverage_csv_is_deterministic(invoke, monkeypatch):
    cfg = {"truth": {"family": "normal", "params": [0, 1]}, "n": 5, "alpha": 0.1, "N_sim": 300,
           "seed": 3, "methods": ["plugin", {"name": "gpq", "params": {"B": 200}}]}
    monkeypatch.setenv("PREDINT_THREADS", "1")
    code, one, _ = invoke("coverage", dict(cfg, threads=1), "--format", "csv")
    assert code == EXIT_OK
    code, many, _ = invoke("coverage", dict(cfg, threads=4), "--format", "csv")
    a, b = _csv_rows(one), _csv_rows(many)
    assert a[0][0] == "timestamp" and len(a) == 3
    assert [r[1:] for r in a] == [r[1:] for r in b]


def test_coverage_round_trip(invoke):
    cfg = {"truth": {"family": "poisson", "params": [1.5]}, "n": 2, "m": 1, "alpha": 0.1,
           "N_sim": 200, "method": "jeffreys", "side": "two-sided"}
    code, out, _ = invoke("coverage", cfg)
    first = json.loads(out)
    code, out2, _ = invoke("coverage", first["config"])
    second = json.loads(out2)
    strip = ("timestamp", "seconds")
    assert [{k: v for k, v in r.items() if k not in strip} for r in first["reports"]] == \
           [{k: v for k, v in r.items() if k not in strip} for r in second["reports"]]


def test_exact_coverage_output(invoke):
    cfg = {"truth": {"family": "binomial", "params": [1, 0.3]}, "n": 20, "m": 20, "alpha": 0.05,
           "method": "conservative", "exact": True}
    code, out, _ = invoke("coverage", cfg, "--format", "csv")
    rows = _csv_rows(out)
    assert code == EXIT_OK and rows[0] == ["method", "coverage", "tail_mass", "x_max"]
    assert float(rows[1][1]) >= 0.95


def test_conformal_and_order_stat_predict(invoke):
    base = {"family": "normal", "alpha": 0.2, "data": [1.0, 4.0, 2.0, 8.0, 5.0]}
    code, out, _ = invoke("predict", dict(base, method="order_stat", r=1, s=5))
    b = json.loads(out)["bounds"][0]
    assert (b["lower"], b["upper"], b["coverage"]) == (1.0, 8.0, pytest.approx(4 / 6))
    code, out, _ = invoke("predict", dict(base, method="conformal", measure="median"))
    assert code == EXIT_OK and json.loads(out)["bounds"][0]["intervals"]


def test_resolve_config_is_idempotent():
    cfg = {"family": "binomial", "method": "kp", "alpha": 0.1, "x": 3, "n": 10, "m": 4}
    once = resolve_config(cfg, "predict")
    assert resolve_config(once, "predict") == once
    with pytest.raises(ConfigError):
        resolve_config(once, "coverage")


def test_run_reports_task_mismatch():
    code, _, msg = run("fit", {"task": "predict", "family": "normal", "data": [1, 2]})
    assert code == EXIT_CONFIG and "task" in msg


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "predint.cli", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip().startswith("predint ")
