"""Command-line front end.

Usage::

    predint fit      --config run.json [--out result.json] [--format json|csv]
    predint predict  --config run.json [--seed 7]
    predint coverage --config run.json --format csv

The config is one JSON document.  Common fields: ``family``, ``method``,
``alpha``, ``side``, ``seed``, ``threads``.  ``fit`` and ``predict`` need
``data`` (an inline list, ``{"values": [...], "status": [...]}`` or
``{"path": "x.csv", "column": "x", "status_column": "status"}``); discrete
``predict`` needs ``x``, ``n`` and ``m`` instead.  ``coverage`` needs
``truth`` (``{"family": ..., "params": [...]}``), ``n`` and ``N_sim``, and
accepts ``methods`` (a list) in place of ``method`` plus ``exact: true`` for
enumerated discrete coverage.

Exit status is 0 on success, 2 for configuration or validation errors and
3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .boot import RngPolicy, parametric_bootstrap
from .coverage import (
    CONTINUOUS_METHODS,
    DISCRETE_METHODS,
    CoverageReport,
    MethodConfig,
    estimate_coverage_many,
    exact_discrete_coverage,
)
from .dist import DISCRETE, FAMILIES, Kernel
from .errors import (
    DegenerateSampleError,
    ExcessiveFailureError,
    NonConvergenceError,
    PredintError,
    RootNotBracketedError,
    TruncationError,
)
from .fit import FITTABLE, Sample, fit_ml
from .npar import MEAN_DEVIATION, MEDIAN_DEVIATION, conformal_region, order_stat_interval
from .predict_core import (
    calibration_bootstrap_bound,
    calibration_predictive_cdf,
    direct_bootstrap_cdf,
    plugin_bound,
    plugin_cdf,
)
from .predict_disc import DiscretePredictionProblem, discrete_bounds
from .predict_fid import (
    fiducial_bound,
    fiducial_predictive_cdf,
    gamma_fiducial_draws,
    invgauss_fiducial_draws,
)
from .predict_ls import gpq_predictive_cdf, normal_exact_bound

__all__ = ["main", "run", "ConfigError", "resolve_config"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
TASKS = ("fit", "predict", "coverage")
SIDES = ("upper", "lower", "two-sided")
PREDICT_METHODS = ("plugin", "calibration", "direct_bootstrap", "gpq", "normal_exact",
                   "fiducial", "order_stat", "conformal")
NUMERIC_ERRORS = (NonConvergenceError, ExcessiveFailureError, DegenerateSampleError,
                  RootNotBracketedError, TruncationError)


class ConfigError(Exception):
    """A config problem, tied to the offending field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(key, "required field is missing")
    return cfg[key]


def _number(cfg, key, default=None, integer=False, lo=None, hi=None, strict=True):
    if key not in cfg:
        if default is None:
            raise ConfigError(key, "required field is missing")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    if integer and (not float(v).is_integer()):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(key, "must be finite")
    if lo is not None and (v <= lo if strict else v < lo):
        raise ConfigError(key, f"must be {'>' if strict else '>='} {lo}")
    if hi is not None and (v >= hi if strict else v > hi):
        raise ConfigError(key, f"must be {'<' if strict else '<='} {hi}")
    return int(v) if integer else float(v)


def _choice(cfg, key, options, default=None):
    v = cfg.get(key, default)
    if v is None:
        raise ConfigError(key, "required field is missing")
    if v not in options:
        raise ConfigError(key, f"must be one of {list(options)}, got {v!r}")
    return v


def resolve_config(cfg, task, seed=None):
    """Validate ``cfg`` for ``task`` and fill defaults; the result is itself a valid config."""
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a JSON object")
    out = dict(cfg)
    if "task" in cfg and cfg["task"] != task:
        raise ConfigError("task", f"config is for {cfg['task']!r}, command is {task!r}")
    out["task"] = task
    if seed is not None:
        out["seed"] = seed
    out["seed"] = _number(out, "seed", 0, integer=True, lo=0, strict=False)
    if out["seed"] >= 2**64:
        raise ConfigError("seed", "must fit in 64 bits")
    if "threads" in out:
        out["threads"] = _number(out, "threads", integer=True, lo=0, strict=False)
    if task == "fit":
        out["family"] = _choice(out, "family", FITTABLE)
        _require(out, "data")
    elif task == "predict":
        fam = _choice(out, "family", tuple(FAMILIES))
        if fam in DISCRETE:
            _choice(out, "family", ("binomial", "poisson"))
            out["method"] = _choice(out, "method", DISCRETE_METHODS)
            if fam == "poisson" and out["method"] == "wang":
                raise ConfigError("method", "wang is defined for binomial data only")
            out["x"] = _number(out, "x", integer=True, lo=0, strict=False)
            out["n"] = _number(out, "n", lo=0)
            out["m"] = _number(out, "m", lo=0)
            out["alpha"] = _number(out, "alpha", lo=0.0, hi=0.5)
            out["kp_scan"] = _choice(out, "kp_scan", ("self_consistent", "plugin_y"),
                                     "self_consistent")
            out["B"] = _number(out, "B", 100_000, integer=True, lo=0)
        else:
            out["method"] = _choice(out, "method", PREDICT_METHODS)
            out["alpha"] = _number(out, "alpha", lo=0.0, hi=1.0)
            _require(out, "data")
            out["B"] = _number(out, "B", 5000, integer=True, lo=0)
            if out["method"] == "order_stat":
                out["r"] = _number(out, "r", integer=True, lo=1, strict=False)
                out["s"] = _number(out, "s", integer=True, lo=1, strict=False)
            if out["method"] == "conformal":
                out["measure"] = _choice(out, "measure", ("mean", "median"), "mean")
                out["randomize"] = bool(out.get("randomize", False))
            if out["method"] == "calibration":
                out["u_method"] = _choice(out, "u_method", ("sampled", "integrated"), "sampled")
        out["side"] = _choice(out, "side", SIDES, "upper")
        if "cdf_grid" in out:
            g = out["cdf_grid"]
            if not isinstance(g, dict):
                raise ConfigError("cdf_grid", "expected an object with lower, upper, points")
            out["cdf_grid"] = {"lower": _number(g, "lower"), "upper": _number(g, "upper"),
                               "points": _number(g, "points", 101, integer=True, lo=1)}
            if not out["cdf_grid"]["upper"] > out["cdf_grid"]["lower"]:
                raise ConfigError("cdf_grid.upper", "must exceed cdf_grid.lower")
    else:
        truth = _require(out, "truth")
        if not isinstance(truth, dict) or "family" not in truth or "params" not in truth:
            raise ConfigError("truth", "expected {\"family\": ..., \"params\": [...]}")
        if truth["family"] not in FAMILIES:
            raise ConfigError("truth.family", f"unknown family {truth['family']!r}")
        try:
            Kernel(truth["family"], tuple(truth["params"]))
        except (PredintError, TypeError, ValueError) as exc:
            raise ConfigError("truth.params", str(exc)) from None
        discrete = truth["family"] in DISCRETE
        if "methods" in out:
            methods = out["methods"]
            if not isinstance(methods, list) or not methods:
                raise ConfigError("methods", "expected a nonempty list")
        else:
            methods = [_require(out, "method")]
        allowed = DISCRETE_METHODS if discrete else CONTINUOUS_METHODS
        norm = []
        for k, mth in enumerate(methods):
            if isinstance(mth, str):
                mth = {"name": mth, "params": {}}
            if not isinstance(mth, dict) or mth.get("name") not in allowed:
                raise ConfigError(f"methods[{k}]", f"method must be one of {list(allowed)}")
            norm.append({"name": mth["name"], "params": dict(mth.get("params", {}))})
        out.pop("method", None)
        out["methods"] = norm
        out["n"] = _number(out, "n", integer=not discrete or truth["family"] == "binomial", lo=0)
        out["m"] = _number(out, "m", 1, lo=0)
        out["alpha"] = _number(out, "alpha", lo=0.0, hi=1.0)
        out["side"] = _choice(out, "side", SIDES, "upper")
        out["exact"] = bool(out.get("exact", False))
        if out["exact"] and not discrete:
            raise ConfigError("exact", "exact enumeration needs a binomial or Poisson truth")
        if not out["exact"]:
            out["N_sim"] = _number(out, "N_sim", integer=True, lo=99)
    return out


# ---------------------------------------------------------------------------
# data ingestion
# ---------------------------------------------------------------------------

def _read_csv(path, column=None, status_column=None):
    if not os.path.exists(path):
        raise ConfigError("data.path", f"file not found: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ConfigError("data.path", "file has no rows")

    def numeric(row):
        try:
            [float(c) for c in row]
            return True
        except ValueError:
            return False

    header = None if numeric(rows[0]) else [c.strip() for c in rows[0]]
    body = rows[1:] if header else rows

    def col(name, default_index):
        if name is None:
            return default_index
        if header is None or name not in header:
            raise ConfigError("data.column", f"column {name!r} not found in {path}")
        return header.index(name)

    vi = col(column, 0)
    if status_column is not None:
        si = col(status_column, 1)
    elif header is not None:
        si = header.index("status") if "status" in header else None
    else:
        si = 1 if len(rows[0]) > 1 else None
    values, status = [], []
    for k, r in enumerate(body, start=2 if header else 1):
        try:
            values.append(float(r[vi]))
            if si is not None:
                status.append(int(float(r[si])))
        except (ValueError, IndexError):
            raise ConfigError("data.path", f"line {k}: cannot parse {r!r}") from None
    return values, (status if si is not None else None)


def _load_sample(spec):
    if isinstance(spec, list):
        values, status = spec, None
    elif isinstance(spec, dict) and "path" in spec:
        values, status = _read_csv(spec["path"], spec.get("column"), spec.get("status_column"))
    elif isinstance(spec, dict) and "values" in spec:
        values, status = spec["values"], spec.get("status")
    else:
        raise ConfigError("data", "expected a list, {\"values\": ...} or {\"path\": ...}")
    try:
        values = [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError("data", "values must be numbers") from None
    if not values:
        raise ConfigError("data", "no observations")
    if status is None or all(s == 1 for s in status):
        return Sample(values)
    if len(status) != len(values) or any(s not in (0, 1) for s in status):
        raise ConfigError("data.status", "status must be 0 or 1 for every value")
    events = [v for v, s in zip(values, status) if s == 1]
    censored = [v for v, s in zip(values, status) if s == 0]
    if len(events) < 2:
        raise ConfigError("data.status", "need at least two events")
    if min(censored) < max(events):
        raise ConfigError("data.status",
                          "Type-II censoring requires the censored units to be the largest values")
    return Sample.type2(events, len(values))


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------

def _bound_records(result):
    d = result.to_dict()
    if d.get("side") == "two-sided":
        return [d["lower"], d["upper"]]
    return [d]


def _task_fit(cfg):
    sample = _load_sample(cfg["data"])
    fit = fit_ml(cfg["family"], sample)
    return {"family": fit.family, "estimate": dict(fit.estimate.named), "loglik": fit.loglik,
            "converged": fit.converged, "iterations": fit.iterations,
            "gradient_norm": fit.gradient_norm, "n": sample.n,
            "r": sample.shape.r}, None


def _task_predict(cfg):
    policy = RngPolicy(cfg["seed"])
    threads = cfg.get("threads")
    fam, method, alpha, side = cfg["family"], cfg["method"], cfg["alpha"], cfg["side"]
    if fam in DISCRETE:
        problem = DiscretePredictionProblem(fam, cfg["x"], cfg["n"], cfg["m"], alpha)
        if side == "two-sided":
            b = discrete_bounds(problem.with_alpha(alpha / 2), method, policy,
                                kp_scan=cfg["kp_scan"], B=cfg["B"], threads=threads)
            recs = [{"side": "lower", "level": 1 - alpha / 2, "endpoint": b.lower, "method": method},
                    {"side": "upper", "level": 1 - alpha / 2, "endpoint": b.upper, "method": method}]
        else:
            b = discrete_bounds(problem, method, policy, kp_scan=cfg["kp_scan"], B=cfg["B"],
                                threads=threads)
            recs = [{"side": side, "level": 1 - alpha, "method": method,
                     "endpoint": b.upper if side == "upper" else b.lower}]
        return {"bounds": recs}, None
    sample = _load_sample(cfg["data"])
    cdf = None
    if method == "order_stat":
        iv = order_stat_interval(sample.values, cfg["r"], cfg["s"])
        return {"bounds": [{"side": "two-sided", "lower": iv.lower, "upper": iv.upper,
                            "coverage": iv.coverage, "method": method}]}, None
    if method == "conformal":
        measure = MEAN_DEVIATION if cfg["measure"] == "mean" else MEDIAN_DEVIATION
        reg = conformal_region(sample.values, measure, alpha, cfg["randomize"],
                               policy.generator(3))
        return {"bounds": [{"side": "two-sided", "intervals": [list(iv) for iv in reg.intervals],
                            "u": reg.u, "method": method}]}, None
    if method == "normal_exact":
        result = normal_exact_bound(sample, alpha, side)
        return {"bounds": _bound_records(result)}, None
    if method == "fiducial":
        gen = gamma_fiducial_draws if fam == "gamma" else invgauss_fiducial_draws
        if fam not in ("gamma", "inverse_gaussian"):
            raise ConfigError("method", "fiducial prediction needs gamma or inverse_gaussian")
        draws = gen(sample, cfg["B"], policy.child(2), threads=threads)
        result = fiducial_bound(draws, alpha, side)
        cdf = fiducial_predictive_cdf(draws)
        return {"bounds": _bound_records(result)}, cdf
    if fam not in FITTABLE:
        raise ConfigError("family", f"{method} needs one of {list(FITTABLE)}")
    fit = fit_ml(fam, sample)
    if method == "plugin":
        return {"bounds": _bound_records(plugin_bound(fit, alpha, side))}, plugin_cdf(fit)
    batch = parametric_bootstrap(fit, fit.shape, cfg["B"], policy.child(0), threads=threads)
    if method == "calibration":
        result = calibration_bootstrap_bound(sample, fit, cfg["B"], alpha, side, policy,
                                             cfg["u_method"], batch, threads)
        cdf = calibration_predictive_cdf(fit, batch)
    elif method == "direct_bootstrap":
        cdf = direct_bootstrap_cdf(fit, batch)
        result = cdf.bound(alpha, side, "direct_bootstrap", {"B": batch.B, "failures": batch.failures})
    else:
        if fam not in ("normal", "logistic", "sev"):
            raise ConfigError("method", "gpq needs a location-scale family")
        cdf = gpq_predictive_cdf(fit, batch)
        result = cdf.bound(alpha, side, "gpq_bootstrap", {"B": batch.B, "failures": batch.failures})
    return {"bounds": _bound_records(result)}, cdf


def _task_coverage(cfg):
    truth = Kernel(cfg["truth"]["family"], tuple(cfg["truth"]["params"]))
    methods = [MethodConfig(m["name"], m["params"]) for m in cfg["methods"]]
    if cfg["exact"]:
        rows = []
        for mc in methods:
            c = exact_discrete_coverage(mc, truth, cfg["n"], cfg["m"], cfg["alpha"], cfg["side"],
                                        RngPolicy(cfg["seed"]))
            rows.append({"method": mc.name, "coverage": float(c), "tail_mass": c.tail_mass,
                         "x_max": c.x_max})
        return {"exact": rows}, None
    reports = estimate_coverage_many(methods, truth, cfg["n"], cfg["m"], cfg["alpha"],
                                     cfg["side"], cfg["N_sim"], RngPolicy(cfg["seed"]),
                                     cfg.get("threads"))
    return {"reports": reports}, None


def _cdf_table(cdf, grid):
    y = np.linspace(grid["lower"], grid["upper"], grid["points"])
    return [[float(a), float(b)] for a, b in zip(y, np.atleast_1d(cdf.cdf(y)))]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _g(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _render(task, cfg, result, fmt):
    if fmt == "json":
        payload = dict(result)
        if "reports" in payload:
            payload["reports"] = [r.to_dict() for r in payload["reports"]]
        payload["config"] = cfg
        return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if task == "coverage" and "reports" in result:
        buf.write(CoverageReport.csv_header() + "\n")
        for r in result["reports"]:
            buf.write(r.to_csv_row() + "\n")
    elif task == "coverage":
        w.writerow(["method", "coverage", "tail_mass", "x_max"])
        for r in result["exact"]:
            w.writerow([r["method"], _g(r["coverage"]), _g(r["tail_mass"]), r["x_max"]])
    elif task == "fit":
        w.writerow(["family", "parameter", "value"])
        for k, v in result["estimate"].items():
            w.writerow([result["family"], k, _g(float(v))])
        w.writerow([result["family"], "loglik", _g(result["loglik"])])
    else:
        w.writerow(["side", "level", "endpoint", "method"])
        for b in result["bounds"]:
            if "intervals" in b:
                for lo, hi in b["intervals"]:
                    w.writerow(["two-sided", "", f"{_g(float(lo))};{_g(float(hi))}", b["method"]])
            elif "lower" in b:
                w.writerow(["two-sided", _g(b["coverage"]),
                            f"{_g(b['lower'])};{_g(b['upper'])}", b["method"]])
            else:
                w.writerow([b["side"], _g(float(b["level"])), _g(float(b["endpoint"])),
                            b["method"]])
        if "cdf" in result:
            w.writerow([])
            w.writerow(["y", "F_p"])
            for y, f in result["cdf"]:
                w.writerow([_g(y), _g(f)])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def run(task, cfg, seed=None, fmt="json"):
    """Validate and execute one task; returns ``(exit_code, text, message)``."""
    try:
        cfg = resolve_config(cfg, task, seed)
        handler = {"fit": _task_fit, "predict": _task_predict, "coverage": _task_coverage}[task]
        result, cdf = handler(cfg)
        if cdf is not None and "cdf_grid" in cfg:
            result["cdf"] = _cdf_table(cdf, cfg["cdf_grid"])
    except ConfigError as exc:
        return EXIT_CONFIG, "", f"config error: {exc}"
    except NUMERIC_ERRORS as exc:
        method = cfg.get("method") or [m["name"] for m in cfg.get("methods", [])]
        return EXIT_NUMERIC, "", f"numerical failure in {task} ({method}): {exc}"
    except PredintError as exc:
        return EXIT_CONFIG, "", f"validation error: {exc}"
    return EXIT_OK, _render(task, cfg, result, fmt), ""


def _parser():
    p = argparse.ArgumentParser(prog="predint", description="Prediction bounds and coverage studies.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("task", choices=TASKS)
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        print(f"config error: config: file not found: {args.config}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"config error: config: line {exc.lineno} column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("config error: seed: must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    code, text, message = run(args.task, cfg, args.seed, args.format)
    if code:
        print(message, file=sys.stderr)
        return code
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
