"""Coverage probability of prediction methods: Monte Carlo and exact enumeration.

Monte Carlo replicate ``i`` draws its data from the stream ``(seed, 0, i)``,
its continuous predictand from ``(seed, 2, i)`` and gives the method the
independent streams under ``(seed, 1, i)``.  Replicates are split into chunks evaluated on a thread
pool; the estimate is a sum of indicators, so results do not depend on the
thread count.  Several methods can share one set of replicates, which makes
coverage differences between methods far less noisy than the coverages
themselves.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .boot import as_policy, parametric_bootstrap, run_blocks
from .dist import DISCRETE, LOCATION_SCALE, Kernel, family_cdf, family_draw, family_isf, family_sf
from .errors import (
    DegenerateSampleError,
    ExcessiveFailureError,
    InvalidParameterError,
    NonConvergenceError,
    RootNotBracketedError,
    TruncationError,
    UnsupportedFamilyError,
)
from .fit import Sample, fit_ml
from .npar import MEAN_DEVIATION, MEDIAN_DEVIATION, conformal_region, order_stat_interval
from .predict_core import (
    bounds_from_quantile,
    calibration_bootstrap_bound,
    direct_bootstrap_bound,
    plugin_bound,
)
from .predict_disc import DiscretePredictionProblem, discrete_interval
from .predict_fid import fiducial_bound, gamma_fiducial_draws, invgauss_fiducial_draws
from .predict_ls import gpq_bootstrap_bound, normal_exact_bound

__all__ = [
    "CONTINUOUS_METHODS",
    "DISCRETE_METHODS",
    "MAX_FAILURE_FRACTION",
    "MethodConfig",
    "CoverageReport",
    "ExactCoverage",
    "estimate_coverage",
    "estimate_coverage_many",
    "exact_discrete_coverage",
]

MAX_FAILURE_FRACTION = 0.01
CHUNK = 128
DEFAULT_B = 2000
TRUNCATION_TAIL = 1e-12
CONTINUOUS_METHODS = ("oracle", "plugin", "calibration", "direct_bootstrap", "gpq",
                      "normal_exact", "fiducial", "order_stat", "conformal")
DISCRETE_METHODS = ("conservative", "nelson", "kp", "wang", "jeffreys", "fiducial", "hinkley")
_FAILURES = (DegenerateSampleError, NonConvergenceError, ExcessiveFailureError,
             RootNotBracketedError)


@dataclass(frozen=True)
class MethodConfig:
    """A method name plus its options.

    ``params`` keys by method: ``B`` (bootstrap and fiducial draw count),
    ``u_method`` (calibration), ``family`` (fitted family, default the
    truth's), ``r`` (Type-II event count of the simulated samples),
    ``r``/``s`` (order_stat), ``measure``/``randomize`` (conformal),
    ``kp_scan`` and ``B`` (discrete).  ``func`` replaces the built-in method:
    for continuous truths it is called as ``func(sample, alpha, side, rng)``
    and must return an object with ``contains``; for discrete truths it is
    called as ``func(problem, side)`` and must return ``(lo, hi)``.
    """

    name: str
    params: dict = field(default_factory=dict)
    func: object = field(default=None, compare=False)

    def to_dict(self):
        return {"name": self.name, "params": dict(self.params)}


def _as_method(m):
    if isinstance(m, MethodConfig):
        return m
    if isinstance(m, str):
        return MethodConfig(m)
    if isinstance(m, dict):
        return MethodConfig(m["name"], dict(m.get("params", {})))
    raise InvalidParameterError(f"cannot interpret method {m!r}")


@dataclass(frozen=True)
class CoverageReport:
    """Monte Carlo coverage estimate for one method at one configuration."""

    method: str
    truth: Kernel
    n: int
    m: float
    alpha: float
    side: str
    n_sim: int
    coverage: float
    se: float
    failures: int
    seconds: float = field(compare=False)
    seed: int = 0
    config: dict = field(default_factory=dict, compare=False)
    timestamp: str = field(default="", compare=False)

    # wall-clock seconds stay out of CSV rows so reruns differ only in the timestamp
    FIELDS = ("timestamp", "method", "family", "truth_params", "n", "m", "alpha", "side",
              "n_sim", "coverage", "se", "failures", "seed")

    def numeric_key(self):
        """Every field except the wall-clock ones."""
        return (self.method, self.truth.family, tuple(self.truth.params), self.n, self.m,
                self.alpha, self.side, self.n_sim, self.coverage, self.se, self.failures,
                self.seed)

    def to_dict(self):
        return {"timestamp": self.timestamp, "method": self.method, "family": self.truth.family,
                "truth_params": [float(v) for v in self.truth.params], "n": self.n, "m": self.m,
                "alpha": self.alpha, "side": self.side, "n_sim": self.n_sim,
                "coverage": self.coverage, "se": self.se, "failures": self.failures,
                "seconds": self.seconds, "seed": self.seed, "config": self.config}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def csv_header(cls):
        return ",".join(cls.FIELDS)

    def to_csv_row(self):
        """One CSV line; reals carry 17 significant digits."""
        def g(v):
            return format(float(v), ".17g")

        d = self.to_dict()
        d["truth_params"] = ";".join(g(v) for v in d["truth_params"])
        for k in ("m", "alpha", "coverage", "se"):
            d[k] = g(d[k])
        buf = io.StringIO()
        csv.writer(buf, lineterminator="").writerow([d[k] for k in self.FIELDS])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# continuous methods
# ---------------------------------------------------------------------------

class _Replicate:
    """Per-replicate cache so methods sharing a replicate share the fit and bootstrap."""

    def __init__(self, sample, family, rng):
        self.sample = sample
        self.family = family
        self.rng = rng
        self._fit = None
        self._batches = {}

    @property
    def fit(self):
        if self._fit is None:
            self._fit = fit_ml(self.family, self.sample)
        return self._fit

    def batch(self, B):
        if B not in self._batches:
            self._batches[B] = parametric_bootstrap(self.fit, self.fit.shape, B, self.rng.child(0),
                                                    threads=1)
        return self._batches[B]


def _continuous_predictor(cfg, rep, truth, alpha, side):
    p = cfg.params
    name = cfg.name
    B = int(p.get("B", DEFAULT_B))
    if cfg.func is not None:
        return cfg.func(rep.sample, alpha, side, rep.rng)
    if name == "oracle":
        return bounds_from_quantile(lambda q, s: (float(truth.quantile(q)), None), alpha, side,
                                    "oracle")
    if name == "plugin":
        return plugin_bound(rep.fit, alpha, side)
    if name == "calibration":
        return calibration_bootstrap_bound(rep.sample, rep.fit, B, alpha, side, rep.rng,
                                           p.get("u_method", "sampled"), rep.batch(B), threads=1)
    if name == "direct_bootstrap":
        return direct_bootstrap_bound(rep.fit, B, alpha, side, rep.rng, rep.batch(B), threads=1)
    if name == "gpq":
        return gpq_bootstrap_bound(rep.fit, B, alpha, side, rep.rng, rep.batch(B), threads=1)
    if name == "normal_exact":
        return normal_exact_bound(rep.sample, alpha, side)
    if name == "fiducial":
        if rep.family == "gamma":
            draws = gamma_fiducial_draws(rep.sample, B, rep.rng.child(2), threads=1)
        elif rep.family == "inverse_gaussian":
            draws = invgauss_fiducial_draws(rep.sample, B, rep.rng.child(2), threads=1)
        else:
            raise UnsupportedFamilyError("fiducial draws exist for gamma and inverse_gaussian")
        return fiducial_bound(draws, alpha, side)
    if name == "order_stat":
        return order_stat_interval(rep.sample.values, int(p["r"]), int(p["s"]))
    if name == "conformal":
        measure = {"mean": MEAN_DEVIATION, "median": MEDIAN_DEVIATION}[p.get("measure", "mean")]
        return conformal_region(rep.sample.values, measure, alpha, bool(p.get("randomize", False)),
                                rep.rng.generator(3))
    raise InvalidParameterError(f"unknown continuous method {name!r}")


def _validate_continuous(cfg, truth, side):
    if cfg.func is None and cfg.name not in CONTINUOUS_METHODS:
        raise InvalidParameterError(f"unknown method {cfg.name!r}; choose from {CONTINUOUS_METHODS}")
    if cfg.name in ("order_stat", "conformal") and side != "two-sided":
        raise InvalidParameterError(f"{cfg.name} gives two-sided regions only")
    fam = cfg.params.get("family", truth.family)
    if "r" in cfg.params and cfg.name != "order_stat" and fam not in LOCATION_SCALE:
        raise UnsupportedFamilyError("censored samples need a location-scale family")


def _draw_sample(truth, gen, n, r):
    x = family_draw(truth.family, gen, n, *truth.params)
    if r is None or r >= n:
        return Sample(x)
    x = np.sort(x)
    x[r:] = x[r - 1]
    return Sample(x, r)


# ---------------------------------------------------------------------------
# discrete methods
# ---------------------------------------------------------------------------

def _discrete_kind(truth):
    if truth.family == "binomial":
        return "binomial", float(truth.params[1])
    if truth.family == "poisson":
        return "poisson", float(truth.params[0])
    raise UnsupportedFamilyError(f"discrete coverage needs a binomial or Poisson truth, got {truth.family}")


def _discrete_bounds(cfg, problem, side, rng):
    if cfg.func is not None:
        return cfg.func(problem, side)
    kw = {k: cfg.params[k] for k in ("kp_scan", "B") if k in cfg.params}
    return discrete_interval(problem, cfg.name, side, rng, threads=1, **kw)


def _draw_counts(kind, rate, n, m, gen):
    if kind == "binomial":
        return int(gen.binomial(int(n), rate)), int(gen.binomial(int(m), rate))
    return int(gen.poisson(n * rate)), int(gen.poisson(m * rate))


# ---------------------------------------------------------------------------
# Monte Carlo driver
# ---------------------------------------------------------------------------

def estimate_coverage_many(methods, truth, n, m=1, alpha=0.05, side="upper", n_sim=10_000,
                           rng=0, threads=None):
    """Coverage of several methods on one shared set of replicates.

    Parameters
    ----------
    methods : sequence of MethodConfig, str or dict
    truth : Kernel
        Data-generating model.  Binomial truths use their success
        probability with ``n`` and ``m`` trials; Poisson truths use their
        mean as the rate per unit exposure.
    n : int
        Data sample size (binomial trials or Poisson exposure for discrete truths).
    m : int or float
        Predictand size for discrete truths; ignored otherwise.
    alpha : float
    side : {"upper", "lower", "two-sided"}
    n_sim : int
        Replicates, at least 100.
    rng : RngPolicy or int
    threads : int, optional

    Returns
    -------
    list of CoverageReport

    Raises
    ------
    ExcessiveFailureError
        A method failed on more than 1% of replicates.
    """
    methods = [_as_method(mm) for mm in methods]
    if not isinstance(truth, Kernel):
        raise InvalidParameterError("truth must be a Kernel")
    n_sim = int(n_sim)
    if n_sim < 100:
        raise InvalidParameterError("n_sim must be at least 100")
    if side not in ("upper", "lower", "two-sided"):
        raise InvalidParameterError(f"unknown side {side!r}")
    alpha = float(alpha)
    policy = as_policy(rng)
    discrete = truth.family in DISCRETE
    if discrete:
        kind, rate = _discrete_kind(truth)
        for cfg in methods:
            if cfg.func is None and cfg.name not in DISCRETE_METHODS:
                raise InvalidParameterError(f"unknown discrete method {cfg.name!r}")
        DiscretePredictionProblem(kind, 0, n, m, alpha)  # validate sizes up front
    else:
        for cfg in methods:
            _validate_continuous(cfg, truth, side)
    k = len(methods)
    start = time.perf_counter()

    def chunk(c):
        hits = np.zeros(k, dtype=np.int64)
        fails = np.zeros(k, dtype=np.int64)
        for i in range(c * CHUNK, min((c + 1) * CHUNK, n_sim)):
            gen = policy.generator(0, i)
            method_rng = policy.child(1, i)
            if discrete:
                x, y = _draw_counts(kind, rate, n, m, gen)
                problem = DiscretePredictionProblem(kind, x, n, m, alpha)
                for j, cfg in enumerate(methods):
                    try:
                        lo, hi = _discrete_bounds(cfg, problem, side, method_rng)
                    except _FAILURES:
                        fails[j] += 1
                        continue
                    hits[j] += lo <= y <= hi
                continue
            reps = {}
            y = None
            for j, cfg in enumerate(methods):
                r = cfg.params.get("r") if cfg.name != "order_stat" else None
                fam = cfg.params.get("family", truth.family)
                key = (fam, r)
                if key not in reps:
                    # every method sees the same data stream; censoring is applied afterwards
                    sample = _draw_sample(truth, policy.generator(0, i), n, r)
                    reps[key] = _Replicate(sample, fam, method_rng)
                if y is None:
                    y = float(family_draw(truth.family, policy.generator(2, i), 1, *truth.params)[0])
                try:
                    pred = _continuous_predictor(cfg, reps[key], truth, alpha, side)
                except _FAILURES:
                    fails[j] += 1
                    continue
                hits[j] += bool(pred.contains(y))
        return hits, fails

    parts = run_blocks(chunk, math.ceil(n_sim / CHUNK), threads)
    hits = sum(p[0] for p in parts)
    fails = sum(p[1] for p in parts)
    seconds = time.perf_counter() - start
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    reports = []
    for j, cfg in enumerate(methods):
        if fails[j] > MAX_FAILURE_FRACTION * n_sim:
            raise ExcessiveFailureError(
                f"method {cfg.name!r} failed on {int(fails[j])} of {n_sim} replicates",
                failures=int(fails[j]), total=n_sim)
        used = n_sim - int(fails[j])
        cov = float(hits[j]) / used
        config = {"method": cfg.to_dict(), "truth": truth.to_dict(), "n": n, "m": m,
                  "alpha": alpha, "side": side, "n_sim": n_sim,
                  "seed": policy.master_seed, "path": list(policy.path)}
        reports.append(CoverageReport(cfg.name, truth, n, m, alpha, side, n_sim, cov,
                                      math.sqrt(cov * (1.0 - cov) / used), int(fails[j]),
                                      seconds, policy.master_seed, config, stamp))
    return reports


def estimate_coverage(method, truth, n, m=1, alpha=0.05, side="upper", n_sim=10_000, rng=0,
                      threads=None):
    """Monte Carlo coverage of one method; see :func:`estimate_coverage_many`."""
    return estimate_coverage_many([method], truth, n, m, alpha, side, n_sim, rng, threads)[0]


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

class ExactCoverage(float):
    """Exact coverage as a float, with the neglected data tail mass attached."""

    def __new__(cls, value, tail_mass=0.0, x_max=0):
        obj = super().__new__(cls, value)
        obj.tail_mass = float(tail_mass)
        obj.x_max = int(x_max)
        return obj


def exact_discrete_coverage(method, truth, n, m, alpha=0.05, side="upper", rng=0,
                            on_degenerate="raise", max_x=1_000_000):
    """``sum_x P(X = x) P(lo(x) <= Y <= hi(x))`` by enumeration over the data count.

    Poisson data counts are truncated at the smallest ``x_max`` with
    ``P(X > x_max) < 1e-12``.  ``on_degenerate`` decides what a
    degenerate-estimate error at some ``x`` does: ``raise`` it, or count the
    outcome as a ``miss``.  Fiducial methods reuse the seed ``rng`` for every
    ``x``.

    Returns
    -------
    ExactCoverage

    Raises
    ------
    TruncationError
        The Poisson tail cannot be pushed below the tolerance within ``max_x``.
    """
    cfg = _as_method(method)
    kind, rate = _discrete_kind(truth)
    if on_degenerate not in ("raise", "miss"):
        raise InvalidParameterError("on_degenerate must be 'raise' or 'miss'")
    DiscretePredictionProblem(kind, 0, n, m, alpha)
    if kind == "binomial":
        x_max = int(n)
        xs = np.arange(x_max + 1)
        px = np.diff(np.concatenate([[0.0], family_cdf("binomial", xs, int(n), rate)]))
        tail = 0.0
    else:
        mean_x = n * rate
        x_max = int(family_isf("poisson", TRUNCATION_TAIL, mean_x))
        tail = float(family_sf("poisson", x_max, mean_x))
        while tail >= TRUNCATION_TAIL and x_max < max_x:
            x_max += 1
            tail = float(family_sf("poisson", x_max, mean_x))
        if tail >= TRUNCATION_TAIL or x_max > max_x:
            raise TruncationError(f"Poisson tail {tail:.3g} not below {TRUNCATION_TAIL} by x={max_x}")
        xs = np.arange(x_max + 1)
        px = np.diff(np.concatenate([[0.0], family_cdf("poisson", xs, mean_x)]))
    total = 0.0
    for x, w in zip(xs, px):
        problem = DiscretePredictionProblem(kind, int(x), n, m, alpha)
        try:
            lo, hi = _discrete_bounds(cfg, problem, side, rng)
        except DegenerateSampleError:
            if on_degenerate == "raise":
                raise
            continue
        total += w * _prob_between(kind, rate, m, lo, hi)
    return ExactCoverage(min(total, 1.0), tail, x_max)


def _prob_between(kind, rate, m, lo, hi):
    if kind == "binomial":
        params = (int(m), rate)
        fam = "binomial"
    else:
        params = (m * rate,)
        fam = "poisson"
    upper = 1.0 if math.isinf(hi) else float(family_cdf(fam, hi, *params))
    below = float(family_cdf(fam, lo - 1, *params)) if lo > 0 else 0.0
    return upper - below
