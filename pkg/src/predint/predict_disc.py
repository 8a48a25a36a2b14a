"""Prediction bounds for a binomial or Poisson count from an observed count.

The data ``X`` and predictand ``Y`` share one unknown parameter:
``X ~ Binom(n, p), Y ~ Binom(m, p)`` or ``X ~ Poi(n lam), Y ~ Poi(m lam)``.
Every method returns the one-sided ``1 - alpha`` lower and upper bounds;
an equal-tailed two-sided interval at level ``1 - alpha`` combines the two
one-sided bounds at ``alpha / 2`` (see :func:`discrete_interval`).

Methods
-------
conservative
    Inverts the parameter-free conditional law of ``X`` given ``X + Y``
    (hypergeometric for binomial, binomial for Poisson).
nelson, kp, wang
    Integer scans of the normal approximate pivot
    ``(Y - m X / n) / sd`` with the unknown parameter replaced by
    ``X / n`` (nelson), ``(X + Y) / (n + m)`` (kp) or a Wilson-type
    shrinkage (wang, binomial only).
jeffreys
    Quantiles of the Jeffreys-prior posterior predictive
    (beta-binomial or negative binomial).
fiducial
    Monte Carlo mixture of the predictand's law over fiducial parameter draws.
hinkley
    Normalized conditional predictive likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .boot import BLOCK, as_policy, run_blocks
from .dist import family_cdf, family_quantile
from .errors import DegenerateSampleError, InvalidParameterError, InvalidProbabilityError

__all__ = [
    "BINOMIAL_METHODS",
    "POISSON_METHODS",
    "FIDUCIAL_DRAWS",
    "DiscretePredictionProblem",
    "DiscreteBound",
    "binom_bounds",
    "pois_bounds",
    "discrete_bounds",
    "discrete_interval",
    "hinkley_binomial_likelihood",
    "hinkley_binomial_cdf",
    "binom_fiducial_p",
    "pois_fiducial_lambda",
]

BINOMIAL_METHODS = ("conservative", "nelson", "kp", "wang", "jeffreys", "fiducial", "hinkley")
POISSON_METHODS = ("conservative", "nelson", "kp", "jeffreys", "fiducial", "hinkley")
FIDUCIAL_DRAWS = 100_000
KP_SCANS = ("self_consistent", "plugin_y")


def _is_int(v):
    return float(v) == math.floor(float(v)) and math.isfinite(float(v))


@dataclass(frozen=True)
class DiscretePredictionProblem:
    """Observed count ``x`` from size ``n``; predict a count from size ``m``.

    Parameters
    ----------
    kind : {"binomial", "poisson"}
    x : int
    n, m : int (binomial) or float (Poisson exposures)
    alpha : float
        Error probability of each one-sided bound, in ``(0, 0.5)``.
    """

    kind: str
    x: int
    n: float
    m: float
    alpha: float = 0.05

    def __post_init__(self):
        if self.kind not in ("binomial", "poisson"):
            raise InvalidParameterError(f"kind must be 'binomial' or 'poisson', got {self.kind!r}")
        if not _is_int(self.x) or self.x < 0:
            raise InvalidParameterError("x must be a nonnegative integer")
        object.__setattr__(self, "x", int(self.x))
        if self.kind == "binomial":
            if not (_is_int(self.n) and _is_int(self.m)) or self.n < 1 or self.m < 1:
                raise InvalidParameterError("binomial n and m must be positive integers")
            if self.x > self.n:
                raise InvalidParameterError("x cannot exceed n")
            object.__setattr__(self, "n", int(self.n))
            object.__setattr__(self, "m", int(self.m))
        else:
            if not (math.isfinite(self.n) and math.isfinite(self.m) and self.n > 0 and self.m > 0):
                raise InvalidParameterError("Poisson exposures n and m must be positive")
            object.__setattr__(self, "n", float(self.n))
            object.__setattr__(self, "m", float(self.m))
        alpha = float(self.alpha)
        if not 0.0 < alpha < 0.5:
            raise InvalidProbabilityError("alpha must lie in (0, 0.5)")
        object.__setattr__(self, "alpha", alpha)

    @property
    def y_max(self):
        """Largest possible predictand (``inf`` for Poisson)."""
        return self.m if self.kind == "binomial" else math.inf

    def with_x(self, x):
        return DiscretePredictionProblem(self.kind, x, self.n, self.m, self.alpha)

    def with_alpha(self, alpha):
        return DiscretePredictionProblem(self.kind, self.x, self.n, self.m, alpha)


@dataclass(frozen=True)
class DiscreteBound:
    """One-sided ``1 - alpha`` lower and upper prediction bounds for a count."""

    lower: int
    upper: int
    method: str
    alpha: float

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise InvalidParameterError(
                f"bounds must satisfy 0 <= lower <= upper, got ({self.lower}, {self.upper})")

    def contains(self, y, side="two-sided"):
        """Whether ``y`` lies inside the bound(s) selected by ``side``."""
        y = np.asarray(y)
        if side == "upper":
            return y <= self.upper
        if side == "lower":
            return y >= self.lower
        if side == "two-sided":
            return (y >= self.lower) & (y <= self.upper)
        raise InvalidParameterError(f"unknown side {side!r}")

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper, "method": self.method,
                "alpha": self.alpha}


# ---------------------------------------------------------------------------
# integer searches
# ---------------------------------------------------------------------------

def _first_true(pred, start=0):
    """Smallest integer ``y >= start`` with ``pred(y)``, for ``pred`` false-then-true."""
    if pred(start):
        return start
    lo, step = start, 1
    hi = start + step
    while not pred(hi):
        lo = hi
        step *= 2
        hi = start + step
    # pred(lo) is false, pred(hi) is true
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _scan_bounds(lower_ok, upper_ok, y_max):
    """Bounds over ``y in {0, ..., y_max}`` from boolean arrays.

    ``lower`` is the smallest ``y`` meeting the lower condition and
    ``upper`` the largest meeting the upper condition.  An empty lower set
    puts the lower bound at ``y_max``.
    """
    lower = int(np.argmax(lower_ok)) if lower_ok.any() else y_max
    upper = int(y_max - np.argmax(upper_ok[::-1])) if upper_ok.any() else 0
    return lower, upper


# ---------------------------------------------------------------------------
# conservative
# ---------------------------------------------------------------------------

def _conservative_binomial(pr):
    x, n, m, a = pr.x, pr.n, pr.m, pr.alpha
    y = np.arange(m + 1)
    N = n + m
    # X | X + Y = x + y is hypergeometric with x + y marked items out of n + m, n drawn
    at_x = np.array([family_cdf("hypergeometric", x, x + k, n, N) for k in y])
    below_x = (np.array([family_cdf("hypergeometric", x - 1, x + k, n, N) for k in y])
               if x > 0 else np.zeros(m + 1))
    return _scan_bounds(1.0 - below_x > a, at_x > a, m)


def _conservative_poisson(pr):
    x, a = pr.x, pr.alpha
    share = pr.n / (pr.n + pr.m)

    def pbinom(k, y):
        if k < 0:
            return 0.0
        return float(family_cdf("binomial", k, x + y, share))

    # P(X >= x | X + Y = x + y) grows with y; P(X <= x | X + Y = x + y) shrinks with y
    lower = _first_true(lambda y: 1.0 - pbinom(x - 1, y) > a)
    upper = _first_true(lambda y: not pbinom(x, y) > a) - 1
    return lower, upper


# ---------------------------------------------------------------------------
# approximate pivots
# ---------------------------------------------------------------------------

def _pivot_binomial(pr, method, kp_scan):
    n, m, a = pr.n, pr.m, pr.alpha
    z = float(sc.ndtri(1.0 - a))
    x = float(pr.x)
    y = np.arange(m + 1, dtype=float)
    if method == "nelson":
        if pr.x in (0, n):
            raise DegenerateSampleError("x / n is 0 or 1, so the Nelson pivot is undefined")
        p_hat = np.full_like(y, x / n)
    elif method == "kp":
        if pr.x == 0:
            x = 0.5
        elif pr.x == n:
            x = n - 0.5
        yy = y if kp_scan == "self_consistent" else m * x / n
        p_hat = (x + yy) / (n + m) * np.ones_like(y)
    else:  # wang
        p_hat = (x + y + 0.5 * z * z) / (n + m + z * z)
    center = m * x / n
    sd = np.sqrt((n + m) * (m / n) * p_hat * (1.0 - p_hat))
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(sd > 0, (y - center) / sd, np.sign(y - center) * np.inf)
    q = np.nan_to_num(q, nan=0.0, posinf=np.inf, neginf=-np.inf)
    return _scan_bounds(q >= -z, q <= z, m)


def _pivot_poisson(pr, method, kp_scan):
    n, m, a = pr.n, pr.m, pr.alpha
    z = float(sc.ndtri(1.0 - a))
    x = float(pr.x)
    if method == "nelson":
        if pr.x == 0:
            raise DegenerateSampleError("x = 0, so the Nelson pivot is undefined")
    elif pr.x == 0:
        x = 0.5
    center = m * x / n
    k = m + m * m / n

    def q(y):
        if method == "nelson":
            lam = x / n
        elif kp_scan == "self_consistent":
            lam = (x + y) / (n + m)
        else:
            lam = (x + center) / (n + m)
        return (y - center) / math.sqrt(k * lam)

    # q increases with y for every estimator used here
    lower = _first_true(lambda y: q(y) >= -z)
    upper = _first_true(lambda y: q(y) > z) - 1
    return lower, upper


# ---------------------------------------------------------------------------
# integration methods
# ---------------------------------------------------------------------------

def _quantile_pair(family, alpha, *params):
    lo = family_quantile(family, alpha, *params)
    hi = family_quantile(family, 1.0 - alpha, *params)
    return int(lo), int(hi)


def _jeffreys(pr):
    if pr.kind == "binomial":
        return _quantile_pair("beta_binomial", pr.alpha, pr.m, pr.x + 0.5, pr.n - pr.x + 0.5)
    return _quantile_pair("negative_binomial", pr.alpha, pr.x + 0.5, pr.n / (pr.n + pr.m))


def binom_fiducial_p(x, n, B=FIDUCIAL_DRAWS, rng=0, threads=None):
    """Draws of ``U_(x) + D (U_(x+1) - U_(x))`` from ``n`` uniform order statistics.

    The order statistics come from normalized cumulative sums of ``n + 1``
    exponential spacings, with ``U_(0) = 0`` and ``U_(n+1) = 1``.  The same
    seed gives the same spacings for every ``x``, so the draws are
    nondecreasing in ``x`` draw by draw.
    """
    policy = as_policy(rng)
    B = int(B)

    def block(k):
        gen = policy.generator(k)
        count = min(BLOCK, B - k * BLOCK)
        S = np.cumsum(gen.standard_exponential((count, n + 1)), axis=1)
        d = gen.random(count)
        total = S[:, n]
        lo = S[:, x - 1] / total if x > 0 else np.zeros(count)
        hi = S[:, x] / total if x < n else np.ones(count)
        return lo + d * (hi - lo)

    return np.concatenate(run_blocks(block, math.ceil(B / BLOCK), threads))


def pois_fiducial_lambda(x, n, B=FIDUCIAL_DRAWS, rng=0, threads=None):
    """Draws of ``chi2_{2x+1} / (2n)`` by inversion, monotone in ``x`` for a fixed seed."""
    policy = as_policy(rng)
    B = int(B)

    def block(k):
        gen = policy.generator(k)
        count = min(BLOCK, B - k * BLOCK)
        return sc.gammaincinv(x + 0.5, gen.random(count)) / n

    return np.concatenate(run_blocks(block, math.ceil(B / BLOCK), threads))


def _fiducial(pr, rng, B, threads):
    if rng is None:
        raise InvalidParameterError("the fiducial method needs an rng")
    if pr.kind == "binomial":
        p = binom_fiducial_p(pr.x, pr.n, B, rng, threads)

        def cdf(y):
            return 1.0 if y >= pr.m else float(np.mean(sc.bdtr(y, pr.m, p)))
    else:
        mean = pr.m * pois_fiducial_lambda(pr.x, pr.n, B, rng, threads)

        def cdf(y):
            return float(np.mean(sc.pdtr(y, mean)))

    lower = _first_true(lambda y: cdf(y) >= pr.alpha)
    upper = _first_true(lambda y: cdf(y) >= 1.0 - pr.alpha)
    return lower, upper


def hinkley_binomial_likelihood(x, n, m):
    """``L(y) = C(n, x) C(m, y) / C(n + m, x + y)`` for ``y = 0..m``."""
    y = np.arange(m + 1)
    logc = sc.gammaln
    log_l = (logc(n + 1) - logc(x + 1) - logc(n - x + 1)
             + logc(m + 1) - logc(y + 1) - logc(m - y + 1)
             - logc(n + m + 1) + logc(x + y + 1) + logc(n + m - x - y + 1))
    return np.exp(log_l)


def hinkley_binomial_cdf(x, n, m):
    """Normalized cumulative predictive likelihood ``F(y)`` for ``y = 0..m``."""
    L = hinkley_binomial_likelihood(x, n, m)
    F = np.cumsum(L) / L.sum()
    F[-1] = 1.0
    return F


def _hinkley(pr):
    if pr.kind == "poisson":
        return _quantile_pair("negative_binomial", pr.alpha, pr.x + 1, pr.n / (pr.n + pr.m))
    F = hinkley_binomial_cdf(pr.x, pr.n, pr.m)
    # lower = sup{y : F(y - 1) <= alpha}, upper = inf{y : F(y) >= 1 - alpha}
    F_prev = np.concatenate([[0.0], F[:-1]])
    lower = int(np.flatnonzero(F_prev <= pr.alpha)[-1])
    upper = int(np.flatnonzero(F >= 1.0 - pr.alpha)[0])
    return lower, upper


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def binom_bounds(problem, method, rng=None, kp_scan="self_consistent", B=FIDUCIAL_DRAWS,
                 threads=None):
    """One-sided ``1 - alpha`` lower and upper bounds for a binomial predictand.

    Parameters
    ----------
    problem : DiscretePredictionProblem
        Must have ``kind == "binomial"``.
    method : str
        One of :data:`BINOMIAL_METHODS`.
    rng : RngPolicy or int, optional
        Required by ``fiducial`` only.
    kp_scan : {"self_consistent", "plugin_y"}
        How ``kp`` treats the ``Y`` inside its estimate: substitute each
        candidate ``y`` (default) or fix it at ``m x / n``.
    B : int
        Fiducial Monte Carlo draws.

    Returns
    -------
    DiscreteBound
    """
    if problem.kind != "binomial":
        raise InvalidParameterError("binom_bounds needs a binomial problem")
    return _dispatch(problem, method, rng, kp_scan, B, threads, BINOMIAL_METHODS)


def pois_bounds(problem, method, rng=None, kp_scan="self_consistent", B=FIDUCIAL_DRAWS,
                threads=None):
    """One-sided ``1 - alpha`` lower and upper bounds for a Poisson predictand.

    See :func:`binom_bounds`; ``wang`` is not available here.
    """
    if problem.kind != "poisson":
        raise InvalidParameterError("pois_bounds needs a Poisson problem")
    return _dispatch(problem, method, rng, kp_scan, B, threads, POISSON_METHODS)


def discrete_bounds(problem, method, rng=None, **kwargs):
    """Dispatch to :func:`binom_bounds` or :func:`pois_bounds` by ``problem.kind``."""
    f = binom_bounds if problem.kind == "binomial" else pois_bounds
    return f(problem, method, rng, **kwargs)


def discrete_interval(problem, method, side="upper", rng=None, **kwargs):
    """``(lo, hi)`` such that ``lo <= Y <= hi`` is the ``1 - alpha`` prediction statement.

    One-sided requests put the open end at ``0`` or the largest possible
    count; ``two-sided`` combines the one-sided bounds at ``alpha / 2``.
    """
    if side == "two-sided":
        b = discrete_bounds(problem.with_alpha(0.5 * problem.alpha), method, rng, **kwargs)
        return b.lower, b.upper
    b = discrete_bounds(problem, method, rng, **kwargs)
    if side == "upper":
        return 0, b.upper
    if side == "lower":
        return b.lower, problem.y_max
    raise InvalidParameterError(f"unknown side {side!r}")


def _dispatch(pr, method, rng, kp_scan, B, threads, allowed):
    if method not in allowed:
        raise InvalidParameterError(f"method must be one of {allowed}, got {method!r}")
    if kp_scan not in KP_SCANS:
        raise InvalidParameterError(f"kp_scan must be one of {KP_SCANS}")
    binomial = pr.kind == "binomial"
    if method == "conservative":
        lo, hi = _conservative_binomial(pr) if binomial else _conservative_poisson(pr)
    elif method in ("nelson", "kp", "wang"):
        lo, hi = (_pivot_binomial if binomial else _pivot_poisson)(pr, method, kp_scan)
    elif method == "jeffreys":
        lo, hi = _jeffreys(pr)
    elif method == "fiducial":
        lo, hi = _fiducial(pr, rng, B, threads)
    else:
        lo, hi = _hinkley(pr)
    return DiscreteBound(int(lo), int(hi), method, pr.alpha)
