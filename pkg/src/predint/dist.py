"""Distribution kernels: cdf, survival, density, quantile and sampling.

Every family is addressed by a string tag and a parameter tuple:

==================  ==========================  ===============================
family              params                      notes
==================  ==========================  ===============================
normal              (mu, sigma)                 location-scale
logistic            (mu, sigma)                 location-scale
sev                 (mu, sigma)                 Phi(z) = 1 - exp(-exp(z))
gamma               (alpha, lam)                shape, rate
inverse_gaussian    (mu, lam)                   mean, shape; mu = inf allowed
binomial            (n, p)
poisson             (mean,)
hypergeometric      (K, n, N)                   K marked items, n draws, N total
beta_binomial       (m, a, b)
negative_binomial   (r, p)                      failures before the r-th success
chi_square          (df,)
student_t           (df,)
uniform01           ()
==================  ==========================  ===============================

The ``family_*`` functions broadcast array-valued parameters, which is what
mixture cdfs need.  :class:`Kernel` binds one parameter vector and is the
frozen model description passed around the rest of the package.

Continuous cdfs and quantiles are evaluated with :mod:`scipy.special`
ufuncs.  Binomial, Poisson and negative binomial cdfs use regularized
incomplete beta/gamma ratios; hypergeometric and beta-binomial cdfs are
summed in log space and exponentiated once.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy import special as sc

from .errors import InvalidParameterError, InvalidProbabilityError

__all__ = [
    "FAMILIES",
    "LOCATION_SCALE",
    "DISCRETE",
    "Kernel",
    "ModelSpec",
    "family_cdf",
    "family_sf",
    "family_pdf",
    "family_logpdf",
    "family_quantile",
    "family_isf",
    "family_draw",
    "eval_cdf",
    "eval_quantile",
    "draw",
    "standard_cdf",
    "standard_sf",
    "standard_quantile",
    "standard_isf",
    "standard_logsf",
    "standard_isf_log",
    "normal",
    "logistic",
    "sev",
    "gamma",
    "inverse_gaussian",
    "binomial",
    "poisson",
    "hypergeometric",
    "beta_binomial",
    "negative_binomial",
    "chi_square",
    "student_t",
    "uniform01",
]

FAMILIES = {
    "normal": ("mu", "sigma"),
    "logistic": ("mu", "sigma"),
    "sev": ("mu", "sigma"),
    "gamma": ("alpha", "lam"),
    "inverse_gaussian": ("mu", "lam"),
    "binomial": ("n", "p"),
    "poisson": ("mean",),
    "hypergeometric": ("K", "n", "N"),
    "beta_binomial": ("m", "a", "b"),
    "negative_binomial": ("r", "p"),
    "chi_square": ("df",),
    "student_t": ("df",),
    "uniform01": (),
}

LOCATION_SCALE = ("normal", "logistic", "sev")
DISCRETE = ("binomial", "poisson", "hypergeometric", "beta_binomial", "negative_binomial")

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# standard location-scale kernels
# ---------------------------------------------------------------------------

def standard_cdf(family, z):
    """Standardized cdf Phi(z) of a location-scale family."""
    z = np.asarray(z, dtype=float)
    if family == "normal":
        return sc.ndtr(z)
    if family == "logistic":
        return sc.expit(z)
    if family == "sev":
        return -np.expm1(-np.exp(z))
    raise InvalidParameterError(f"{family!r} is not a location-scale family")


def standard_sf(family, z):
    """Standardized survival function 1 - Phi(z), accurate in the upper tail."""
    z = np.asarray(z, dtype=float)
    if family == "normal":
        return sc.ndtr(-z)
    if family == "logistic":
        return sc.expit(-z)
    if family == "sev":
        return np.exp(-np.exp(z))
    raise InvalidParameterError(f"{family!r} is not a location-scale family")


def standard_logsf(family, z):
    """log(1 - Phi(z)) without underflow far in the upper tail."""
    z = np.asarray(z, dtype=float)
    if family == "normal":
        return sc.log_ndtr(-z)
    if family == "logistic":
        return -np.logaddexp(0.0, z)
    if family == "sev":
        return -np.exp(z)
    raise InvalidParameterError(f"{family!r} is not a location-scale family")


def standard_isf_log(family, logq):
    """Inverse of :func:`standard_logsf`."""
    logq = np.asarray(logq, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if family == "normal":
            return -sc.ndtri_exp(logq)
        if family == "logistic":
            return np.log(-np.expm1(logq)) - logq
        if family == "sev":
            return np.log(-logq)
    raise InvalidParameterError(f"{family!r} is not a location-scale family")


def standard_pdf(family, z):
    z = np.asarray(z, dtype=float)
    if family == "normal":
        return np.exp(-0.5 * z * z - _LOG_SQRT_2PI)
    if family == "logistic":
        F = sc.expit(z)
        return F * (1.0 - F)
    if family == "sev":
        return np.exp(z - np.exp(z))
    raise InvalidParameterError(f"{family!r} is not a location-scale family")


def standard_quantile(family, p):
    """Inverse of :func:`standard_cdf`."""
    p = np.asarray(p, dtype=float)
    if family == "normal":
        return sc.ndtri(p)
    if family == "logistic":
        return sc.logit(p)
    if family == "sev":
        with np.errstate(divide="ignore"):
            return np.log(-np.log1p(-p))
    raise InvalidParameterError(f"{family!r} is not a location-scale family")


def standard_isf(family, q):
    """Inverse of :func:`standard_sf`, accurate for tiny ``q``."""
    q = np.asarray(q, dtype=float)
    if family == "normal":
        return -sc.ndtri(q)
    if family == "logistic":
        return -sc.logit(q)
    if family == "sev":
        with np.errstate(divide="ignore"):
            return np.log(-np.log(q))
    raise InvalidParameterError(f"{family!r} is not a location-scale family")


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _check_family(family):
    if family not in FAMILIES:
        raise InvalidParameterError(f"unknown family {family!r}")


def _is_count(v):
    v = np.asarray(v, dtype=float)
    return np.all(np.isfinite(v) & (v >= 0) & (v == np.floor(v)))


def _positive(v):
    v = np.asarray(v, dtype=float)
    return np.all(np.isfinite(v) & (v > 0))


def _open_unit(v):
    v = np.asarray(v, dtype=float)
    return np.all((v > 0) & (v < 1))


def _validate(family, params):
    _check_family(family)
    names = FAMILIES[family]
    if len(params) != len(names):
        raise InvalidParameterError(
            f"{family} takes {len(names)} parameter(s) {names}, got {len(params)}")
    for name, v in zip(names, params):
        if np.any(np.isnan(np.asarray(v, dtype=float))):
            raise InvalidParameterError(f"{family}: parameter {name} is NaN")
    ok = True
    if family in LOCATION_SCALE:
        ok = np.all(np.isfinite(np.asarray(params[0], dtype=float))) and _positive(params[1])
    elif family == "gamma":
        ok = _positive(params[0]) and _positive(params[1])
    elif family == "inverse_gaussian":
        mu = np.asarray(params[0], dtype=float)
        ok = np.all(mu > 0) and _positive(params[1])
    elif family == "binomial":
        ok = _is_count(params[0]) and _open_unit(params[1])
    elif family == "poisson":
        ok = _positive(params[0])
    elif family == "hypergeometric":
        K, n, N = (np.asarray(v, dtype=float) for v in params)
        ok = _is_count(K) and _is_count(n) and _is_count(N) and np.all((K <= N) & (n <= N))
    elif family == "beta_binomial":
        ok = _is_count(params[0]) and _positive(params[1]) and _positive(params[2])
    elif family == "negative_binomial":
        p = np.asarray(params[1], dtype=float)
        ok = _positive(params[0]) and np.all((p > 0) & (p <= 1))
    elif family in ("chi_square", "student_t"):
        ok = _positive(params[0])
    if not ok:
        raise InvalidParameterError(f"{family}: parameters {tuple(params)} violate constraints")


def _check_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p >= 0.0) & (p <= 1.0))):
        raise InvalidProbabilityError("probabilities must lie in [0, 1]")
    return p


# ---------------------------------------------------------------------------
# inverse Gaussian helpers
# ---------------------------------------------------------------------------

def _ig_cdf(x, mu, lam):
    x, mu, lam = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, mu, lam)))
    out = np.zeros(x.shape)
    pos = x > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(lam / x)
        ratio = x / mu  # zero when mu is infinite
        a = r * (ratio - 1.0)
        b = r * (ratio + 1.0)
        second = np.exp(2.0 * lam / mu + sc.log_ndtr(-b))
        val = sc.ndtr(a) + second
    out[pos] = np.minimum(val[pos], 1.0)
    return out


def _ig_log_sf(x, mu, lam):
    """Log survival; the right tail uses erfcx so it neither underflows nor cancels."""
    x, mu, lam = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, mu, lam)))
    out = np.zeros(x.shape)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = np.sqrt(lam / x)
        ratio = x / mu
        a = r * (ratio - 1.0)
        b = r * (ratio + 1.0)
        # Phi(-a) - e^{2 lam / mu} Phi(-b) = exp(-a^2 / 2) (erfcx(a/s2) - erfcx(b/s2)) / 2
        tail = -0.5 * a * a + np.log(0.5 * (sc.erfcx(a / _SQRT2) - sc.erfcx(b / _SQRT2)))
        body = np.log(np.clip(sc.ndtr(-a) - np.exp(2.0 * lam / mu + sc.log_ndtr(-b)), 0.0, 1.0))
        levy = np.log(sc.erf(r / _SQRT2))
        val = np.where(np.isinf(mu), levy, np.where(a > 1.0, tail, body))
    pos = x > 0
    out[pos] = np.minimum(val[pos], 0.0)
    out[np.isposinf(x)] = -np.inf
    return out


def _ig_sf(x, mu, lam):
    return np.exp(_ig_log_sf(x, mu, lam))


def _ig_isf_scalar(q, mu, lam):
    if q >= 1.0:
        return 0.0
    if q <= 0.0:
        return math.inf
    if math.isinf(mu):
        # sf = erf(sqrt(lam / (2 x)))
        z = float(sc.erfinv(q))
        # beyond the double range for q below about 1e-154
        return lam / (2.0 * z * z) if z * z > 0.0 else math.inf
    log_q = math.log(q)

    def f(t):
        return float(_ig_log_sf(mu * math.exp(t), mu, lam)) - log_q

    lo, hi = -1.0, 1.0
    while f(lo) < 0.0:
        lo *= 2.0
    while f(hi) > 0.0:
        hi *= 2.0
    t = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return mu * math.exp(t)


def _ig_logpdf(x, mu, lam):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        core = 0.5 * np.log(lam) - _LOG_SQRT_2PI - 1.5 * np.log(x)
        # lam (x - mu)^2 / (2 mu^2 x), written to survive mu = inf
        inv_mu = 1.0 / np.asarray(mu, dtype=float)
        quad = lam * (x * inv_mu - 1.0) ** 2 / (2.0 * x)
        out = core - quad
    return np.where(x > 0, out, -np.inf)


def _ig_quantile_scalar(p, mu, lam):
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return math.inf
    if math.isinf(mu):
        z = sc.ndtri(1.0 - 0.5 * p)
        return lam / (z * z)
    # solve on log(x / mu); X / mu ~ IG(1, lam / mu)
    phi = lam / mu

    def f(t):
        return float(_ig_cdf(math.exp(t), 1.0, phi)) - p

    lo, hi = -1.0, 1.0
    while f(lo) > 0.0:
        lo *= 2.0
    while f(hi) < 0.0:
        hi *= 2.0
    t = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return mu * math.exp(t)


# ---------------------------------------------------------------------------
# log-space discrete cdfs for finite-support families
# ---------------------------------------------------------------------------

def _hypergeom_logpmf(k, K, n, N):
    k = np.asarray(k, dtype=float)
    return (sc.gammaln(K + 1) - sc.gammaln(k + 1) - sc.gammaln(K - k + 1)
            + sc.gammaln(N - K + 1) - sc.gammaln(n - k + 1) - sc.gammaln(N - K - n + k + 1)
            - sc.gammaln(N + 1) + sc.gammaln(n + 1) + sc.gammaln(N - n + 1))


def _betabinom_logpmf(k, m, a, b):
    k = np.asarray(k, dtype=float)
    return (sc.gammaln(m + 1) - sc.gammaln(k + 1) - sc.gammaln(m - k + 1)
            + sc.betaln(k + a, m - k + b) - sc.betaln(a, b))


def _finite_support(family, params):
    if family == "hypergeometric":
        K, n, N = params
        return int(max(0, n + K - N)), int(min(n, K))
    if family == "beta_binomial":
        return 0, int(params[0])
    if family == "binomial":
        return 0, int(params[0])
    raise AssertionError(family)


@functools.lru_cache(maxsize=256)
def _log_tables(family, params):
    # log cdf and log sf on the whole finite support
    lo, hi = _finite_support(family, params)
    k = np.arange(lo, hi + 1, dtype=float)
    if family == "hypergeometric":
        lp = _hypergeom_logpmf(k, *params)
    else:
        lp = _betabinom_logpmf(k, *params)
    # normalize once so both tails are consistent to rounding
    total = np.logaddexp.reduce(lp)
    lp = lp - total
    logcdf = np.logaddexp.accumulate(lp)
    logsf_incl = np.logaddexp.accumulate(lp[::-1])[::-1]
    return lo, hi, lp, logcdf, logsf_incl


def _table_eval(family, x, params, which):
    params = tuple(float(v) for v in params)
    lo, hi, lp, logcdf, logsf_incl = _log_tables(family, params)
    x = np.asarray(x, dtype=float)
    k = np.floor(x)
    out = np.empty(x.shape)
    flat_k = k.ravel()
    flat = out.ravel()
    for i, kk in enumerate(flat_k):
        if which == "cdf":
            if kk < lo:
                flat[i] = 0.0
            elif kk >= hi:
                flat[i] = 1.0
            else:
                flat[i] = min(math.exp(logcdf[int(kk) - lo]), 1.0)
        elif which == "sf":
            if kk < lo:
                flat[i] = 1.0
            elif kk >= hi:
                flat[i] = 0.0
            else:
                flat[i] = min(math.exp(logsf_incl[int(kk) + 1 - lo]), 1.0)
        else:  # logpmf
            if kk != x.ravel()[i] or kk < lo or kk > hi:
                flat[i] = -math.inf
            else:
                flat[i] = lp[int(kk) - lo]
    return out.reshape(x.shape)


def _vectorize_table(family, x, params, which):
    arrs = np.broadcast_arrays(np.asarray(x, dtype=float),
                               *(np.asarray(v, dtype=float) for v in params))
    if all(a.ndim == 0 or np.all(a == a.flat[0]) for a in arrs[1:]):
        return _table_eval(family, arrs[0], [a.flat[0] if a.size else a for a in arrs[1:]], which)
    out = np.empty(arrs[0].shape)
    it = np.nditer(arrs + [out], op_flags=[["readonly"]] * len(arrs) + [["writeonly"]])
    for vals in it:
        vals[-1][...] = _table_eval(family, vals[0], [float(v) for v in vals[1:-1]], which)
    return out


# ---------------------------------------------------------------------------
# family-level evaluation
# ---------------------------------------------------------------------------

def family_cdf(family, x, *params):
    """P(X <= x) with broadcasting over ``x`` and ``params``."""
    _validate(family, params)
    x = np.asarray(x, dtype=float)
    if family in LOCATION_SCALE:
        mu, sigma = params
        return standard_cdf(family, (x - mu) / sigma)
    if family == "gamma":
        a, lam = params
        return sc.gammainc(a, np.maximum(x, 0.0) * lam)
    if family == "inverse_gaussian":
        return _ig_cdf(x, *params)
    if family == "chi_square":
        return sc.gammainc(0.5 * np.asarray(params[0]), 0.5 * np.maximum(x, 0.0))
    if family == "student_t":
        return sc.stdtr(params[0], x)
    if family == "uniform01":
        return np.clip(x, 0.0, 1.0)
    k = np.floor(x)
    if family == "binomial":
        n, p = params
        kk = np.clip(k, 0, n)
        with np.errstate(invalid="ignore"):
            val = sc.betainc(np.maximum(n - kk, 1e-300), kk + 1.0, 1.0 - np.asarray(p))
        return np.where(k < 0, 0.0, np.where(k >= n, 1.0, val))
    if family == "poisson":
        (mean,) = params
        return np.where(k < 0, 0.0, sc.gammaincc(np.maximum(k, 0.0) + 1.0, mean))
    if family == "negative_binomial":
        r, p = params
        return np.where(k < 0, 0.0, sc.betainc(r, np.maximum(k, 0.0) + 1.0, p))
    return _vectorize_table(family, x, params, "cdf")


def family_sf(family, x, *params):
    """P(X > x), evaluated directly rather than as 1 - cdf."""
    _validate(family, params)
    x = np.asarray(x, dtype=float)
    if family in LOCATION_SCALE:
        mu, sigma = params
        return standard_sf(family, (x - mu) / sigma)
    if family == "gamma":
        a, lam = params
        return sc.gammaincc(a, np.maximum(x, 0.0) * lam)
    if family == "inverse_gaussian":
        return _ig_sf(x, *params)
    if family == "chi_square":
        return sc.gammaincc(0.5 * np.asarray(params[0]), 0.5 * np.maximum(x, 0.0))
    if family == "student_t":
        return sc.stdtr(params[0], -x)
    if family == "uniform01":
        return np.clip(1.0 - x, 0.0, 1.0)
    k = np.floor(x)
    if family == "binomial":
        n, p = params
        kk = np.clip(k, 0, np.maximum(n - 1, 0))
        with np.errstate(invalid="ignore"):
            val = sc.betainc(kk + 1.0, np.maximum(n - kk, 1e-300), np.asarray(p))
        return np.where(k < 0, 1.0, np.where(k >= n, 0.0, val))
    if family == "poisson":
        (mean,) = params
        return np.where(k < 0, 1.0, sc.gammainc(np.maximum(k, 0.0) + 1.0, mean))
    if family == "negative_binomial":
        r, p = params
        return np.where(k < 0, 1.0, sc.betaincc(r, np.maximum(k, 0.0) + 1.0, p))
    return _vectorize_table(family, x, params, "sf")


def family_logpdf(family, x, *params):
    """Log density (continuous) or log mass (discrete)."""
    _validate(family, params)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if family in LOCATION_SCALE:
            mu, sigma = params
            z = (x - mu) / sigma
            return np.log(standard_pdf(family, z)) - np.log(sigma)
        if family == "gamma":
            a, lam = params
            out = sc.xlogy(a, lam) + sc.xlogy(a - 1.0, x) - lam * x - sc.gammaln(a)
            return np.where(x > 0, out, -np.inf)
        if family == "inverse_gaussian":
            return _ig_logpdf(x, *params)
        if family == "chi_square":
            return family_logpdf("gamma", x, 0.5 * np.asarray(params[0]), 0.5)
        if family == "student_t":
            df = np.asarray(params[0], dtype=float)
            return (sc.gammaln(0.5 * (df + 1)) - sc.gammaln(0.5 * df) - 0.5 * np.log(df * np.pi)
                    - 0.5 * (df + 1) * np.log1p(x * x / df))
        if family == "uniform01":
            return np.where((x >= 0) & (x <= 1), 0.0, -np.inf)
        integer = x == np.floor(x)
        if family == "binomial":
            n, p = params
            out = (sc.gammaln(n + 1) - sc.gammaln(x + 1) - sc.gammaln(n - x + 1)
                   + sc.xlogy(x, p) + sc.xlog1py(n - x, -np.asarray(p)))
            return np.where(integer & (x >= 0) & (x <= n), out, -np.inf)
        if family == "poisson":
            (mean,) = params
            out = sc.xlogy(x, mean) - mean - sc.gammaln(x + 1)
            return np.where(integer & (x >= 0), out, -np.inf)
        if family == "negative_binomial":
            r, p = params
            out = (sc.gammaln(x + r) - sc.gammaln(r) - sc.gammaln(x + 1)
                   + sc.xlogy(r, p) + sc.xlog1py(x, -np.asarray(p)))
            return np.where(integer & (x >= 0), out, -np.inf)
    return _vectorize_table(family, x, params, "logpmf")


def family_pdf(family, x, *params):
    """Density (continuous) or mass (discrete)."""
    return np.exp(family_logpdf(family, x, *params))


def _support(family, params):
    if family in LOCATION_SCALE or family == "student_t":
        return -math.inf, math.inf
    if family in ("gamma", "inverse_gaussian", "chi_square"):
        return 0.0, math.inf
    if family == "uniform01":
        return 0.0, 1.0
    if family in ("poisson", "negative_binomial"):
        return 0.0, math.inf
    lo, hi = _finite_support(family, tuple(float(v) for v in params))
    return float(lo), float(hi)


def _discrete_quantile_scalar(family, p, params):
    lo, hi = _support(family, params)
    if p <= 0.0:
        return lo
    if p >= 1.0 and math.isinf(hi):
        return math.inf

    def cdf(k):
        return float(family_cdf(family, k, *params))

    if math.isinf(hi):
        step = 1.0
        hi = lo
        while cdf(hi) < p:
            lo = hi + 1.0
            hi = hi + step
            step *= 2.0
    elif cdf(lo) >= p:
        return lo
    # invariant: cdf(hi) >= p, and every k < lo has cdf(k) < p
    while lo < hi:
        mid = math.floor(0.5 * (lo + hi))
        if cdf(mid) >= p:
            hi = mid
        else:
            lo = mid + 1.0
    return hi


def family_quantile(family, p, *params):
    """Lower quantile inf{x : cdf(x) >= p}; p = 0 and p = 1 map to the support ends."""
    _validate(family, params)
    p = _check_prob(p)
    if family in LOCATION_SCALE:
        mu, sigma = params
        return mu + sigma * standard_quantile(family, p)
    if family == "gamma":
        a, lam = params
        return sc.gammaincinv(a, p) / lam
    if family == "chi_square":
        return 2.0 * sc.gammaincinv(0.5 * np.asarray(params[0]), p)
    if family == "student_t":
        return sc.stdtrit(params[0], p)
    if family == "uniform01":
        return p.copy() if p.ndim else p + 0.0
    arrs = np.broadcast_arrays(p, *(np.asarray(v, dtype=float) for v in params))
    out = np.empty(arrs[0].shape)
    flat = [a.ravel() for a in arrs]
    res = out.ravel()
    for i in range(res.size):
        pars = tuple(float(a[i]) for a in flat[1:])
        if family == "inverse_gaussian":
            res[i] = _ig_quantile_scalar(float(flat[0][i]), *pars)
        else:
            res[i] = _discrete_quantile_scalar(family, float(flat[0][i]), pars)
    return out.reshape(arrs[0].shape) if out.ndim else out[()]


def family_isf(family, q, *params):
    """Upper-tail quantile: the x with sf(x) = q, accurate for tiny ``q``."""
    _validate(family, params)
    q = _check_prob(q)
    if family in LOCATION_SCALE:
        mu, sigma = params
        return mu + sigma * standard_isf(family, q)
    if family == "gamma":
        a, lam = params
        return sc.gammainccinv(a, q) / lam
    if family == "chi_square":
        return 2.0 * sc.gammainccinv(0.5 * np.asarray(params[0]), q)
    if family == "student_t":
        return -sc.stdtrit(params[0], q)
    if family == "inverse_gaussian":
        arrs = np.broadcast_arrays(q, *(np.asarray(v, dtype=float) for v in params))
        out = np.array([_ig_isf_scalar(*(float(a.flat[i]) for a in arrs))
                        for i in range(arrs[0].size)]).reshape(arrs[0].shape)
        return out if out.ndim else out[()]
    return family_quantile(family, 1.0 - q, *params)


def _draw_standard(family, rng, size):
    if family == "normal":
        return rng.standard_normal(size)
    if family == "logistic":
        return rng.logistic(0.0, 1.0, size)
    return -rng.gumbel(0.0, 1.0, size)


def family_draw(family, rng, size, *params):
    """Random variates; location-scale draws are ``mu + sigma * standard draw``."""
    _validate(family, params)
    if family in LOCATION_SCALE:
        mu, sigma = params
        return mu + sigma * _draw_standard(family, rng, size)
    if family == "gamma":
        a, lam = params
        return rng.standard_gamma(a, size) / lam
    if family == "inverse_gaussian":
        mu, lam = params
        if np.isscalar(mu) and math.isinf(mu):
            z = rng.standard_normal(size)
            return lam / (z * z)
        return mu * rng.wald(1.0, np.asarray(lam) / mu, size)
    if family == "binomial":
        return rng.binomial(np.asarray(params[0]).astype(np.int64), params[1], size).astype(float)
    if family == "poisson":
        return rng.poisson(params[0], size).astype(float)
    if family == "hypergeometric":
        K, n, N = (int(v) for v in params)
        return rng.hypergeometric(K, N - K, n, size).astype(float)
    if family == "beta_binomial":
        m, a, b = params
        return rng.binomial(int(m), rng.beta(a, b, size)).astype(float)
    if family == "negative_binomial":
        return rng.negative_binomial(params[0], params[1], size).astype(float)
    if family == "chi_square":
        return rng.chisquare(params[0], size)
    if family == "student_t":
        return rng.standard_t(params[0], size)
    return rng.random(size)


# ---------------------------------------------------------------------------
# bound kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    """A distribution family with a bound, validated parameter vector.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    params : tuple of float
        Parameter values in the order given by ``FAMILIES[family]``.
    """

    family: str
    params: tuple

    def __post_init__(self):
        params = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", params)
        _validate(self.family, params)

    @property
    def names(self):
        return FAMILIES[self.family]

    @property
    def named(self):
        """Parameters keyed by their symbol (``mu``, ``sigma``, ``alpha``...)."""
        return dict(zip(self.names, self.params))

    @property
    def is_discrete(self):
        return self.family in DISCRETE

    @property
    def is_location_scale(self):
        return self.family in LOCATION_SCALE

    @property
    def support(self):
        return _support(self.family, self.params)

    def cdf(self, x):
        return family_cdf(self.family, x, *self.params)

    def sf(self, x):
        return family_sf(self.family, x, *self.params)

    def pdf(self, x):
        return family_pdf(self.family, x, *self.params)

    pmf = pdf

    def logpdf(self, x):
        return family_logpdf(self.family, x, *self.params)

    logpmf = logpdf

    def quantile(self, p):
        return family_quantile(self.family, p, *self.params)

    def isf(self, q):
        return family_isf(self.family, q, *self.params)

    def draw(self, rng, count):
        return family_draw(self.family, rng, count, *self.params)

    def to_dict(self):
        return {"family": self.family, "params": dict(self.named)}


ModelSpec = Kernel


def eval_cdf(kernel, x):
    """P(X <= x) under ``kernel``."""
    return kernel.cdf(x)


def eval_quantile(kernel, prob):
    """inf{x : cdf(x) >= prob} under ``kernel``."""
    return kernel.quantile(prob)


def draw(kernel, rng, count):
    """``count`` i.i.d. variates; ``rng`` is a :class:`numpy.random.Generator`."""
    if int(count) < 1:
        raise InvalidParameterError("count must be a positive integer")
    return kernel.draw(rng, int(count))


def normal(mu=0.0, sigma=1.0):
    return Kernel("normal", (mu, sigma))


def logistic(mu=0.0, sigma=1.0):
    return Kernel("logistic", (mu, sigma))


def sev(mu=0.0, sigma=1.0):
    return Kernel("sev", (mu, sigma))


def gamma(alpha, lam=1.0):
    return Kernel("gamma", (alpha, lam))


def inverse_gaussian(mu, lam):
    return Kernel("inverse_gaussian", (mu, lam))


def binomial(n, p):
    return Kernel("binomial", (n, p))


def poisson(mean):
    return Kernel("poisson", (mean,))


def hypergeometric(K, n, N):
    return Kernel("hypergeometric", (K, n, N))


def beta_binomial(m, a, b):
    return Kernel("beta_binomial", (m, a, b))


def negative_binomial(r, p):
    return Kernel("negative_binomial", (r, p))


def chi_square(df):
    return Kernel("chi_square", (df,))


def student_t(df):
    return Kernel("student_t", (df,))


def uniform01():
    return Kernel("uniform01", ())
