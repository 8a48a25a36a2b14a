"""Fiducial predictive distributions for gamma and inverse Gaussian data.

Gamma parameter draws use a scaled chi-square approximation to the
distribution of ``W(alpha) = 2 n alpha log(xbar / geometric mean)``, with
its mean and variance matched through digamma and trigamma at the ML shape.
Inverse Gaussian draws take ``lambda`` from its exact chi-square law and then
``mu`` by inverting the cdf of the sample mean at a uniform draw; ``mu`` is
infinite when no finite mean reaches that uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .boot import BLOCK, as_policy, run_blocks
from .dist import family_cdf
from .errors import DegenerateSampleError, EmptyBatchError, InvalidParameterError, RootNotBracketedError
from .fit import Sample, fit_ml
from .predict_core import MixturePredictiveCdf
from .special import digamma, trigamma

__all__ = [
    "FiducialDraws",
    "gamma_chisq_approx",
    "gamma_fiducial_draws",
    "invgauss_fiducial_draws",
    "fiducial_predictive_cdf",
    "fiducial_bound",
]

MU_CAP = 1e12
MU_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class FiducialDraws:
    """Parameter draws ``(alpha_b, lam_b)`` (gamma) or ``(mu_b, lam_b)`` (inverse Gaussian).

    ``scale`` is the sample mean, used to standardize quantile searches.
    For inverse Gaussian draws ``mu_b`` may be ``inf``.
    """

    family: str
    draws: np.ndarray
    scale: float

    def __len__(self):
        return self.draws.shape[0]

    @property
    def infinite_fraction(self):
        return float(np.mean(np.isinf(self.draws[:, 0])))


def _positive_sample(sample):
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    if sample.r is not None:
        raise InvalidParameterError("fiducial draws need complete data")
    x = sample.values
    if np.any(x <= 0):
        raise InvalidParameterError("data must be strictly positive")
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateSampleError("all observations are identical")
    return x


def _log_ratio(x):
    # log(arithmetic mean / geometric mean), computed on x / mean
    return float(-np.mean(np.log(x / x.mean())))


def gamma_chisq_approx(alpha, n):
    """Return ``(c, v)`` with ``W(alpha) ~ c chi2_v`` by matching mean and variance."""
    e_s1 = -math.log(n) + digamma(n * alpha) - digamma(alpha)
    var_s1 = -trigamma(n * alpha) + trigamma(alpha) / n
    e_w = 2.0 * n * alpha * e_s1
    var_w = 4.0 * n * n * alpha * alpha * var_s1
    v = 2.0 * e_w * e_w / var_w
    return e_w / v, v


def gamma_fiducial_draws(sample, B=10000, rng=0, alpha_hat=None, threads=None):
    """Approximate fiducial draws of ``(alpha, lam)`` for gamma data.

    ``alpha_b = c chi2_v / (2 n log(xbar / geomean))`` with ``(c, v)`` from
    :func:`gamma_chisq_approx` at the ML shape, then
    ``lam_b = chi2_{2 n alpha_b} / (2 sum x)``.
    """
    x = _positive_sample(sample)
    n = x.size
    log_ratio = _log_ratio(x)
    if not log_ratio > 0:
        raise DegenerateSampleError("geometric mean equals arithmetic mean")
    if alpha_hat is None:
        alpha_hat = fit_ml("gamma", Sample(x)).theta[0]
    c, v = gamma_chisq_approx(float(alpha_hat), n)
    total = float(x.sum())
    policy = as_policy(rng)
    B = int(B)

    def block(k):
        gen = policy.generator(k)
        count = min(BLOCK, B - k * BLOCK)
        a = c * gen.chisquare(v, count) / (2.0 * n * log_ratio)
        # chi2_{2 n a} / 2 is Gamma(n a, 1)
        lam = gen.standard_gamma(n * a) / total
        return np.column_stack([a, lam])

    draws = np.concatenate(run_blocks(block, math.ceil(B / BLOCK), threads))
    return FiducialDraws("gamma", draws, float(x.mean()))


def _ig_cdf(r, phi):
    return family_cdf("inverse_gaussian", 1.0, r, phi)


def _solve_mu_ratio(u, phi):
    """Solve ``F_IG(1; r, phi) = u`` for ``r`` in ``(0, MU_CAP]`` by bisection on ``log r``."""
    lo = np.full(u.shape, math.log(1e-12))
    hi = np.full(u.shape, math.log(MU_CAP))
    f_hi = _ig_cdf(np.exp(hi), phi) - u
    if np.any(f_hi > 0):
        raise RootNotBracketedError("inverse Gaussian mean exceeds the search cap")
    f_lo = _ig_cdf(np.exp(lo), phi) - u
    while np.any(f_lo < 0):
        # cdf is decreasing in the mean; move the lower end down where needed
        lo = np.where(f_lo < 0, lo - 10.0, lo)
        f_lo = _ig_cdf(np.exp(lo), phi) - u
    while np.any(hi - lo > MU_RTOL):
        mid = 0.5 * (lo + hi)
        above = _ig_cdf(np.exp(mid), phi) - u > 0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return np.exp(0.5 * (lo + hi))


def invgauss_fiducial_draws(sample, B=10000, rng=0, threads=None):
    """Fiducial draws of ``(mu, lam)`` for inverse Gaussian data.

    ``lam_b = chi2_{n-1} / sum(1/x - 1/xbar)``.  With ``u_b`` uniform, the
    sample mean follows IG(mu, n lam), so ``mu_b`` solves
    ``F_IG(xbar; mu_b, n lam_b) = u_b``.  When ``xbar`` is at or beyond the
    ``u_b`` quantile of the ``mu = inf`` limit, ``2 Phi(-sqrt(n lam_b / xbar)) >= u_b``,
    no finite root exists and ``mu_b = inf``.
    """
    x = _positive_sample(sample)
    n = x.size
    xbar = float(x.mean())
    denom = float(np.sum(1.0 / x - 1.0 / xbar))
    if not denom > 0:
        raise DegenerateSampleError("sum(1/x - 1/xbar) is zero")
    policy = as_policy(rng)
    B = int(B)

    def block(k):
        gen = policy.generator(k)
        count = min(BLOCK, B - k * BLOCK)
        lam = gen.chisquare(n - 1, count) / denom
        u = gen.random(count)
        phi = n * lam / xbar
        inf_cdf = 2.0 * ndtr(-np.sqrt(phi))
        infinite = inf_cdf >= u
        mu = np.full(count, math.inf)
        if np.any(~infinite):
            mu[~infinite] = xbar * _solve_mu_ratio(u[~infinite], phi[~infinite])
        return np.column_stack([mu, lam])

    draws = np.concatenate(run_blocks(block, math.ceil(B / BLOCK), threads))
    return FiducialDraws("inverse_gaussian", draws, xbar)


def fiducial_predictive_cdf(draws):
    """``F_p(y) = mean_b G(y; theta_b)`` over the fiducial draws."""
    if len(draws) == 0:
        raise EmptyBatchError("no fiducial draws")
    return MixturePredictiveCdf(draws.family, draws.draws, "fiducial", 0.0, draws.scale)


def fiducial_bound(draws, alpha=0.05, side="upper"):
    """Bound read off :func:`fiducial_predictive_cdf`."""
    return fiducial_predictive_cdf(draws).bound(alpha, side, "fiducial", {"B": len(draws)})
