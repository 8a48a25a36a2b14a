"""Location-scale prediction: the GPQ transform, the GPQ-bootstrap predictive
distribution, and the closed-form Student-t bound for normal data."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import special as sc

from .boot import as_policy, parametric_bootstrap
from .dist import LOCATION_SCALE
from .errors import DegenerateSampleError, EmptyBatchError, InvalidParameterError, UnsupportedFamilyError
from .fit import Sample
from .predict_core import MixturePredictiveCdf, bounds_from_quantile

__all__ = [
    "GpqDraw",
    "gpq_transform",
    "gpq_predictive_cdf",
    "gpq_bootstrap_bound",
    "normal_exact_bound",
]


class GpqDraw(NamedTuple):
    """One draw ``(mu**, sigma**)`` of the generalized pivotal quantities."""

    mu_ss: float
    sigma_ss: float


def _gpq_arrays(mu_hat, sigma_hat, mu_star, sigma_star):
    mu_star = np.asarray(mu_star, dtype=float)
    sigma_star = np.asarray(sigma_star, dtype=float)
    if not sigma_hat > 0:
        raise InvalidParameterError("sigma_hat must be positive")
    if np.any(~(sigma_star > 0)):
        raise DegenerateSampleError("bootstrap scale estimate is zero")
    mu_ss = mu_hat + sigma_hat * (mu_hat - mu_star) / sigma_star
    sigma_ss = sigma_hat * sigma_hat / sigma_star
    return mu_ss, sigma_ss


def gpq_transform(fit, boot_estimate):
    """Map a bootstrap estimate to its GPQ draw.

    ``mu** = mu_hat + sigma_hat (mu_hat - mu*) / sigma*`` and
    ``sigma** = sigma_hat^2 / sigma*``.

    Parameters
    ----------
    fit : FitResult or (mu_hat, sigma_hat)
    boot_estimate : (mu*, sigma*)
    """
    mu_hat, sigma_hat = _theta(fit)
    mu_star, sigma_star = boot_estimate
    mu_ss, sigma_ss = _gpq_arrays(mu_hat, sigma_hat, mu_star, sigma_star)
    return GpqDraw(float(mu_ss), float(sigma_ss))


def _theta(fit):
    if hasattr(fit, "theta"):
        if fit.family not in LOCATION_SCALE:
            raise UnsupportedFamilyError("GPQ draws need a location-scale family")
        return fit.theta
    mu, sigma = fit
    return float(mu), float(sigma)


def gpq_predictive_cdf(fit, batch):
    """``F_p(y) = mean_b Phi((y - mu**_b) / sigma**_b)``."""
    if len(batch) == 0:
        raise EmptyBatchError("bootstrap batch has no retained replicates")
    mu_hat, sigma_hat = _theta(fit)
    mu_ss, sigma_ss = _gpq_arrays(mu_hat, sigma_hat, batch.estimates[:, 0], batch.estimates[:, 1])
    return MixturePredictiveCdf(fit.family, np.column_stack([mu_ss, sigma_ss]), "gpq",
                                mu_hat, sigma_hat)


def gpq_bootstrap_bound(fit, B=5000, alpha=0.05, side="upper", rng=0, batch=None, threads=None):
    """Bound read off :func:`gpq_predictive_cdf`."""
    policy = as_policy(rng)
    if batch is None:
        batch = parametric_bootstrap(fit, fit.shape, B, policy.child(0), threads=threads)
    cdf = gpq_predictive_cdf(fit, batch)
    return cdf.bound(alpha, side, "gpq_bootstrap", {"B": batch.B, "failures": batch.failures})


def normal_exact_bound(sample, alpha=0.05, side="upper"):
    """Student-t bound ``xbar + t_{1-alpha, n-1} s sqrt(1 + 1/n)`` for complete normal data.

    ``s`` is the divisor ``n - 1`` standard deviation.
    """
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    if sample.r is not None:
        raise InvalidParameterError("the Student-t bound needs complete data")
    x = sample.values
    n = x.size
    if n < 2:
        raise InvalidParameterError("need at least two observations")
    if np.ptp(x) == 0:
        raise DegenerateSampleError("all observations are identical")
    xbar = float(x.mean())
    s = float(np.sqrt(((x - xbar) ** 2).sum() / (n - 1)))
    factor = s * math.sqrt(1.0 + 1.0 / n)

    def q(p, side_):
        return xbar + float(sc.stdtrit(n - 1, p)) * factor, None

    return bounds_from_quantile(q, alpha, side, "normal_exact", {"n": n})
