"""Maximum likelihood fits for location-scale, gamma and inverse Gaussian data.

Location-scale families accept complete or Type-II censored samples; the
gamma and inverse Gaussian fits require complete samples.  Every fit goes
through :func:`fit_ml_batch`, so a single fit and a bootstrap row of the
same numbers produce bit-identical estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .dist import LOCATION_SCALE, Kernel
from .errors import (
    DegenerateSampleError,
    InvalidParameterError,
    NonConvergenceError,
    UnsupportedFamilyError,
)

__all__ = [
    "FITTABLE",
    "SampleShape",
    "Sample",
    "FitResult",
    "BatchFit",
    "fit_ml",
    "fit_ml_batch",
    "loglik",
]

FITTABLE = LOCATION_SCALE + ("gamma", "inverse_gaussian")

STATUS_OK, STATUS_DEGENERATE, STATUS_NOT_CONVERGED = 0, 1, 2


class SampleShape(NamedTuple):
    """Size and censoring of a sample: ``r`` events out of ``n`` (``r == n`` if complete)."""

    n: int
    r: int

    @property
    def censored(self):
        return self.r < self.n


@dataclass(frozen=True, eq=False)
class Sample:
    """Ordered observations with a complete or Type-II censoring descriptor.

    Parameters
    ----------
    values : array_like
        Observations.  For Type-II data the array must be sorted and the last
        ``n - r`` entries are the censored units, recorded at the r-th order
        statistic.
    r : int, optional
        Event count.  ``None`` (or ``r == n``) means complete data.
    """

    values: np.ndarray
    r: int | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 1:
            raise InvalidParameterError("sample is empty")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("sample contains non-finite values")
        r = self.r
        if r is not None:
            r = int(r)
            if not 2 <= r <= v.size:
                raise InvalidParameterError(f"event count r={r} must satisfy 2 <= r <= n={v.size}")
            if np.any(np.diff(v) < 0):
                raise InvalidParameterError("Type-II censored values must be sorted ascending")
            if np.any(v[r:] != v[r - 1]):
                raise InvalidParameterError(
                    "censored units must be recorded at the r-th order statistic")
            if r == v.size:
                r = None
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "r", r)

    @classmethod
    def complete(cls, values):
        return cls(values)

    @classmethod
    def type2(cls, events, n):
        """Build a Type-II sample from the ``r`` smallest lifetimes out of ``n`` units."""
        ev = np.sort(np.asarray(events, dtype=float).ravel())
        r = ev.size
        if n < r:
            raise InvalidParameterError("n must be at least the number of events")
        full = np.concatenate([ev, np.full(int(n) - r, ev[-1] if r else np.nan)])
        return cls(full, r)

    @property
    def n(self):
        return int(self.values.size)

    @property
    def censoring(self):
        return "complete" if self.r is None else "type2"

    @property
    def shape(self):
        return SampleShape(self.n, self.n if self.r is None else self.r)

    @property
    def events(self):
        return self.values if self.r is None else self.values[: self.r]

    def affine(self, a, b):
        """The sample ``a + b * values`` (``b > 0``) with the same censoring."""
        if not b > 0:
            raise InvalidParameterError("scale factor must be positive")
        return Sample(a + b * self.values, self.r)


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit_ml`.

    Attributes
    ----------
    estimate : Kernel
        The fitted model.
    loglik : float
        Maximized log-likelihood.
    converged : bool
        ``gradient_norm <= 1e-8``.
    iterations : int
    gradient_norm : float
        Max-norm of the score scaled by parameter magnitude and divided by n.
    shape : SampleShape
        Size and censoring of the fitted sample, reused by the bootstrap.
    """

    estimate: Kernel
    loglik: float
    converged: bool
    iterations: int
    gradient_norm: float
    shape: SampleShape

    @property
    def family(self):
        return self.estimate.family

    @property
    def theta(self):
        return self.estimate.params


@dataclass(frozen=True)
class BatchFit:
    """Row-wise fits of a batch of samples.

    ``params`` has one row of parameters per sample; rows whose ``status`` is
    nonzero (1 degenerate, 2 not converged) hold NaN.
    """

    family: str
    params: np.ndarray
    loglik: np.ndarray
    status: np.ndarray
    iterations: np.ndarray
    gradient_norm: np.ndarray

    @property
    def ok(self):
        return self.status == STATUS_OK


def _normal_complete(X):
    mu = X.mean(axis=1)
    dev = X - mu[:, None]
    var = (dev * dev).mean(axis=1)
    sigma = np.sqrt(var)
    m, n = X.shape
    bad = ~(sigma > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = -0.5 * n * (np.log(2.0 * np.pi * var) + 1.0)
        gmu = dev.sum(axis=1) / sigma
        gtau = (dev * dev).sum(axis=1) / var - n
    gnorm = np.maximum(np.abs(gmu), np.abs(gtau)) / n
    status = np.where(bad, STATUS_DEGENERATE, STATUS_OK)
    params = np.column_stack([mu, sigma])
    params[bad] = np.nan
    return params, ll, status, np.ones(m, dtype=np.int64), gnorm


def _gamma_batch(X):
    m, n = X.shape
    if np.any(X <= 0):
        raise InvalidParameterError("gamma data must be strictly positive")
    xbar = X.mean(axis=1)
    rel = X / xbar[:, None]
    # s = log(mean) - mean(log); computed on x / mean so rescaling the data leaves it unchanged
    s = -np.log(rel).mean(axis=1)
    const = np.ptp(X, axis=1) == 0
    s = np.where(const | ~(s > 0), np.nan, s)
    alpha, status, iters, gnorm = _kernels.gamma_shape(s)
    lam = alpha / xbar
    ll = n * (alpha * np.log(lam) - gammaln(alpha)) + (alpha - 1.0) * np.log(X).sum(axis=1) - lam * X.sum(axis=1)
    params = np.column_stack([alpha, lam])
    params[status != STATUS_OK] = np.nan
    return params, ll, status, iters, gnorm


def _invgauss_batch(X):
    m, n = X.shape
    if np.any(X <= 0):
        raise InvalidParameterError("inverse Gaussian data must be strictly positive")
    mu = X.mean(axis=1)
    denom = (1.0 / X - 1.0 / mu[:, None]).sum(axis=1)
    bad = (np.ptp(X, axis=1) == 0) | ~(denom > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = n / denom
        ll = (0.5 * n * np.log(lam) - 0.5 * n * np.log(2.0 * np.pi) - 1.5 * np.log(X).sum(axis=1)
              - lam * ((X - mu[:, None]) ** 2 / X).sum(axis=1) / (2.0 * mu * mu))
        gmu = lam * (X - mu[:, None]).sum(axis=1) / mu**3
        glam = 0.5 * n / lam - ((X - mu[:, None]) ** 2 / X).sum(axis=1) / (2.0 * mu * mu)
        gnorm = np.maximum(np.abs(mu * gmu), np.abs(lam * glam)) / n
    status = np.where(bad, STATUS_DEGENERATE, STATUS_OK)
    params = np.column_stack([mu, lam])
    params[bad] = np.nan
    return params, ll, status, np.ones(m, dtype=np.int64), gnorm


def fit_ml_batch(family, X, r=None):
    """Fit every row of ``X`` by maximum likelihood.

    Parameters
    ----------
    family : str
        One of :data:`FITTABLE`.
    X : ndarray, shape (m, n)
        One sample per row.  Censored rows must be sorted.
    r : int, optional
        Type-II event count shared by all rows; ``None`` for complete data.

    Returns
    -------
    BatchFit
    """
    if family not in FITTABLE:
        raise UnsupportedFamilyError(f"maximum likelihood is not available for {family!r}")
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidParameterError("X must be two-dimensional")
    n = X.shape[1]
    if n < 2:
        raise InvalidParameterError("fitting needs at least two observations")
    r = n if r is None else int(r)
    if r < n and family not in LOCATION_SCALE:
        raise UnsupportedFamilyError(f"censored fitting is only available for {LOCATION_SCALE}")
    if family == "normal" and r == n:
        out = _normal_complete(X)
    elif family in LOCATION_SCALE:
        code = _kernels.FAMILY_CODES[family]
        mu, sigma, ll, status, iters, gnorm = _kernels.ls_fit_rows(X, r, code)
        params = np.column_stack([mu, sigma])
        params[status != STATUS_OK] = np.nan
        out = params, ll, status, iters, gnorm
    elif family == "gamma":
        out = _gamma_batch(X)
    else:
        out = _invgauss_batch(X)
    params, ll, status, iters, gnorm = out
    return BatchFit(family, params, ll, np.asarray(status, dtype=np.int64), iters, gnorm)


def fit_ml(family, sample):
    """Maximum likelihood fit of ``family`` to ``sample``.

    Parameters
    ----------
    family : str
        ``normal``, ``logistic``, ``sev``, ``gamma`` or ``inverse_gaussian``.
    sample : Sample or array_like
        Plain arrays are taken as complete samples.

    Returns
    -------
    FitResult

    Raises
    ------
    DegenerateSampleError
        All values identical, or the estimate is otherwise undefined.
    NonConvergenceError
        The solver reached its iteration cap; ``diagnostics`` holds the last
        iterate and scaled gradient norm.
    """
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    batch = fit_ml_batch(family, sample.values[None, :], sample.r)
    status = int(batch.status[0])
    if status == STATUS_DEGENERATE:
        raise DegenerateSampleError(f"{family} estimate undefined for this sample (constant data)")
    if status == STATUS_NOT_CONVERGED:
        raise NonConvergenceError(
            f"{family} fit did not converge",
            diagnostics={"iterations": int(batch.iterations[0]),
                         "gradient_norm": float(batch.gradient_norm[0])})
    return FitResult(
        estimate=Kernel(family, tuple(batch.params[0])),
        loglik=float(batch.loglik[0]),
        converged=True,
        iterations=int(batch.iterations[0]),
        gradient_norm=float(batch.gradient_norm[0]),
        shape=sample.shape,
    )


def loglik(kernel, sample):
    """Log-likelihood of ``sample`` under ``kernel``, honoring Type-II censoring."""
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    ev = sample.events
    total = float(np.sum(kernel.logpdf(ev)))
    if sample.r is not None:
        c = sample.n - sample.r
        total += c * float(np.log(kernel.sf(ev[-1])))
    return total
