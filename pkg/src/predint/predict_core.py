"""Family-generic continuous prediction: plug-in, calibration bootstrap,
direct bootstrap, and the calibration predictive cdf.

Every construction yields either a :class:`PredictionBound` or a
:class:`PredictiveCdf`.  A bound at level ``1 - alpha`` is the ``1 - alpha``
quantile (upper) or ``alpha`` quantile (lower) of the matching predictive
distribution; two-sided intervals are equal-tailed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .boot import BootstrapBatch, as_policy, calibration_u_values, parametric_bootstrap
from .dist import (
    LOCATION_SCALE,
    family_cdf,
    family_isf,
    family_quantile,
    family_sf,
    standard_isf_log,
    standard_logsf,
)
from .errors import EmptyBatchError, InvalidParameterError, InvalidProbabilityError
from .fit import Sample

__all__ = [
    "SIDES",
    "PredictionBound",
    "PredictionInterval",
    "PredictiveCdf",
    "MixturePredictiveCdf",
    "empirical_quantile",
    "bounds_from_quantile",
    "plugin_bound",
    "plugin_cdf",
    "calibration_bootstrap_bound",
    "calibration_quantile",
    "direct_bootstrap_cdf",
    "direct_bootstrap_bound",
    "calibration_predictive_cdf",
]

SIDES = ("upper", "lower", "two-sided")
_XTOL = 1e-12
_SURVIVAL_SWITCH = 0.5


@dataclass(frozen=True)
class PredictionBound:
    """A one-sided prediction bound.

    Attributes
    ----------
    side : {"lower", "upper"}
    level : float
        Nominal coverage ``1 - alpha`` of this bound on its own.
    endpoint : float
    method : str
    diagnostics : dict
        Method details such as ``B``, ``failures`` and ``u_tilde``.
    """

    side: str
    level: float
    endpoint: float
    method: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.side not in ("lower", "upper"):
            raise InvalidParameterError(f"side must be 'lower' or 'upper', got {self.side!r}")
        if not 0.0 < self.level < 1.0:
            raise InvalidProbabilityError("level must lie in (0, 1)")
        object.__setattr__(self, "endpoint", float(self.endpoint))

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        return y <= self.endpoint if self.side == "upper" else y >= self.endpoint

    def to_dict(self):
        return {"side": self.side, "level": self.level, "endpoint": self.endpoint,
                "method": self.method, "diagnostics": _jsonable(self.diagnostics)}


@dataclass(frozen=True)
class PredictionInterval:
    """Equal-tailed two-sided interval built from two one-sided bounds."""

    lower: PredictionBound
    upper: PredictionBound

    @property
    def level(self):
        return self.lower.level + self.upper.level - 1.0

    @property
    def method(self):
        return self.lower.method

    def contains(self, y):
        return self.lower.contains(y) & self.upper.contains(y)

    def to_dict(self):
        return {"side": "two-sided", "level": self.level,
                "lower": self.lower.to_dict(), "upper": self.upper.to_dict()}


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        out[k] = v
    return out


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidProbabilityError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def bounds_from_quantile(qfun, alpha, side, method, diagnostics=None):
    """Turn a quantile function into a bound or an equal-tailed interval.

    ``qfun(p, side)`` returns ``(endpoint, extra_diagnostics)``.
    """
    alpha = _check_alpha(alpha)
    if side not in SIDES:
        raise InvalidParameterError(f"side must be one of {SIDES}, got {side!r}")
    base = dict(diagnostics or {})

    def one(s, a):
        p = 1.0 - a if s == "upper" else a
        endpoint, extra = qfun(p, s)
        return PredictionBound(s, 1.0 - a, endpoint, method, {**base, **(extra or {})})

    if side == "two-sided":
        return PredictionInterval(one("lower", 0.5 * alpha), one("upper", 0.5 * alpha))
    return one(side, alpha)


def empirical_quantile(values, p):
    """Type-1 sample quantile ``inf{u : F_hat(u) >= p}``."""
    v = np.sort(np.asarray(values, dtype=float))
    m = v.size
    if m == 0:
        raise EmptyBatchError("no values to take a quantile of")
    if not 0.0 <= p <= 1.0:
        raise InvalidProbabilityError("p must lie in [0, 1]")
    # guard against p * m landing one ulp above an integer
    k = max(1, math.ceil(p * m - 1e-9))
    return float(v[min(k, m) - 1])


# ---------------------------------------------------------------------------
# predictive cdfs
# ---------------------------------------------------------------------------

class PredictiveCdf:
    """Evaluable, nondecreasing predictive cdf with quantile inversion.

    Parameters
    ----------
    cdf : callable
        Vectorized ``y -> F_p(y)``.
    provenance : str
        Which construction produced it (``plugin``, ``direct_bootstrap``,
        ``calibration``, ``gpq``, ``fiducial``...).
    loc, scale : float
        Standardizing transform used by the root finder, ``y = loc + scale * t``.
        Quantiles are solved in ``t`` so they move exactly with the data under
        location-scale changes.
    positive : bool
        Support is ``(0, inf)`` rather than the real line.
    """

    def __init__(self, cdf, provenance, loc=0.0, scale=1.0, positive=False):
        self._cdf = cdf
        self.provenance = provenance
        self.loc = float(loc)
        self.scale = float(scale)
        self.positive = bool(positive)

    def __call__(self, y):
        return self.cdf(y)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        return np.clip(self._cdf(y), 0.0, 1.0)

    def _std_cdf(self, t):
        return float(self.cdf(self.loc + self.scale * t))

    def _bracket(self, p):
        if self.positive:
            lo, hi = 0.5, 2.0
            for _ in range(2000):
                if self._std_cdf(lo) < p:
                    break
                lo, hi = 0.5 * lo, lo
            for _ in range(2000):
                if self._std_cdf(hi) >= p:
                    break
                lo, hi = hi, 2.0 * hi
        else:
            lo, hi = -1.0, 1.0
            for _ in range(2000):
                if self._std_cdf(lo) < p:
                    break
                lo, hi = 2.0 * lo, lo
            for _ in range(2000):
                if self._std_cdf(hi) >= p:
                    break
                lo, hi = hi, 2.0 * hi
        return lo, hi

    def _std_quantile(self, p, xtol):
        lo, hi = self._bracket(p)
        for _ in range(400):
            if hi - lo <= xtol * max(1.0, abs(hi)):
                break
            mid = 0.5 * (lo + hi)
            if self._std_cdf(mid) >= p:
                hi = mid
            else:
                lo = mid
        return hi

    def quantile(self, p, xtol=_XTOL):
        """``inf{y : F_p(y) >= p}`` by monotone bracketing; p = 0 or 1 give the support ends."""
        scalar = np.ndim(p) == 0
        ps = np.atleast_1d(np.asarray(p, dtype=float))
        if np.any(~((ps >= 0.0) & (ps <= 1.0))):
            raise InvalidProbabilityError("p must lie in [0, 1]")
        out = np.empty(ps.shape)
        for i, pi in enumerate(ps):
            if pi <= 0.0:
                out[i] = 0.0 if self.positive else -math.inf
            elif pi >= 1.0:
                out[i] = math.inf
            else:
                out[i] = self.loc + self.scale * self._std_quantile(pi, xtol)
        return float(out[0]) if scalar else out

    def bound(self, alpha, side="upper", method=None, diagnostics=None):
        """Prediction bound (or equal-tailed interval) read off this cdf."""
        return bounds_from_quantile(lambda p, s: (self.quantile(p), None), alpha, side,
                                    method or self.provenance, diagnostics)


class MixturePredictiveCdf(PredictiveCdf):
    """Equal-weight mixture ``F_p(y) = mean_b G(y; theta_b)``.

    ``components`` holds one parameter pair per row in the family's own
    parameterization.  Location-scale and gamma mixtures use the compiled
    kernels; inverse Gaussian mixtures (whose ``mu`` may be infinite) are
    evaluated with numpy.
    """

    def __init__(self, family, components, provenance, loc=0.0, scale=1.0):
        comps = np.asarray(components, dtype=float).reshape(-1, 2)
        if comps.shape[0] == 0:
            raise EmptyBatchError("mixture has no components")
        positive = family not in LOCATION_SCALE
        if positive:
            loc = 0.0
        super().__init__(None, provenance, loc, scale, positive)
        self.family = family
        self.components = comps
        self._code = _kernels.FAMILY_CODES.get(family)
        # components in standardized units t = (y - loc) / scale
        if family in LOCATION_SCALE:
            A = (comps[:, 0] - self.loc) / self.scale
            Bc = comps[:, 1] / self.scale
        elif family == "gamma":
            A = comps[:, 0]
            Bc = comps[:, 1] * self.scale
        else:
            A = comps[:, 0] / self.scale
            Bc = comps[:, 1] / self.scale
        self._A = np.ascontiguousarray(A)
        self._B = np.ascontiguousarray(Bc)

    def __len__(self):
        return self.components.shape[0]

    def _std_cdf_array(self, t):
        t = np.ascontiguousarray(np.atleast_1d(t), dtype=float)
        if self._code is not None:
            return _kernels.mixture_cdf(self._code, t.ravel(), self._A, self._B).reshape(t.shape)
        return family_cdf(self.family, t.ravel()[:, None], self._A[None, :],
                          self._B[None, :]).mean(axis=1).reshape(t.shape)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        t = (y - self.loc) / self.scale
        out = self._std_cdf_array(t)
        return np.clip(out.reshape(y.shape), 0.0, 1.0) if y.ndim else float(np.clip(out[0], 0.0, 1.0))

    def _std_cdf(self, t):
        return float(self._std_cdf_array(np.array([t]))[0])

    def _std_quantile(self, p, xtol):
        if self._code is None:
            return super()._std_quantile(p, xtol)
        if self.positive:
            lo, hi = 0.5, 2.0
        else:
            lo, hi = -1.0, 1.0
        t = _kernels.mixture_quantile(self._code, float(p), self._A, self._B, lo, hi, xtol)
        return float(t)


def plugin_cdf(fit):
    """Predictive cdf that treats the estimate as the truth."""
    kernel = fit.estimate
    loc, scale = _standardizer(fit)
    return MixturePredictiveCdf(kernel.family, np.asarray(kernel.params)[None, :], "plugin",
                                loc, scale)


def _standardizer(fit):
    fam = fit.family
    th = fit.theta
    if fam in LOCATION_SCALE:
        return th[0], th[1]
    if fam == "gamma":
        return 0.0, th[0] / th[1]
    return 0.0, th[0]


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def plugin_bound(fit, alpha, side="upper"):
    """Plug-in bound: the fitted model's ``1 - alpha`` (upper) or ``alpha`` (lower) quantile."""
    kernel = fit.estimate
    return bounds_from_quantile(lambda p, s: (float(kernel.quantile(p)), None),
                                alpha, side, "plugin")


def calibration_quantile(fit, batch, p):
    """Solve ``H(u) = p`` for the u*-free calibration quantile.

    ``H(u) = mean_b G(G^{-1}(u; theta*_b); theta_hat)`` is the bootstrap cdf
    of ``u*``.  For ``p > 0.5`` the equation is solved in the complementary
    variable ``1 - u`` so that levels near one keep full relative precision.
    Returns ``(u_tilde, 1 - u_tilde)``.
    """
    batch.require_nonempty()
    fam = fit.family
    th = fit.theta
    A, Bc = batch.estimates[:, 0], batch.estimates[:, 1]
    upper = p > _SURVIVAL_SWITCH
    target = 1.0 - p if upper else p

    def h(v):
        if upper:  # mean survival of the composed map at complementary level v
            return float(np.mean(family_sf(fam, family_isf(fam, v, A, Bc), *th)))
        return float(np.mean(family_cdf(fam, family_quantile(fam, v, A, Bc), *th)))

    lo, hi = 0.0, 1.0
    # monotone bisection in v; h is increasing in v in both branches
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) >= target:
            hi = mid
        else:
            lo = mid
    if upper:
        # smallest u with H(u) >= p is 1 - (largest v with Hbar(v) <= 1 - p)
        q = lo if h(hi) > target else hi
        return 1.0 - q, q
    return hi, 1.0 - hi


def calibration_bootstrap_bound(sample, fit, B=5000, alpha=0.05, side="upper", rng=0,
                                u_method="sampled", batch=None, threads=None):
    """Calibration-bootstrap bound ``G^{-1}(u_tilde; theta_hat)``.

    Parameters
    ----------
    sample : Sample, array_like or None
        The data behind ``fit``; checked for consistency when given.
        Arrays are read as complete samples.
    fit : FitResult
    B : int
        Bootstrap replicates (ignored when ``batch`` is supplied).
    alpha : float
    side : {"upper", "lower", "two-sided"}
    rng : RngPolicy or int
        Child 0 seeds the refits, child 1 the predictand draws.
    u_method : {"sampled", "integrated"}
        ``sampled`` takes the type-1 empirical quantile of the ``u*`` values;
        ``integrated`` replaces the sampled predictand by its exact
        average, i.e. inverts the bootstrap cdf of ``u*`` directly.
    batch : BootstrapBatch, optional
        Reuse an existing batch.

    Returns
    -------
    PredictionBound or PredictionInterval
    """
    if sample is not None and not isinstance(sample, Sample):
        sample = Sample(sample)
    if sample is not None and sample.shape != fit.shape:
        raise InvalidParameterError("sample does not match the fitted shape")
    policy = as_policy(rng)
    if batch is None:
        batch = parametric_bootstrap(fit, fit.shape, B, policy.child(0), threads=threads)
    batch.require_nonempty()
    kernel = fit.estimate
    diag = {"B": batch.B, "failures": batch.failures, "u_method": u_method}
    if u_method == "sampled":
        u = batch.u_values
        if u is None:
            u = calibration_u_values(fit, batch, policy.child(1), threads=threads)

        def q(p, s):
            ut = empirical_quantile(u, p)
            return float(kernel.quantile(ut)), {"u_tilde": ut}
    elif u_method == "integrated":
        def q(p, s):
            ut, vt = calibration_quantile(fit, batch, p)
            if p > _SURVIVAL_SWITCH:
                endpoint = float(kernel.isf(vt))
            else:
                endpoint = float(kernel.quantile(ut))
            return endpoint, {"u_tilde": ut}
    else:
        raise InvalidParameterError("u_method must be 'sampled' or 'integrated'")
    return bounds_from_quantile(q, alpha, side, "calibration_bootstrap", diag)


def direct_bootstrap_cdf(fit, batch):
    """``F_p(y) = mean_b G(y; theta*_b)``: the bootstrap refits used as parameter draws."""
    if len(batch) == 0:
        raise EmptyBatchError("bootstrap batch has no retained replicates")
    loc, scale = _standardizer(fit)
    return MixturePredictiveCdf(batch.family, batch.estimates, "direct_bootstrap", loc, scale)


def direct_bootstrap_bound(fit, B=2000, alpha=0.05, side="upper", rng=0, batch=None,
                           threads=None):
    """Bound read off :func:`direct_bootstrap_cdf`."""
    policy = as_policy(rng)
    if batch is None:
        batch = parametric_bootstrap(fit, fit.shape, B, policy.child(0), threads=threads)
    cdf = direct_bootstrap_cdf(fit, batch)
    return cdf.bound(alpha, side, "direct_bootstrap", {"B": batch.B, "failures": batch.failures})


def calibration_predictive_cdf(fit, batch):
    """Predictive cdf of the calibration bootstrap.

    ``F_p(y) = mean_b G(G^{-1}(G(y; theta_hat); theta*_b); theta_hat)``.
    Where ``G(y; theta_hat) > 0.5`` the same composition is carried out with
    survival functions and their inverses, which keeps the upper tail finite
    and monotone down to survival probabilities near the smallest double.
    """
    if len(batch) == 0:
        raise EmptyBatchError("bootstrap batch has no retained replicates")
    fam = fit.family
    th = fit.theta
    A = batch.estimates[:, 0][None, :]
    Bc = batch.estimates[:, 1][None, :]

    def cdf(y):
        y = np.asarray(y, dtype=float)
        flat = y.ravel()
        u = np.asarray(family_cdf(fam, flat, *th))
        upper = u > _SURVIVAL_SWITCH
        out = np.empty(flat.shape)
        if np.any(~upper):
            ul = u[~upper][:, None]
            v = family_quantile(fam, ul, A, Bc)
            out[~upper] = family_cdf(fam, v, *th).mean(axis=1)
        if np.any(upper):
            if fam in LOCATION_SCALE:
                # log-survival composition: exact far past where the survival underflows
                ls = standard_logsf(fam, (flat[upper] - th[0]) / th[1])[:, None]
                v = A + Bc * standard_isf_log(fam, ls)
            else:
                s = np.asarray(family_sf(fam, flat[upper], *th))[:, None]
                v = family_isf(fam, s, A, Bc)
            out[upper] = 1.0 - family_sf(fam, v, *th).mean(axis=1)
        return out.reshape(y.shape)

    loc, scale = _standardizer(fit)
    return PredictiveCdf(cdf, "calibration", loc, scale, positive=fam not in LOCATION_SCALE)
