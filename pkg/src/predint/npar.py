"""Distribution-free prediction: order-statistic intervals and conformal regions.

Conformal regions use leave-one-out nonconformity scores over the augmented
sample ``Z = (X_1, ..., X_n, y)``.  A candidate ``y`` belongs to the region
when fewer than ``(1 - alpha)(n + 1)`` of the ``n + 1`` scores fall strictly
below its own score ``d(X, y)``.  The randomized variant counts scores tied
with ``d(X, y)`` (its own included) with weight ``U``, one uniform per call.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .boot import as_policy
from .errors import InvalidParameterError, InvalidProbabilityError

__all__ = [
    "OrderStatInterval",
    "NonconformityMeasure",
    "MEAN_DEVIATION",
    "MEDIAN_DEVIATION",
    "ConformalRegion",
    "order_stat_interval",
    "conformal_region",
    "conformal_counts",
    "GRID_POINTS",
]

GRID_POINTS = 10_000


@dataclass(frozen=True)
class OrderStatInterval:
    """``(X_(r), X_(s))`` with exact coverage ``(s - r) / (n + 1)`` for continuous data."""

    lower: float
    upper: float
    r: int
    s: int
    n: int

    @property
    def coverage(self):
        return (self.s - self.r) / (self.n + 1)

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        return (y >= self.lower) & (y <= self.upper)


def order_stat_interval(sample, r, s):
    """Interval between the ``r``-th and ``s``-th smallest observations (1-based).

    Raises
    ------
    InvalidParameterError
        Unless ``1 <= r < s <= n``.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if not (isinstance(r, (int, np.integer)) and isinstance(s, (int, np.integer))):
        raise InvalidParameterError("r and s must be integers")
    if not 1 <= r < s <= n:
        raise InvalidParameterError(f"need 1 <= r < s <= n, got r={r}, s={s}, n={n}")
    if np.any(np.diff(x) == 0):
        warnings.warn("sample has ties; the coverage formula assumes continuous data",
                      RuntimeWarning, stacklevel=2)
    return OrderStatInterval(float(x[r - 1]), float(x[s - 1]), int(r), int(s), n)


@dataclass(frozen=True)
class NonconformityMeasure:
    """Distance ``d(data, point)`` between a point and a data set.

    ``func`` must not depend on the order of ``data``.  ``name`` identifies
    built-in measures (``mean`` and ``median``), which have exact region
    boundaries; any other name is treated as custom and scanned on a grid.
    """

    name: str
    func: Callable[[np.ndarray, float], float]

    def __call__(self, data, point):
        return float(self.func(np.asarray(data, dtype=float), float(point)))

    @property
    def builtin(self):
        return self in (MEAN_DEVIATION, MEDIAN_DEVIATION)


MEAN_DEVIATION = NonconformityMeasure("mean", lambda d, p: abs(float(np.mean(d)) - p))
MEDIAN_DEVIATION = NonconformityMeasure("median", lambda d, p: abs(float(np.median(d)) - p))


# ---------------------------------------------------------------------------
# leave-one-out scores
# ---------------------------------------------------------------------------

def _scores_mean(x, y):
    """Rows of ``n + 1`` leave-one-out scores (last column for ``y``), one row per ``y``."""
    n = x.size
    S = x.sum()
    y = y[:, None]
    d_data = np.abs((S - x[None, :] + y) / n - x[None, :])
    d_new = np.abs(S / n - y)
    return d_data, d_new[:, 0]


def _loo_median_pieces(x):
    """For each ``i``, the sorted remaining values ``w`` of ``x`` without ``x_i``."""
    n = x.size
    idx = np.arange(n)
    return np.stack([np.delete(x, i) for i in idx]) if n > 1 else np.empty((1, 0))


def _median_with(w, y):
    """Median of ``w_i`` plus ``y``, for each row ``w_i`` (sorted) and each ``y``.

    With ``n`` values after insertion, the middle order statistic(s) are
    clipped versions of ``y`` between neighbouring values of ``w``.
    """
    n = w.shape[1] + 1
    pad = np.concatenate([np.full((w.shape[0], 1), -np.inf), w,
                          np.full((w.shape[0], 1), np.inf)], axis=1)

    def kth(k):
        # k-th smallest (1-based) of w plus y is clip(y, w_{k-1}, w_k)
        return np.clip(y[:, None], pad[None, :, k - 1], pad[None, :, k])

    if n % 2:
        return kth((n + 1) // 2)
    return 0.5 * (kth(n // 2) + kth(n // 2 + 1))


def _scores_median(x, y):
    w = _loo_median_pieces(x)
    med = _median_with(w, y)
    d_data = np.abs(med - x[None, :])
    d_new = np.abs(float(np.median(x)) - y)
    return d_data, d_new


def _scores_custom(measure, x, y):
    n = x.size
    d_data = np.empty((y.size, n))
    d_new = np.empty(y.size)
    for j, yj in enumerate(y):
        z = np.append(x, yj)
        for i in range(n):
            d_data[j, i] = measure(np.delete(z, i), x[i])
        d_new[j] = measure(x, yj)
    return d_data, d_new


def conformal_counts(sample, y, measure=MEAN_DEVIATION):
    """Scores strictly below, and tied with, ``d(X, y)`` among the ``n + 1`` scores.

    Returns ``(count_less, count_equal)``; ``count_equal`` includes the
    candidate's own score.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if measure == MEAN_DEVIATION:
        d_data, d_new = _scores_mean(x, y)
    elif measure == MEDIAN_DEVIATION:
        d_data, d_new = _scores_median(x, y)
    else:
        d_data, d_new = _scores_custom(measure, x, y)
    less = (d_data < d_new[:, None]).sum(axis=1)
    equal = (d_data == d_new[:, None]).sum(axis=1) + 1
    return less, equal


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConformalRegion:
    """A conformal prediction region.

    Attributes
    ----------
    intervals : tuple of (float, float)
        Closures of the disjoint, sorted pieces of the region.  Endpoints
        may be infinite for built-in measures; custom measures are limited
        to the search window.  A single point appears as ``(c, c)``.
        Whether an endpoint itself belongs to the region is decided by
        :meth:`contains`.
    alpha : float
    randomized : bool
    u : float or None
        The uniform used by the randomized criterion.
    measure : NonconformityMeasure
    data : ndarray
        The sorted sample.
    """

    intervals: tuple
    alpha: float
    randomized: bool
    u: float | None
    measure: NonconformityMeasure
    data: np.ndarray

    @property
    def empty(self):
        return len(self.intervals) == 0

    @property
    def lower(self):
        return self.intervals[0][0] if self.intervals else math.nan

    @property
    def upper(self):
        return self.intervals[-1][1] if self.intervals else math.nan

    def contains(self, y):
        """Evaluate the rank criterion at ``y`` directly."""
        y = np.asarray(y, dtype=float)
        return _criterion(self.data, y.ravel(), self.measure, self.alpha, self.u).reshape(y.shape)


def _criterion(x, y, measure, alpha, u):
    less, equal = conformal_counts(x, y, measure)
    n = x.size
    stat = less if u is None else less + u * equal
    return stat < (1.0 - alpha) * (n + 1)


def _breakpoints(x, measure):
    n = x.size
    pts = [x, [x.mean(), np.median(x)]]
    if measure == MEAN_DEVIATION:
        if n > 1:
            pts.append((2.0 * x.sum() - (n + 1) * x) / (n - 1))
    else:
        # leave-one-out medians are piecewise linear in y with kinks at data
        # values; within a piece, |a + b y - x_i| = |M - y| has linear roots
        M = float(np.median(x))
        knots = np.concatenate([[x[0] - 2.0], x, [x[-1] + 2.0]])
        w = _loo_median_pieces(x)
        for lo, hi in zip(knots[:-1], knots[1:]):
            if not hi > lo:
                continue
            probe = np.array([lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)])
            med = _median_with(w, probe)
            b = (med[1] - med[0]) / (probe[1] - probe[0])
            a = med[0] - b * probe[0]
            # the outer pieces extend to infinity
            lo = -np.inf if lo < x[0] else lo
            hi = np.inf if hi > x[-1] else hi
            with np.errstate(divide="ignore", invalid="ignore"):
                r1 = (M - a + x) / (b + 1.0)
                r2 = np.where(b != 1.0, (x - a - M) / (b - 1.0), np.nan)
            for r in (r1, r2):
                keep = np.isfinite(r) & (r >= lo) & (r <= hi)
                pts.append(r[keep])
    out = np.unique(np.concatenate([np.asarray(p, dtype=float).ravel() for p in pts]))
    return out[np.isfinite(out)]


def _merge(points, inside_pt, inside_gap, lo_edge, hi_edge):
    """Union of intervals from membership of sorted points and the gaps between them.

    ``inside_gap`` has one entry more than ``points``: the gap before the
    first point, between consecutive points, and after the last.
    """
    intervals = []
    start = lo_edge if inside_gap[0] else None
    for k, c in enumerate(points):
        if inside_pt[k]:
            if start is None:
                start = c
        elif start is not None:
            intervals.append((start, c))
            start = None
        if inside_gap[k + 1]:
            if start is None:
                start = c
        elif start is not None:
            intervals.append((start, c))
            start = None
    if start is not None:
        intervals.append((start, hi_edge))
    return tuple((float(a), float(b)) for a, b in intervals)


def conformal_region(sample, measure=MEAN_DEVIATION, alpha=0.1, randomize=False, rng=None):
    """Conformal prediction region ``{y : count_less(y) [+ U count_equal(y)] < (1 - alpha)(n + 1)}``.

    Parameters
    ----------
    sample : array_like
        ``n >= 1`` exchangeable observations.
    measure : NonconformityMeasure
    alpha : float
    randomize : bool
        Blend the left-limit and right-limit criteria with one uniform ``U``.
    rng : RngPolicy, int or numpy Generator, optional
        Source of ``U``; required when ``randomize``.

    Returns
    -------
    ConformalRegion
        Possibly empty.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size < 1 or not np.all(np.isfinite(x)):
        raise InvalidParameterError("sample must hold at least one finite value")
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidProbabilityError("alpha must lie in (0, 1)")
    u = None
    if randomize:
        if rng is None:
            raise InvalidParameterError("randomized regions need an rng")
        gen = rng if isinstance(rng, np.random.Generator) else as_policy(rng).generator()
        u = float(gen.random())

    def inside(y):
        return _criterion(x, np.asarray(y, dtype=float), measure, alpha, u)

    if measure.builtin:
        pts = _breakpoints(x, measure)
        span = max(float(np.ptp(pts)), 1.0)
        gaps = np.concatenate([[pts[0] - span], 0.5 * (pts[:-1] + pts[1:]), [pts[-1] + span]])
        intervals = _merge(pts, inside(pts), inside(gaps), -math.inf, math.inf)
    else:
        rng_ = float(np.ptp(x)) or 1.0
        grid = np.linspace(x[0] - 3.0 * rng_, x[-1] + 3.0 * rng_, GRID_POINTS)
        ok = inside(grid)
        intervals = []
        k = 0
        while k < grid.size:
            if ok[k]:
                j = k
                while j + 1 < grid.size and ok[j + 1]:
                    j += 1
                intervals.append((float(grid[k]), float(grid[j])))
                k = j + 1
            else:
                k += 1
        intervals = tuple(intervals)
    return ConformalRegion(intervals, alpha, bool(randomize), u, measure, x)
