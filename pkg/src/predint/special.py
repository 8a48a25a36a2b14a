"""Special functions: digamma, trigamma and the regularized incomplete gamma.

The scalar functions below are written against :mod:`math` only so that the
numba backend can compile them unchanged (see ``predint._kernels._numba``).
The ``*_v`` variants are vectorized numpy counterparts used by the numpy
backend.

Accuracy on x > 0 is about 1e-15 relative for digamma/trigamma away from the
digamma root near 1.4616, and about 1e-14 relative for the incomplete gamma
ratios.
"""

import math

import numpy as np

__all__ = [
    "digamma",
    "trigamma",
    "gammainc_lower",
    "gammainc_upper",
    "digamma_v",
    "trigamma_v",
    "log_minus_digamma",
    "log_minus_digamma_v",
    "inv_minus_trigamma",
    "inv_minus_trigamma_v",
]

_SHIFT = 10.0
_EPS = 1e-16
_TINY = 1e-300
_MAXITER = 100000


def digamma(x):
    """Digamma function psi(x) for x > 0."""
    if x <= 0.0:
        return math.nan
    acc = 0.0
    while x < _SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv2 * (
        1.0 / 12.0
        - inv2 * (1.0 / 120.0
                  - inv2 * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0
                                      - inv2 * (1.0 / 132.0
                                                - inv2 * (691.0 / 32760.0
                                                          - inv2 / 12.0)))))
    )
    return acc + math.log(x) - 0.5 * inv - series


def trigamma(x):
    """Trigamma function psi_1(x) for x > 0."""
    if x <= 0.0:
        return math.nan
    acc = 0.0
    while x < _SHIFT:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv * inv2 * (
        1.0 / 6.0
        - inv2 * (1.0 / 30.0
                  - inv2 * (1.0 / 42.0
                            - inv2 * (1.0 / 30.0
                                      - inv2 * (5.0 / 66.0
                                                - inv2 * (691.0 / 2730.0
                                                          - inv2 * 7.0 / 6.0)))))
    )
    return acc + inv + 0.5 * inv2 + series


def _digamma_tail(inv, inv2):
    # psi(x) = log(x) - 1/(2x) - _digamma_tail
    return inv2 * (
        1.0 / 12.0
        - inv2 * (1.0 / 120.0
                  - inv2 * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0
                                      - inv2 * (1.0 / 132.0
                                                - inv2 * (691.0 / 32760.0
                                                          - inv2 / 12.0)))))
    )


def _trigamma_tail(inv, inv2):
    # psi_1(x) = 1/x + 1/(2x^2) + _trigamma_tail
    return inv * inv2 * (
        1.0 / 6.0
        - inv2 * (1.0 / 30.0
                  - inv2 * (1.0 / 42.0
                            - inv2 * (1.0 / 30.0
                                      - inv2 * (5.0 / 66.0
                                                - inv2 * (691.0 / 2730.0
                                                          - inv2 * 7.0 / 6.0)))))
    )


def log_minus_digamma(x):
    """``log(x) - psi(x)`` without cancellation for large ``x``."""
    if x <= 0.0:
        return math.nan
    if x < _SHIFT:
        return math.log(x) - digamma(x)
    inv = 1.0 / x
    return 0.5 * inv + _digamma_tail(inv, inv * inv)


def inv_minus_trigamma(x):
    """``1/x - psi_1(x)``, the derivative of :func:`log_minus_digamma`."""
    if x <= 0.0:
        return math.nan
    if x < _SHIFT:
        return 1.0 / x - trigamma(x)
    inv = 1.0 / x
    inv2 = inv * inv
    return -(0.5 * inv2 + _trigamma_tail(inv, inv2))


def _stirling_error(a):
    # lgamma(a) - [(a - 0.5) log a - a + 0.5 log(2 pi)], valid for a >= 10
    inv = 1.0 / a
    inv2 = inv * inv
    return inv * (1.0 / 12.0
                  - inv2 * (1.0 / 360.0
                            - inv2 * (1.0 / 1260.0
                                      - inv2 * (1.0 / 1680.0
                                                - inv2 / 1188.0))))


def _gamma_prefactor(a, x):
    # x**a * exp(-x) / Gamma(a)
    if a < _SHIFT:
        return math.exp(a * math.log(x) - x - math.lgamma(a))
    t = x / a
    u = t - 1.0
    # a * (log(x/a) - x/a + 1); log1p form only where it avoids cancellation
    if abs(u) < 0.5:
        expo = a * (math.log1p(u) - u)
    else:
        expo = a * (math.log(t) - u)
    return math.exp(expo - _stirling_error(a)) * math.sqrt(a / (2.0 * math.pi))


def _series_lower(a, x):
    # P(a, x) by the power series; converges fast for x < a + 1
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * _gamma_prefactor(a, x)


def _cf_upper(a, x):
    # Q(a, x) by the Legendre continued fraction (modified Lentz)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * _gamma_prefactor(a, x)


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a)."""
    if a <= 0.0 or x < 0.0 or math.isnan(x):
        return math.nan
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _series_lower(a, x)
    return 1.0 - _cf_upper(a, x)


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0.0 or x < 0.0 or math.isnan(x):
        return math.nan
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _series_lower(a, x)
    return _cf_upper(a, x)


def digamma_v(x):
    """Vectorized :func:`digamma`."""
    x = np.array(x, dtype=float, copy=True)
    out = np.where(x > 0.0, 0.0, np.nan)
    x = np.where(x > 0.0, x, np.nan)
    small = x < _SHIFT
    while np.any(small):
        out[small] -= 1.0 / x[small]
        x[small] += 1.0
        small = x < _SHIFT
    inv2 = 1.0 / (x * x)
    series = inv2 * (
        1.0 / 12.0
        - inv2 * (1.0 / 120.0
                  - inv2 * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0
                                      - inv2 * (1.0 / 132.0
                                                - inv2 * (691.0 / 32760.0
                                                          - inv2 / 12.0)))))
    )
    return out + np.log(x) - 0.5 / x - series


def trigamma_v(x):
    """Vectorized :func:`trigamma`."""
    x = np.array(x, dtype=float, copy=True)
    out = np.where(x > 0.0, 0.0, np.nan)
    x = np.where(x > 0.0, x, np.nan)
    small = x < _SHIFT
    while np.any(small):
        out[small] += 1.0 / (x[small] * x[small])
        x[small] += 1.0
        small = x < _SHIFT
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv * inv2 * (
        1.0 / 6.0
        - inv2 * (1.0 / 30.0
                  - inv2 * (1.0 / 42.0
                            - inv2 * (1.0 / 30.0
                                      - inv2 * (5.0 / 66.0
                                                - inv2 * (691.0 / 2730.0
                                                          - inv2 * 7.0 / 6.0)))))
    )
    return out + inv + 0.5 * inv2 + series


def log_minus_digamma_v(x):
    """Vectorized :func:`log_minus_digamma`."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / x
        big = 0.5 * inv + _digamma_tail(inv, inv * inv)
        small = np.log(np.where(x > 0, x, np.nan)) - digamma_v(np.minimum(x, _SHIFT))
    return np.where(x >= _SHIFT, big, np.where(x > 0, small, np.nan))


def inv_minus_trigamma_v(x):
    """Vectorized :func:`inv_minus_trigamma`."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / x
        inv2 = inv * inv
        big = -(0.5 * inv2 + _trigamma_tail(inv, inv2))
        small = inv - trigamma_v(np.minimum(x, _SHIFT))
    return np.where(x >= _SHIFT, big, np.where(x > 0, small, np.nan))
