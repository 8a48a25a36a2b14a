"""numba-compiled hot kernels.

Family codes: 0 normal, 1 logistic, 2 smallest extreme value, 3 gamma
(shape, rate).  Location-scale fits run on standardized rows so results are
affine equivariant to rounding.
"""

import math

import numpy as np
from numba import njit

from .. import special

_digamma = njit(cache=True)(special.digamma)
_trigamma = njit(cache=True)(special.trigamma)
_stirling_error = njit(cache=True)(special._stirling_error)

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_MAXITER_GI = 100000
_EPS = 1e-16
_TINY = 1e-300

FIT_TOL = 1e-10
FIT_CONVERGED = 1e-8
MAX_ITER = 200


@njit(cache=True)
def _gamma_prefactor(a, x):
    # mirrors special._gamma_prefactor
    if a < 10.0:
        return math.exp(a * math.log(x) - x - math.lgamma(a))
    t = x / a
    u = t - 1.0
    if abs(u) < 0.5:
        expo = a * (math.log1p(u) - u)
    else:
        expo = a * (math.log(t) - u)
    return math.exp(expo - _stirling_error(a)) * math.sqrt(a / (2.0 * math.pi))


@njit(cache=True)
def _series_lower(a, x):
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAXITER_GI):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * _gamma_prefactor(a, x)


@njit(cache=True)
def _cf_upper(a, x):
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER_GI):
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


@njit(cache=True)
def gammainc_lower(a, x):
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _series_lower(a, x)
    return 1.0 - _cf_upper(a, x)


@njit(cache=True)
def _ndtri_approx(p):
    # Acklam's rational approximation, ~1e-9 relative; only used for starting values
    a1, a2, a3 = -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02
    a4, a5, a6 = 1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00
    b1, b2, b3 = -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02
    b4, b5 = 6.680131188771972e01, -1.328068155288572e01
    c1, c2, c3 = -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00
    c4, c5, c6 = -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00
    d1, d2, d3, d4 = 7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00, 3.754408661907416e00
    plow = 0.02425
    if p < plow:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) / \
            ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0)
    if p > 1.0 - plow:
        q = math.sqrt(-2.0 * math.log1p(-p))
        return -(((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) / \
            ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((a1 * r + a2) * r + a3) * r + a4) * r + a5) * r + a6) * q / \
        (((((b1 * r + b2) * r + b3) * r + b4) * r + b5) * r + 1.0)


@njit(cache=True)
def _std_quantile(code, p):
    if code == 0:
        return _ndtri_approx(p)
    if code == 1:
        return math.log(p / (1.0 - p))
    return math.log(-math.log1p(-p))


@njit(cache=True)
def _normal_mills(z):
    # phi(z) / (1 - Phi(z))
    if z < 26.0:
        s = 0.5 * math.erfc(z / _SQRT2)
        return math.exp(-0.5 * z * z - _LOG_SQRT_2PI) / s
    iz2 = 1.0 / (z * z)
    return z / (1.0 - iz2 * (1.0 - 3.0 * iz2 * (1.0 - 5.0 * iz2 * (1.0 - 7.0 * iz2))))


@njit(cache=True)
def _normal_logsf(z):
    if z < 26.0:
        return math.log(0.5 * math.erfc(z / _SQRT2))
    return -0.5 * z * z - _LOG_SQRT_2PI - math.log(_normal_mills(z))


@njit(cache=True)
def _event_terms(code, z):
    # log f(z), d/dz log f, d2/dz2 log f
    if code == 0:
        return -0.5 * z * z - _LOG_SQRT_2PI, -z, -1.0
    if code == 1:
        if z >= 0.0:
            e = math.exp(-z)
            logf = -z - 2.0 * math.log1p(e)
            F = 1.0 / (1.0 + e)
        else:
            e = math.exp(z)
            logf = z - 2.0 * math.log1p(e)
            F = e / (1.0 + e)
        return logf, 1.0 - 2.0 * F, -2.0 * F * (1.0 - F)
    ez = math.exp(z)
    return z - ez, 1.0 - ez, -ez


@njit(cache=True)
def _censor_terms(code, z):
    # log S(z), d/dz log S, d2/dz2 log S
    if code == 0:
        R = _normal_mills(z)
        return _normal_logsf(z), -R, z * R - R * R
    if code == 1:
        if z >= 0.0:
            e = math.exp(-z)
            logS = -z - math.log1p(e)
            F = 1.0 / (1.0 + e)
        else:
            e = math.exp(z)
            logS = -math.log1p(e)
            F = e / (1.0 + e)
        return logS, -F, -F * (1.0 - F)
    ez = math.exp(z)
    return -ez, -ez, -ez


@njit(cache=True)
def _ls_eval(code, z, r, c, mu, tau):
    # log-likelihood, gradient and Hessian in (mu, tau = log sigma) for standardized data
    sigma = math.exp(tau)
    ll = 0.0
    sh = 0.0
    shz = 0.0
    sdh = 0.0
    smix = 0.0
    stt = 0.0
    for i in range(r):
        w = (z[i] - mu) / sigma
        lf, h, dh = _event_terms(code, w)
        ll += lf - tau
        sh += h
        shz += h * w
        sdh += dh
        smix += h + dh * w
        stt += dh * w * w + h * w
    gmu = -sh / sigma
    gtau = -shz - r
    hmm = sdh / (sigma * sigma)
    hmt = smix / sigma
    htt = stt
    if c > 0:
        w = (z[r - 1] - mu) / sigma
        ls, g, dg = _censor_terms(code, w)
        ll += c * ls
        gmu -= c * g / sigma
        gtau -= c * g * w
        hmm += c * dg / (sigma * sigma)
        hmt += c * (g + dg * w) / sigma
        htt += c * (dg * w * w + g * w)
    return ll, gmu, gtau, hmm, hmt, htt


@njit(cache=True)
def _ls_loglik(code, z, r, c, mu, tau):
    sigma = math.exp(tau)
    ll = 0.0
    for i in range(r):
        w = (z[i] - mu) / sigma
        lf, h, dh = _event_terms(code, w)
        ll += lf - tau
    if c > 0:
        w = (z[r - 1] - mu) / sigma
        ls, g, dg = _censor_terms(code, w)
        ll += c * ls
    return ll


@njit(cache=True)
def _ls_fit_row(x, r, code):
    n = x.shape[0]
    c = n - r
    center = 0.0
    for i in range(r):
        center += x[i]
    center /= r
    var = 0.0
    for i in range(r):
        var += (x[i] - center) ** 2
    scale = math.sqrt(var / r)
    if not (scale > 0.0) or not math.isfinite(scale):
        return math.nan, math.nan, math.nan, 1, 0, math.nan
    z = np.empty(n)
    for i in range(n):
        z[i] = (x[i] - center) / scale
    # least squares of the event order statistics on standard quantiles
    zs = np.sort(z[:r])
    mq = 0.0
    mz = 0.0
    for i in range(r):
        mq += _std_quantile(code, (i + 0.5) / n)
        mz += zs[i]
    mq /= r
    mz /= r
    sqq = 0.0
    sqz = 0.0
    for i in range(r):
        dq = _std_quantile(code, (i + 0.5) / n) - mq
        sqq += dq * dq
        sqz += dq * (zs[i] - mz)
    slope = sqz / sqq if sqq > 0.0 else 1.0
    if not (slope > 0.0):
        slope = 1.0
    mu = mz - slope * mq
    tau = math.log(slope)

    gnorm = math.inf
    it = 0
    ll = 0.0
    for it in range(1, MAX_ITER + 1):
        ll, gmu, gtau, hmm, hmt, htt = _ls_eval(code, z, r, c, mu, tau)
        sigma = math.exp(tau)
        gnorm = max(abs(sigma * gmu), abs(gtau)) / n
        if gnorm <= FIT_TOL:
            break
        det = hmm * htt - hmt * hmt
        if hmm < 0.0 and det > 0.0:
            dmu = -(htt * gmu - hmt * gtau) / det
            dtau = -(-hmt * gmu + hmm * gtau) / det
        else:
            # steepest ascent in scaled coordinates
            dmu = sigma * sigma * gmu / n
            dtau = gtau / n
        step = 1.0
        moved = False
        for _ in range(60):
            nmu = mu + step * dmu
            ntau = tau + step * dtau
            nll = _ls_loglik(code, z, r, c, nmu, ntau)
            if math.isfinite(nll) and nll >= ll - 1e-12 * abs(ll):
                mu = nmu
                tau = ntau
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    ll, gmu, gtau, hmm, hmt, htt = _ls_eval(code, z, r, c, mu, tau)
    gnorm = max(abs(math.exp(tau) * gmu), abs(gtau)) / n
    status = 0 if gnorm <= FIT_CONVERGED else 2
    return (center + scale * mu, scale * math.exp(tau), ll - r * math.log(scale),
            status, it, gnorm)


@njit(cache=True, nogil=True)
def ls_fit_rows(x, r, code):
    """Location-scale ML for every row of ``x``; rows sorted when ``r < n``."""
    m = x.shape[0]
    mu = np.empty(m)
    sigma = np.empty(m)
    loglik = np.empty(m)
    status = np.empty(m, dtype=np.int64)
    iters = np.empty(m, dtype=np.int64)
    gnorm = np.empty(m)
    for k in range(m):
        a, b, ll, st, it, g = _ls_fit_row(x[k], r, code)
        mu[k] = a
        sigma[k] = b
        loglik[k] = ll
        status[k] = st
        iters[k] = it
        gnorm[k] = g
    return mu, sigma, loglik, status, iters, gnorm


_digamma_tail = njit(cache=True)(special._digamma_tail)
_trigamma_tail = njit(cache=True)(special._trigamma_tail)


@njit(cache=True)
def _log_minus_digamma(x):
    if x < 10.0:
        return math.log(x) - _digamma(x)
    inv = 1.0 / x
    return 0.5 * inv + _digamma_tail(inv, inv * inv)


@njit(cache=True)
def _inv_minus_trigamma(x):
    if x < 10.0:
        return 1.0 / x - _trigamma(x)
    inv = 1.0 / x
    inv2 = inv * inv
    return -(0.5 * inv2 + _trigamma_tail(inv, inv2))


@njit(cache=True)
def _gamma_shape_one(s):
    if not (s > 0.0) or not math.isfinite(s):
        return math.nan, 1, 0, math.nan
    alpha = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    lo = 0.0
    hi = math.inf
    f = _log_minus_digamma(alpha) - s
    it = 0
    for it in range(1, MAX_ITER + 1):
        if f > 0.0:
            lo = alpha
        else:
            hi = alpha
        fp = _inv_minus_trigamma(alpha)
        new = alpha - f / fp if fp < 0.0 else math.nan
        if not (new > lo and new < hi):
            new = 2.0 * alpha if math.isinf(hi) else (
                0.5 * hi if lo == 0.0 else math.sqrt(lo * hi))
        done = abs(new - alpha) <= 1e-15 * alpha
        alpha = new
        f = _log_minus_digamma(alpha) - s
        if done or abs(f) * alpha <= 1e-15:
            break
    g = abs(f) * alpha
    return alpha, 0 if g <= FIT_CONVERGED else 2, it, g


@njit(cache=True, nogil=True)
def gamma_shape(s):
    """Solve log(a) - digamma(a) = s elementwise."""
    m = s.shape[0]
    alpha = np.empty(m)
    status = np.empty(m, dtype=np.int64)
    iters = np.empty(m, dtype=np.int64)
    gnorm = np.empty(m)
    for k in range(m):
        a, st, it, g = _gamma_shape_one(s[k])
        alpha[k] = a
        status[k] = st
        iters[k] = it
        gnorm[k] = g
    return alpha, status, iters, gnorm


@njit(cache=True)
def _comp_cdf_pdf(code, y, a, b):
    if code == 3:
        if y <= 0.0:
            return 0.0, 0.0
        t = b * y
        F = gammainc_lower(a, t)
        f = math.exp(a * math.log(t) - t - math.lgamma(a)) / y
        return F, f
    z = (y - a) / b
    if code == 0:
        F = 0.5 * math.erfc(-z / _SQRT2)
        f = math.exp(-0.5 * z * z - _LOG_SQRT_2PI) / b
    elif code == 1:
        if z >= 0.0:
            e = math.exp(-z)
            F = 1.0 / (1.0 + e)
        else:
            e = math.exp(z)
            F = e / (1.0 + e)
        f = F * (1.0 - F) / b
    else:
        ez = math.exp(z)
        F = -math.expm1(-ez)
        f = ez * math.exp(-ez) / b
    return F, f


@njit(cache=True)
def _mix(code, y, A, B):
    F = 0.0
    f = 0.0
    m = A.shape[0]
    for k in range(m):
        cF, cf = _comp_cdf_pdf(code, y, A[k], B[k])
        F += cF
        f += cf
    return F / m, f / m


@njit(cache=True, nogil=True)
def mixture_cdf(code, ys, A, B):
    out = np.empty(ys.shape[0])
    for i in range(ys.shape[0]):
        out[i] = _mix(code, ys[i], A, B)[0]
    return out


@njit(cache=True, nogil=True)
def mixture_quantile(code, p, A, B, lo, hi, xtol):
    """Safeguarded Newton for the p-quantile of an equal-weight mixture."""
    positive = code == 3
    Flo = _mix(code, lo, A, B)[0]
    for _ in range(2000):
        if Flo < p:
            break
        width = hi - lo
        hi = lo
        lo = 0.5 * lo if positive else lo - 2.0 * width
        Flo = _mix(code, lo, A, B)[0]
    Fhi = _mix(code, hi, A, B)[0]
    for _ in range(2000):
        if Fhi >= p:
            break
        width = hi - lo
        lo = hi
        hi = 2.0 * hi if positive else hi + 2.0 * width
        Fhi = _mix(code, hi, A, B)[0]
    y = 0.5 * (lo + hi)
    for _ in range(400):
        F, f = _mix(code, y, A, B)
        if F < p:
            lo = y
        else:
            hi = y
        if hi - lo <= xtol:
            break
        new = y - (F - p) / f if f > 0.0 else math.nan
        if not (new > lo and new < hi):
            new = 0.5 * (lo + hi)
        elif abs(new - y) < 0.5 * xtol:
            # Newton step below tolerance: probe just across the root to close the bracket
            new = new + 0.5 * xtol if F < p else new - 0.5 * xtol
            if not (new > lo and new < hi):
                new = 0.5 * (lo + hi)
        y = new
    return hi
