"""Pure-numpy implementations of the hot kernels.

Same contracts and family codes as ``_numba``; loops run across the batch
dimension instead of per row.
"""

import math

import numpy as np
from scipy import special as sc

from ..special import inv_minus_trigamma_v, log_minus_digamma_v

FIT_TOL = 1e-10
FIT_CONVERGED = 1e-8
MAX_ITER = 200

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _std_quantile(code, p):
    if code == 0:
        return sc.ndtri(p)
    if code == 1:
        return sc.logit(p)
    return np.log(-np.log1p(-p))


def _event_terms(code, z):
    if code == 0:
        return -0.5 * z * z - _LOG_SQRT_2PI, -z, -np.ones_like(z)
    if code == 1:
        F = sc.expit(z)
        logf = -np.abs(z) - 2.0 * np.log1p(np.exp(-np.abs(z)))
        return logf, 1.0 - 2.0 * F, -2.0 * F * (1.0 - F)
    ez = np.exp(z)
    return z - ez, 1.0 - ez, -ez


def _censor_terms(code, z):
    if code == 0:
        logS = sc.log_ndtr(-z)
        R = np.exp(-0.5 * z * z - _LOG_SQRT_2PI - logS)
        return logS, -R, z * R - R * R
    if code == 1:
        F = sc.expit(z)
        logS = -np.logaddexp(0.0, z)
        return logS, -F, -F * (1.0 - F)
    ez = np.exp(z)
    return -ez, -ez, -ez


def _ls_eval(code, z, r, c, mu, tau, need_derivs=True):
    sigma = np.exp(tau)
    w = (z[:, :r] - mu[:, None]) / sigma[:, None]
    lf, h, dh = _event_terms(code, w)
    ll = lf.sum(axis=1) - r * tau
    if c > 0:
        wc = (z[:, r - 1] - mu) / sigma
        ls, g, dg = _censor_terms(code, wc)
        ll = ll + c * ls
    if not need_derivs:
        return ll
    gmu = -h.sum(axis=1) / sigma
    gtau = -(h * w).sum(axis=1) - r
    hmm = dh.sum(axis=1) / sigma**2
    hmt = (h + dh * w).sum(axis=1) / sigma
    htt = (dh * w * w + h * w).sum(axis=1)
    if c > 0:
        gmu = gmu - c * g / sigma
        gtau = gtau - c * g * wc
        hmm = hmm + c * dg / sigma**2
        hmt = hmt + c * (g + dg * wc) / sigma
        htt = htt + c * (dg * wc * wc + g * wc)
    return ll, gmu, gtau, hmm, hmt, htt


@np.errstate(over="ignore")
def ls_fit_rows(x, r, code):
    """Location-scale ML for every row of ``x``; rows sorted when ``r < n``.

    Trial steps may overflow ``exp`` for the sev family; those steps are
    rejected by the line search, so the overflow is silenced.
    """
    x = np.asarray(x, dtype=float)
    m, n = x.shape
    c = n - r
    center = x[:, :r].mean(axis=1)
    scale = np.sqrt(((x[:, :r] - center[:, None]) ** 2).mean(axis=1))
    bad = ~(scale > 0.0) | ~np.isfinite(scale)
    safe_scale = np.where(bad, 1.0, scale)
    z = (x - center[:, None]) / safe_scale[:, None]
    z[bad] = np.linspace(-1.0, 1.0, n)

    q = _std_quantile(code, (np.arange(r) + 0.5) / n)
    zs = np.sort(z[:, :r], axis=1)
    dq = q - q.mean()
    sqq = np.dot(dq, dq)
    slope = (zs - zs.mean(axis=1, keepdims=True)) @ dq / sqq if sqq > 0 else np.ones(m)
    slope = np.where(slope > 0.0, slope, 1.0)
    mu = zs.mean(axis=1) - slope * q.mean()
    tau = np.log(slope)

    iters = np.zeros(m, dtype=np.int64)
    active = ~bad
    for it in range(1, MAX_ITER + 1):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        za, mua, taua = z[idx], mu[idx], tau[idx]
        ll, gmu, gtau, hmm, hmt, htt = _ls_eval(code, za, r, c, mua, taua)
        sigma = np.exp(taua)
        gnorm = np.maximum(np.abs(sigma * gmu), np.abs(gtau)) / n
        iters[idx] = it
        done = gnorm <= FIT_TOL
        det = hmm * htt - hmt * hmt
        newton = (hmm < 0.0) & (det > 0.0)
        safe_det = np.where(newton, det, 1.0)
        dmu = np.where(newton, -(htt * gmu - hmt * gtau) / safe_det, sigma**2 * gmu / n)
        dtau = np.where(newton, -(-hmt * gmu + hmm * gtau) / safe_det, gtau / n)

        step = np.ones(idx.size)
        pending = ~done
        moved = np.zeros(idx.size, dtype=bool)
        for _ in range(60):
            if not pending.any():
                break
            nmu = mua + step * dmu
            ntau = taua + step * dtau
            nll = _ls_eval(code, za, r, c, nmu, ntau, need_derivs=False)
            ok = pending & np.isfinite(nll) & (nll >= ll - 1e-12 * np.abs(ll))
            mua = np.where(ok, nmu, mua)
            taua = np.where(ok, ntau, taua)
            moved |= ok
            pending &= ~ok
            step = np.where(pending, 0.5 * step, step)
        mu[idx] = mua
        tau[idx] = taua
        # rows that converged, or could not move, leave the active set
        stop = done | ~moved
        active[idx[stop]] = False

    ll, gmu, gtau, _, _, _ = _ls_eval(code, z, r, c, mu, tau)
    gnorm = np.maximum(np.abs(np.exp(tau) * gmu), np.abs(gtau)) / n
    status = np.where(gnorm <= FIT_CONVERGED, 0, 2)
    status[bad] = 1
    mu_out = np.where(bad, np.nan, center + safe_scale * mu)
    sigma_out = np.where(bad, np.nan, safe_scale * np.exp(tau))
    loglik = np.where(bad, np.nan, ll - r * np.log(safe_scale))
    gnorm[bad] = np.nan
    iters[bad] = 0
    return mu_out, sigma_out, loglik, status.astype(np.int64), iters, gnorm


def gamma_shape(s):
    """Solve log(a) - digamma(a) = s elementwise."""
    s = np.asarray(s, dtype=float)
    bad = ~(s > 0.0) | ~np.isfinite(s)
    ss = np.where(bad, 1.0, s)
    alpha = (3.0 - ss + np.sqrt((ss - 3.0) ** 2 + 24.0 * ss)) / (12.0 * ss)
    lo = np.zeros_like(ss)
    hi = np.full_like(ss, np.inf)
    f = log_minus_digamma_v(alpha) - ss
    iters = np.zeros(ss.shape, dtype=np.int64)
    active = ~bad
    for it in range(1, MAX_ITER + 1):
        if not active.any():
            break
        iters[active] = it
        lo = np.where(active & (f > 0.0), alpha, lo)
        hi = np.where(active & ~(f > 0.0), alpha, hi)
        fp = inv_minus_trigamma_v(alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            new = np.where(fp < 0.0, alpha - f / fp, np.nan)
            fallback = np.where(np.isinf(hi), 2.0 * alpha,
                                np.where(lo == 0.0, 0.5 * hi, np.sqrt(lo * hi)))
        inside = (new > lo) & (new < hi)
        new = np.where(inside, new, fallback)
        new = np.where(active, new, alpha)
        small_step = np.abs(new - alpha) <= 1e-15 * alpha
        alpha = new
        f = log_minus_digamma_v(alpha) - ss
        active &= ~(small_step | (np.abs(f) * alpha <= 1e-15))
    g = np.abs(f) * alpha
    status = np.where(g <= FIT_CONVERGED, 0, 2)
    status[bad] = 1
    alpha[bad] = np.nan
    g[bad] = np.nan
    return alpha, status.astype(np.int64), iters, g


def _comp_cdf_pdf(code, y, A, B):
    if code == 3:
        t = B * max(y, 0.0)
        if y <= 0.0:
            return np.zeros_like(A), np.zeros_like(A)
        F = sc.gammainc(A, t)
        f = np.exp(A * np.log(t) - t - sc.gammaln(A)) / y
        return F, f
    z = (y - A) / B
    if code == 0:
        return sc.ndtr(z), np.exp(-0.5 * z * z - _LOG_SQRT_2PI) / B
    if code == 1:
        F = sc.expit(z)
        return F, F * (1.0 - F) / B
    ez = np.exp(z)
    return -np.expm1(-ez), ez * np.exp(-ez) / B


def _mix(code, y, A, B):
    F, f = _comp_cdf_pdf(code, y, A, B)
    return F.mean(), f.mean()


def mixture_cdf(code, ys, A, B):
    ys = np.asarray(ys, dtype=float)
    if code == 3:
        t = np.maximum(ys, 0.0)[:, None] * B[None, :]
        return sc.gammainc(A[None, :], t).mean(axis=1)
    z = (ys[:, None] - A[None, :]) / B[None, :]
    if code == 0:
        F = sc.ndtr(z)
    elif code == 1:
        F = sc.expit(z)
    else:
        F = -np.expm1(-np.exp(z))
    return F.mean(axis=1)


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
        if not (lo < new < hi):
            new = 0.5 * (lo + hi)
        elif abs(new - y) < 0.5 * xtol:
            new = new + 0.5 * xtol if F < p else new - 0.5 * xtol
            if not (lo < new < hi):
                new = 0.5 * (lo + hi)
        y = new
    return hi
