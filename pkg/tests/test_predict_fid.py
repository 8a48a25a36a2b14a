import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.special import ndtr

from predint import dist
from predint.boot import RngPolicy
from predint.errors import DegenerateSampleError, InvalidParameterError
from predint.fit import Sample, fit_ml
from predint.predict_fid import (
    fiducial_bound,
    fiducial_predictive_cdf,
    gamma_chisq_approx,
    gamma_fiducial_draws,
    invgauss_fiducial_draws,
)


@pytest.mark.parametrize("alpha,n", [(0.5, 5), (2.0, 10), (8.0, 20)])
def test_chisq_approx_matches_simulated_moments(alpha, n):
    c, v = gamma_chisq_approx(alpha, n)
    gen = np.random.default_rng(1)
    x = gen.gamma(alpha, 1.0, (200_000, n))
    w = 2 * n * alpha * np.log(x.mean(axis=1) / np.exp(np.log(x).mean(axis=1)))
    se_mean = w.std() / math.sqrt(w.size)
    assert c * v == pytest.approx(w.mean(), abs=5 * se_mean)
    assert 2 * c * c * v == pytest.approx(w.var(), rel=0.03)


def test_chisq_approx_tends_to_n_minus_one():
    # W is asymptotically chi-square with n - 1 degrees of freedom as the shape grows
    c, v = gamma_chisq_approx(1e6, 12)
    assert c == pytest.approx(1.0, rel=1e-4)
    assert v == pytest.approx(11.0, rel=1e-4)


def test_gamma_draws_follow_their_construction():
    x = np.random.default_rng(4).gamma(3.0, 2.0, 15)
    fit = fit_ml("gamma", x)
    draws = gamma_fiducial_draws(x, B=3000, rng=2)
    assert len(draws) == 3000 and draws.family == "gamma"
    c, v = gamma_chisq_approx(fit.theta[0], x.size)
    log_ratio = math.log(x.mean()) - np.log(x).mean()
    chi = draws.draws[:, 0] * 2 * x.size * log_ratio / c
    assert stats.kstest(chi, stats.chi2(v).cdf).pvalue > 1e-3
    # lam given alpha is Gamma(n alpha, rate sum x)
    z = draws.draws[:, 1] * x.sum()
    u = stats.gamma.cdf(z, x.size * draws.draws[:, 0])
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_invgauss_draws_solve_the_mean_equation():
    x = np.random.default_rng(8).wald(2.0, 4.0, 12)
    draws = invgauss_fiducial_draws(x, B=700, rng=3)
    n, xbar = x.size, x.mean()
    denom = np.sum(1 / x - 1 / xbar)
    policy = RngPolicy(3)
    for k, start in enumerate(range(0, 700, 512)):
        gen = policy.generator(k)
        count = min(512, 700 - start)
        lam = gen.chisquare(n - 1, count) / denom
        u = gen.random(count)
        mu = draws.draws[start:start + count, 0]
        np.testing.assert_array_equal(draws.draws[start:start + count, 1], lam)
        finite = np.isfinite(mu)
        cdf = dist.family_cdf("inverse_gaussian", xbar, mu[finite], n * lam[finite])
        np.testing.assert_allclose(cdf, u[finite], rtol=1e-8, atol=1e-12)
        assert np.all(2 * ndtr(-np.sqrt(n * lam[~finite] / xbar)) >= u[~finite])


def test_invgauss_infinite_fraction_matches_quadrature():
    x = np.random.default_rng(0).wald(10.0, 0.5, 30)
    n, xbar = x.size, x.mean()
    denom = np.sum(1 / x - 1 / xbar)
    chi = stats.chi2(n - 1)
    # P(mu = inf) = E[2 Phi(-sqrt(n lam / xbar))] with lam = chi2_{n-1} / denom
    want, _ = integrate.quad(lambda q: 2 * ndtr(-math.sqrt(n * q / denom / xbar)) * chi.pdf(q),
                             0, np.inf, epsabs=1e-12)
    B = 20000
    draws = invgauss_fiducial_draws(x, B=B, rng=1)
    assert want > 0.05
    assert draws.infinite_fraction == pytest.approx(want, abs=4 * math.sqrt(want * (1 - want) / B))


def test_fiducial_bounds_read_off_the_cdf():
    x = np.random.default_rng(5).wald(3.0, 2.0, 10)
    draws = invgauss_fiducial_draws(x, B=2000, rng=0)
    cdf = fiducial_predictive_cdf(draws)
    b = fiducial_bound(draws, 0.05, "upper")
    assert cdf(b.endpoint) == pytest.approx(0.95, abs=1e-9)
    iv = fiducial_bound(draws, 0.1, "two-sided")
    assert cdf(iv.lower.endpoint) == pytest.approx(0.05, abs=1e-9)
    assert b.diagnostics["B"] == 2000


def test_gamma_fiducial_scale_equivariance():
    x = np.random.default_rng(9).gamma(1.5, 1.0, 10)
    b0 = fiducial_bound(gamma_fiducial_draws(x, B=1000, rng=4), 0.05).endpoint
    b1 = fiducial_bound(gamma_fiducial_draws(7.0 * x, B=1000, rng=4), 0.05).endpoint
    assert b1 == pytest.approx(7.0 * b0, rel=1e-8)


def test_draws_are_thread_independent():
    x = np.random.default_rng(2).gamma(2.0, 1.0, 8)
    a = gamma_fiducial_draws(x, B=1500, rng=6, threads=1).draws
    b = gamma_fiducial_draws(x, B=1500, rng=6, threads=4).draws
    assert np.array_equal(a, b)


def test_validation():
    with pytest.raises(InvalidParameterError):
        gamma_fiducial_draws(Sample.type2([1.0, 2.0], 3), B=10)
    with pytest.raises(InvalidParameterError):
        invgauss_fiducial_draws([1.0, -2.0, 3.0], B=10)
    with pytest.raises(DegenerateSampleError):
        invgauss_fiducial_draws([2.0, 2.0, 2.0], B=10)
