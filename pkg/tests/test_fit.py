import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize, special

from predint import dist
from predint.errors import DegenerateSampleError, InvalidParameterError, UnsupportedFamilyError
from predint.fit import FITTABLE, Sample, fit_ml, fit_ml_batch, loglik


def _direct_mle(family, sample, start):
    """Independent oracle: Nelder-Mead on the log-likelihood over log-scale parameters."""
    def nll(t):
        if family in dist.LOCATION_SCALE:
            k = dist.Kernel(family, (t[0], math.exp(t[1])))
        else:
            k = dist.Kernel(family, (math.exp(t[0]), math.exp(t[1])))
        return -loglik(k, sample)

    res = optimize.minimize(nll, start, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
    return res


def _start(family, theta):
    if family in dist.LOCATION_SCALE:
        return [theta[0], math.log(theta[1])]
    return [math.log(theta[0]), math.log(theta[1])]


@pytest.mark.parametrize("family", dist.LOCATION_SCALE)
@pytest.mark.parametrize("r", [None, 7])
def test_location_scale_matches_direct_maximization(family, r):
    gen = np.random.default_rng(3)
    x = np.sort(dist.Kernel(family, (5.0, 2.0)).draw(gen, 12))
    sample = Sample.type2(x[:r], 12) if r else Sample(x)
    fit = fit_ml(family, sample)
    oracle = _direct_mle(family, sample, _start(family, (x.mean(), x.std())))
    assert fit.loglik == pytest.approx(-oracle.fun, abs=1e-7)
    assert fit.loglik >= -oracle.fun - 1e-9
    assert fit.loglik == pytest.approx(loglik(fit.estimate, sample), rel=1e-12)
    assert fit.shape == sample.shape


@pytest.mark.parametrize("family", ["gamma", "inverse_gaussian"])
def test_positive_families_match_direct_maximization(family):
    gen = np.random.default_rng(8)
    truth = dist.gamma(2.5, 0.5) if family == "gamma" else dist.inverse_gaussian(4.0, 6.0)
    x = truth.draw(gen, 15)
    fit = fit_ml(family, x)
    oracle = _direct_mle(family, Sample(x), _start(family, (1.0, 1.0)))
    assert fit.loglik == pytest.approx(-oracle.fun, abs=1e-7)
    assert fit.loglik == pytest.approx(loglik(fit.estimate, Sample(x)), rel=1e-12)


def test_normal_closed_form(normal10):
    fit = fit_ml("normal", normal10)
    assert fit.theta[0] == pytest.approx(normal10.mean(), rel=1e-14)
    assert fit.theta[1] == pytest.approx(normal10.std(ddof=0), rel=1e-14)


def test_gamma_score_equation():
    x = np.random.default_rng(1).gamma(0.8, 3.0, 40)
    a, lam = fit_ml("gamma", x).theta
    assert math.log(a) - special.digamma(a) == pytest.approx(math.log(x.mean()) - np.log(x).mean(),
                                                             rel=1e-10)
    assert lam == pytest.approx(a / x.mean(), rel=1e-12)


def test_invgauss_closed_form():
    x = np.random.default_rng(2).wald(3.0, 5.0, 25)
    mu, lam = fit_ml("inverse_gaussian", x).theta
    assert mu == pytest.approx(x.mean(), rel=1e-14)
    assert lam == pytest.approx(x.size / np.sum(1 / x - 1 / x.mean()), rel=1e-12)


@pytest.mark.parametrize("family", dist.LOCATION_SCALE)
@given(a=st.floats(-50, 50), b=st.floats(0.05, 20))
def test_location_scale_equivariance(family, a, b):
    x = np.sort(np.random.default_rng(4).normal(0, 1, 9))
    s = Sample.type2(x[:6], 9)
    m0, s0 = fit_ml(family, s).theta
    m1, s1 = fit_ml(family, s.affine(a, b)).theta
    assert m1 == pytest.approx(a + b * m0, rel=1e-7, abs=1e-7 * b)
    assert s1 == pytest.approx(b * s0, rel=1e-7)


@pytest.mark.parametrize("family", ["gamma", "inverse_gaussian"])
@given(b=st.floats(1e-3, 1e3))
def test_scale_equivariance_positive(family, b):
    x = np.random.default_rng(6).gamma(3.0, 1.0, 11)
    t0 = fit_ml(family, x).theta
    t1 = fit_ml(family, b * x).theta
    if family == "gamma":
        assert t1[0] == pytest.approx(t0[0], rel=1e-10)
        assert t1[1] == pytest.approx(t0[1] / b, rel=1e-10)
    else:
        assert t1[0] == pytest.approx(b * t0[0], rel=1e-12)
        assert t1[1] == pytest.approx(b * t0[1], rel=1e-10)


def test_batch_matches_single_fits_bitwise():
    gen = np.random.default_rng(12)
    X = np.sort(gen.logistic(0, 1, (30, 8)), axis=1)
    batch = fit_ml_batch("logistic", X, 5)
    for i in range(X.shape[0]):
        single = fit_ml("logistic", Sample(np.concatenate([X[i, :5], np.full(3, X[i, 4])]), 5))
        assert tuple(batch.params[i]) == single.theta


@pytest.mark.parametrize("family", FITTABLE)
def test_constant_data_is_degenerate(family):
    with pytest.raises(DegenerateSampleError):
        fit_ml(family, np.full(5, 2.0))


def test_batch_flags_degenerate_rows():
    X = np.array([[1.0, 2.0, 4.0], [3.0, 3.0, 3.0]])
    batch = fit_ml_batch("gamma", X)
    assert list(batch.ok) == [True, False]
    assert np.all(np.isnan(batch.params[1]))


def test_censoring_rules():
    with pytest.raises(UnsupportedFamilyError):
        fit_ml("gamma", Sample.type2([1.0, 2.0], 4))
    with pytest.raises(InvalidParameterError):
        Sample([1.0, 3.0, 2.0], 2)
    with pytest.raises(InvalidParameterError):
        Sample([1.0, 2.0, 3.0], 2)
    with pytest.raises(InvalidParameterError):
        Sample([1.0, 2.0, 2.0], 1)
    s = Sample([1.0, 2.0, 2.0], 3)
    assert s.censoring == "complete" and s.r is None


def test_positive_data_required():
    with pytest.raises(InvalidParameterError):
        fit_ml("gamma", [1.0, -1.0, 2.0])
    with pytest.raises(UnsupportedFamilyError):
        fit_ml("poisson", [1.0, 2.0])
    with pytest.raises(InvalidParameterError):
        fit_ml("normal", [1.0])


def test_censored_loglik_counts_survivors():
    k = dist.normal(0.0, 1.0)
    s = Sample.type2([-1.0, 0.5], 5)
    want = float(k.logpdf(-1.0) + k.logpdf(0.5) + 3 * math.log(k.sf(0.5)))
    assert loglik(k, s) == pytest.approx(want, rel=1e-14)
