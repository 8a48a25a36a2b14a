import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from predint import dist
from predint.dist import Kernel, family_cdf, family_isf, family_quantile, family_sf
from predint.errors import InvalidParameterError, InvalidProbabilityError

CONTINUOUS = [
    dist.normal(1.0, 2.0),
    dist.logistic(-1.0, 0.5),
    dist.sev(3.0, 1.5),
    dist.gamma(0.7, 2.0),
    dist.gamma(25.0, 0.5),
    dist.inverse_gaussian(2.0, 0.8),
    dist.inverse_gaussian(math.inf, 1.5),
    dist.chi_square(4.0),
    dist.student_t(3.0),
]

probs = st.floats(min_value=1e-10, max_value=1 - 1e-10)


# ---------------------------------------------------------------------------
# exact discrete oracles
# ---------------------------------------------------------------------------

def binom_cdf_exact(k, n, p):
    p = Fraction(p)
    return float(sum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(0, k + 1)))


def hyper_cdf_exact(k, K, n, N):
    total = math.comb(N, n)
    return float(Fraction(sum(math.comb(K, j) * math.comb(N - K, n - j)
                              for j in range(0, k + 1) if n - j >= 0), total))


def betabinom_pmf_exact(k, m, a, b):
    beta = mpmath.beta
    return math.comb(m, k) * beta(k + a, m - k + b) / beta(a, b)


@pytest.mark.parametrize("n,p", [(1, 0.5), (7, 0.2), (20, 0.65), (40, 0.03)])
def test_binomial_cdf_exact(n, p):
    got = family_cdf("binomial", np.arange(n + 1), n, p)
    want = [binom_cdf_exact(k, n, p) for k in range(n + 1)]
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("K,n,N", [(0, 3, 10), (5, 20, 40), (12, 20, 40), (30, 7, 31), (3, 3, 3)])
def test_hypergeometric_cdf_exact(K, n, N):
    ks = np.arange(-1, n + 2)
    got = family_cdf("hypergeometric", ks, K, n, N)
    want = [hyper_cdf_exact(k, K, n, N) if k >= 0 else 0.0 for k in ks]
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("m,a,b", [(1, 0.5, 0.5), (20, 5.5, 15.5), (15, 0.5, 20.5)])
def test_beta_binomial_pmf_exact(m, a, b):
    got = dist.beta_binomial(m, a, b).pmf(np.arange(m + 1))
    want = [float(betabinom_pmf_exact(k, m, a, b)) for k in range(m + 1)]
    np.testing.assert_allclose(got, want, rtol=1e-11)
    assert got.sum() == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("r,p", [(0.5, 0.5), (3.5, 0.2), (11.0, 0.9)])
def test_negative_binomial_pmf(r, p):
    # Gamma(y + r) / (Gamma(r) y!) p^r (1 - p)^y
    ys = np.arange(60)
    want = [float(mpmath.gamma(y + r) / (mpmath.gamma(r) * mpmath.factorial(y))
                  * mpmath.mpf(p) ** r * (1 - mpmath.mpf(p)) ** y) for y in ys]
    np.testing.assert_allclose(dist.negative_binomial(r, p).pmf(ys), want, rtol=1e-11)
    np.testing.assert_allclose(np.cumsum(want), dist.negative_binomial(r, p).cdf(ys), rtol=1e-10)


@pytest.mark.parametrize("mean", [0.3, 4.0, 55.0])
def test_poisson_cdf(mean):
    ks = np.arange(0, int(mean * 3 + 10))
    want = np.cumsum([float(mpmath.exp(-mean) * mpmath.mpf(mean) ** k / mpmath.factorial(k))
                      for k in ks])
    np.testing.assert_allclose(dist.poisson(mean).cdf(ks), want, rtol=1e-12)


@pytest.mark.parametrize("kernel", [dist.binomial(20, 0.3), dist.poisson(3.2),
                                    dist.hypergeometric(7, 10, 25), dist.beta_binomial(12, 1.5, 2.5),
                                    dist.negative_binomial(2.5, 0.4)])
@pytest.mark.parametrize("p", [0.0, 1e-9, 0.05, 0.5, 0.95, 1 - 1e-9])
def test_discrete_quantile_is_lower_inverse(kernel, p):
    q = kernel.quantile(p)
    lo, _ = kernel.support
    assert kernel.cdf(q) >= p
    if q > lo:
        assert kernel.cdf(q - 1) < p


def test_discrete_quantile_upper_end():
    assert dist.binomial(9, 0.4).quantile(1.0) == 9
    assert math.isinf(dist.poisson(2.0).quantile(1.0))


# ---------------------------------------------------------------------------
# continuous kernels
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kernel", CONTINUOUS, ids=lambda k: f"{k.family}{k.params}")
@given(p=probs)
def test_quantile_roundtrip(kernel, p):
    x = kernel.quantile(p)
    assert kernel.cdf(x) == pytest.approx(p, rel=1e-9, abs=1e-13)


@pytest.mark.parametrize("kernel", CONTINUOUS, ids=lambda k: f"{k.family}{k.params}")
@given(q=st.floats(min_value=1e-300, max_value=0.5))
def test_isf_roundtrip_in_far_tail(kernel, q):
    x = kernel.isf(q)
    if math.isinf(x):
        # heavy tails put the quantile past the largest double
        assert kernel.sf(np.finfo(float).max) > q
        return
    assert kernel.sf(x) == pytest.approx(q, rel=1e-8)


@pytest.mark.parametrize("kernel", CONTINUOUS, ids=lambda k: f"{k.family}{k.params}")
def test_cdf_plus_sf_is_one(kernel):
    xs = kernel.quantile(np.linspace(0.001, 0.999, 41))
    np.testing.assert_allclose(kernel.cdf(xs) + kernel.sf(xs), 1.0, atol=1e-14)


@pytest.mark.parametrize("kernel", CONTINUOUS, ids=lambda k: f"{k.family}{k.params}")
def test_cdf_is_integral_of_pdf(kernel):
    a, b = kernel.quantile([0.1, 0.8])
    area = mpmath.quad(lambda t: float(kernel.pdf(float(t))), [a, b])
    assert float(area) == pytest.approx(0.7, rel=1e-9)


def test_location_scale_closed_forms():
    z = np.linspace(-6, 6, 25)
    np.testing.assert_allclose(dist.normal().cdf(z), [0.5 * math.erfc(-v / math.sqrt(2)) for v in z],
                               rtol=1e-14)
    np.testing.assert_allclose(dist.logistic().cdf(z), 1.0 / (1.0 + np.exp(-z)), rtol=1e-14)
    np.testing.assert_allclose(dist.sev().cdf(z), -np.expm1(-np.exp(z)), rtol=1e-14)


def test_location_scale_log_survival():
    z = np.array([-3.0, 0.0, 5.0, 30.0, 700.0])
    for fam in dist.LOCATION_SCALE:
        ls = dist.standard_logsf(fam, z)
        finite = dist.standard_sf(fam, z) > 0
        np.testing.assert_allclose(ls[finite], np.log(dist.standard_sf(fam, z[finite])), rtol=1e-12)
        np.testing.assert_allclose(dist.standard_isf_log(fam, ls), z, rtol=1e-10)


def test_inverse_gaussian_infinite_mean_is_levy():
    # mu = inf reduces to 2 Phi(-sqrt(lam / x))
    lam = 1.5
    xs = np.geomspace(0.01, 1e4, 30)
    want = [float(mpmath.erfc(mpmath.sqrt(lam / x) / mpmath.sqrt(2))) for x in xs]
    np.testing.assert_allclose(dist.inverse_gaussian(math.inf, lam).cdf(xs), want, rtol=1e-12)


def test_inverse_gaussian_matches_large_mean_limit():
    lam, x = 2.0, 3.0
    near = dist.inverse_gaussian(1e12, lam).cdf(x)
    assert near == pytest.approx(dist.inverse_gaussian(math.inf, lam).cdf(x), rel=1e-9)


@pytest.mark.parametrize("kernel", CONTINUOUS + [dist.uniform01()],
                         ids=lambda k: f"{k.family}{k.params}")
def test_draws_follow_cdf(kernel):
    gen = np.random.default_rng(99)
    x = kernel.draw(gen, 4000)
    assert stats.kstest(x, kernel.cdf).pvalue > 1e-3


@pytest.mark.parametrize("kernel", [dist.binomial(20, 0.3), dist.poisson(3.2),
                                    dist.hypergeometric(7, 10, 25), dist.beta_binomial(12, 1.5, 2.5),
                                    dist.negative_binomial(2.5, 0.4)])
def test_discrete_draws_follow_pmf(kernel):
    gen = np.random.default_rng(5)
    x = kernel.draw(gen, 20000).astype(int)
    top = int(kernel.quantile(0.999))
    support = np.arange(top + 1)
    expected = kernel.pmf(support) * x.size
    observed = np.bincount(np.minimum(x, top + 1), minlength=top + 2)[: top + 1]
    keep = expected > 5
    chi2 = ((observed[keep] - expected[keep]) ** 2 / expected[keep]).sum()
    assert stats.chi2.sf(chi2, keep.sum() - 1) > 1e-3


def test_broadcasting_over_parameters():
    mu = np.array([0.0, 1.0, 2.0])
    got = family_cdf("normal", 1.0, mu, 1.0)
    np.testing.assert_allclose(got, [dist.normal(m, 1).cdf(1.0) for m in mu])
    qs = family_quantile("gamma", 0.5, np.array([1.0, 2.0]), 1.0)
    assert qs.shape == (2,)
    assert family_sf("gamma", family_isf("gamma", 1e-20, 3.0, 1.0), 3.0, 1.0) == pytest.approx(1e-20)


# ---------------------------------------------------------------------------
# validation and the Kernel object
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("family,params", [
    ("normal", (0.0, 0.0)),
    ("normal", (0.0,)),
    ("gamma", (-1.0, 1.0)),
    ("binomial", (3.5, 0.2)),
    ("binomial", (3, 1.0)),
    ("hypergeometric", (5, 4, 3)),
    ("poisson", (0.0,)),
    ("normal", (math.nan, 1.0)),
    ("weibull", (1.0, 1.0)),
])
def test_invalid_parameters(family, params):
    with pytest.raises(InvalidParameterError):
        Kernel(family, params)


def test_invalid_probability():
    with pytest.raises(InvalidProbabilityError):
        dist.normal().quantile(1.5)


def test_kernel_accessors():
    k = dist.gamma(2.0, 3.0)
    assert k.named == {"alpha": 2.0, "lam": 3.0}
    assert k.support == (0.0, math.inf)
    assert not k.is_discrete and not k.is_location_scale
    assert k.to_dict() == {"family": "gamma", "params": {"alpha": 2.0, "lam": 3.0}}
    assert dist.eval_quantile(k, dist.eval_cdf(k, 0.7)) == pytest.approx(0.7)
    assert dist.hypergeometric(3, 5, 10).support == (0.0, 3.0)
    with pytest.raises(InvalidParameterError):
        dist.draw(k, np.random.default_rng(0), 0)


def test_quantile_edges():
    assert dist.normal().quantile(0.0) == -math.inf
    assert dist.normal().quantile(1.0) == math.inf
    assert dist.gamma(2.0, 1.0).quantile(0.0) == 0.0
