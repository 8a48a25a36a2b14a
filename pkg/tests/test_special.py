import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from predint import special
from predint.special import (
    digamma,
    digamma_v,
    gammainc_lower,
    gammainc_upper,
    trigamma,
    trigamma_v,
)

mpmath.mp.dps = 40

positive = st.floats(min_value=1e-3, max_value=1e4, allow_nan=False)


@pytest.mark.parametrize("x", [1e-3, 0.1, 0.5, 1.0, 2.5, 9.99, 10.0, 37.0, 1e3, 1e6])
def test_digamma_matches_mpmath(x):
    ref = float(mpmath.digamma(x))
    assert digamma(x) == pytest.approx(ref, rel=1e-13, abs=1e-14)


@pytest.mark.parametrize("x", [1e-3, 0.1, 0.5, 1.0, 2.5, 9.99, 10.0, 37.0, 1e3, 1e6])
def test_trigamma_matches_mpmath(x):
    ref = float(mpmath.polygamma(1, x))
    assert trigamma(x) == pytest.approx(ref, rel=1e-13)


def test_digamma_known_values():
    euler = 0.57721566490153286
    assert digamma(1.0) == pytest.approx(-euler, rel=1e-15)
    assert trigamma(1.0) == pytest.approx(math.pi**2 / 6, rel=1e-15)


@given(positive)
def test_digamma_recurrence(x):
    # psi(x + 1) = psi(x) + 1 / x
    assert digamma(x + 1.0) == pytest.approx(digamma(x) + 1.0 / x, abs=1e-13 * (1.0 + 1.0 / x))


@given(positive)
def test_trigamma_recurrence(x):
    # both terms on the right are near 1 / x^2, so the error scales with trigamma(x)
    assert trigamma(x + 1.0) == pytest.approx(trigamma(x) - 1.0 / x**2, abs=1e-13 * trigamma(x))


def test_vectorized_agree_with_scalar():
    xs = np.geomspace(1e-3, 1e5, 57)
    np.testing.assert_allclose(digamma_v(xs), [digamma(x) for x in xs], rtol=1e-14)
    np.testing.assert_allclose(trigamma_v(xs), [trigamma(x) for x in xs], rtol=1e-14)


def test_nonpositive_arguments_give_nan():
    assert math.isnan(digamma(0.0))
    assert math.isnan(trigamma(-1.0))
    assert np.isnan(digamma_v([-2.0])[0])


@pytest.mark.parametrize("a", [0.05, 0.5, 1.0, 3.7, 20.0, 150.0])
@pytest.mark.parametrize("scale", [0.01, 0.3, 1.0, 2.0, 5.0])
def test_incomplete_gamma_matches_mpmath(a, scale):
    x = a * scale
    P = float(mpmath.gammainc(a, 0, x, regularized=True))
    Q = float(mpmath.gammainc(a, x, mpmath.inf, regularized=True))
    assert gammainc_lower(a, x) == pytest.approx(P, rel=1e-11, abs=1e-300)
    assert gammainc_upper(a, x) == pytest.approx(Q, rel=1e-11, abs=1e-300)


@given(st.floats(0.01, 200.0), st.floats(0.0, 500.0))
def test_incomplete_gamma_complements(a, x):
    assert gammainc_lower(a, x) + gammainc_upper(a, x) == pytest.approx(1.0, abs=1e-13)


def test_incomplete_gamma_exponential_case():
    # a = 1 is the exponential cdf
    for x in (1e-8, 0.3, 4.0, 30.0):
        assert gammainc_lower(1.0, x) == pytest.approx(-math.expm1(-x), rel=1e-13)


def test_incomplete_gamma_edges():
    assert gammainc_lower(2.0, 0.0) == 0.0
    assert gammainc_upper(2.0, math.inf) == 0.0
    assert math.isnan(gammainc_lower(-1.0, 1.0))


@pytest.mark.parametrize("x", [0.01, 0.7, 3.0, 9.99, 10.0, 55.0, 1e4, 5e7, 1e12])
def test_log_minus_digamma_against_mpmath(x):
    want = float(mpmath.log(x) - mpmath.digamma(x))
    assert special.log_minus_digamma(x) == pytest.approx(want, rel=1e-13)
    assert special.log_minus_digamma_v(np.array([x]))[0] == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("x", [0.01, 0.7, 3.0, 9.99, 10.0, 55.0, 1e4, 5e7, 1e12])
def test_inv_minus_trigamma_against_mpmath(x):
    want = float(1 / mpmath.mpf(x) - mpmath.psi(1, x))
    assert special.inv_minus_trigamma(x) == pytest.approx(want, rel=1e-12)
    assert special.inv_minus_trigamma_v(np.array([x]))[0] == pytest.approx(want, rel=1e-12)


def test_cancellation_free_helpers_reject_nonpositive():
    assert math.isnan(special.log_minus_digamma(0.0))
    assert math.isnan(special.inv_minus_trigamma(-1.0))
    assert np.isnan(special.log_minus_digamma_v(np.array([0.0, -2.0]))).all()
