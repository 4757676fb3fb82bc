import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from gfcp.errors import ConvergenceError, DomainError
from gfcp.specfun import (
    MlAccuracy,
    beta_function,
    incomplete_beta,
    ml_derivative,
    ml_three,
    ml_three_array,
)

from oracles import central_derivative, ml_series

# frozen from a 200-digit direct series
ML_HALF_AT_MINUS_ONE = 0.42758357615580700441
# frozen from 40-digit mpmath quadrature of u^(a-1) (1-u)^(b-1)
IBETA_05_15_05 = 1.2853981633974483096
IBETA_25_07_03 = 0.021223821468789693531


def test_trivial_values():
    assert ml_three(1, 1, 1, 0) == 1.0
    assert ml_three(1, 1, 1, 1) == pytest.approx(math.e, rel=1e-15)
    assert ml_three(0.7, 2.4, 3, 0) == pytest.approx(1 / math.gamma(2.4), rel=1e-15)


def test_half_order_against_high_precision_series():
    assert ml_three(0.5, 1, 1, -1) == pytest.approx(ML_HALF_AT_MINUS_ONE, rel=1e-13)


@pytest.mark.parametrize(
    "beta,gamma,delta,x",
    [(0.7, 0.4, 2.5, -2.0), (0.3, 1.3, 2, 1.5), (0.5, 1.5, 4, -6.0), (0.9, 1.9, 1, -15.0), (0.6, 1.0, 3, 4.0)],
)
def test_against_mpmath_series(beta, gamma, delta, x):
    ref = float(ml_series(beta, gamma, delta, x))
    assert ml_three(beta, gamma, delta, x) == pytest.approx(ref, rel=1e-11, abs=1e-300)


def test_exponential_case_on_wide_range():
    xs = np.linspace(-20, 20, 401)
    vals = np.array([ml_three(1, 1, 1, x) for x in xs])
    assert np.max(np.abs(vals / np.exp(xs) - 1)) < 1e-12


def test_array_matches_scalar():
    xs = -np.linspace(0, 5, 37)
    arr = ml_three_array(0.6, 1.6, 3, xs)
    ref = np.array([ml_three(0.6, 1.6, 3, x) for x in xs])
    np.testing.assert_allclose(arr, ref, rtol=1e-11)
    assert ml_three_array(0.6, 1.6, 3, np.empty(0)).shape == (0,)


def test_large_negative_argument_uses_exact_path():
    # E_{1/2}(-x) = exp(x^2) erfc(x)
    x = 8.0
    ref = float(special.erfcx(x))
    assert ml_three(0.5, 1, 1, -x) == pytest.approx(ref, rel=1e-12)


def test_infeasible_series_raises():
    with pytest.raises(ConvergenceError):
        ml_three(0.3, 1, 1, -60.0, MlAccuracy(max_terms=500))


def test_overflowing_value_raises():
    with pytest.raises(ConvergenceError):
        ml_three(0.2, 1.1, 3.7, 4.0)


def test_argument_validation():
    with pytest.raises(DomainError):
        ml_three(0, 1, 1, 1.0)
    with pytest.raises(DomainError):
        ml_three(0.5, 1, 1, float("nan"))
    with pytest.raises(DomainError):
        ml_derivative(0.5, 1, -1, 0.0)


def test_derivative_trivial():
    assert ml_derivative(0.8, 1, 0, -0.3) == ml_three(0.8, 1, 1, -0.3)
    assert ml_derivative(1, 1, 1, 0.0) == pytest.approx(1.0, rel=1e-15)


def test_derivative_second_order_example():
    f = lambda v: ml_three(0.8, 1, 1, v)
    h = 1e-4
    fd = (f(-0.3 + h) - 2 * f(-0.3) + f(-0.3 - h)) / h**2
    assert ml_derivative(0.8, 1, 2, -0.3) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_derivative_identity_against_differences(n):
    f = lambda v: ml_three(0.8, 1.2, 1, v)
    for x in np.linspace(-5, 5, 11):
        assert ml_derivative(0.8, 1.2, n, x) == pytest.approx(central_derivative(f, x, n, 0.1), rel=1e-6)


def test_incomplete_beta_values():
    assert incomplete_beta(1, 1, 0.37) == pytest.approx(0.37, rel=1e-15)
    assert incomplete_beta(2.5, 1.5, 1.0) == pytest.approx(
        math.gamma(2.5) * math.gamma(1.5) / math.gamma(4.0), rel=1e-14
    )
    assert incomplete_beta(0.5, 1.5, 0.5) == pytest.approx(IBETA_05_15_05, rel=1e-12)
    assert incomplete_beta(2.5, 0.7, 0.3) == pytest.approx(IBETA_25_07_03, rel=1e-12)
    with pytest.raises(DomainError):
        incomplete_beta(1, 1, 1.5)


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(0.1, 5.0),
    b=st.floats(0.1, 5.0),
    x=st.floats(0.0, 1.0),
)
def test_incomplete_beta_reflection(a, b, x):
    x = 1 - (1 - x)  # make 1 - x exact so both sides see the same point
    lhs = incomplete_beta(a, b, x)
    rhs = beta_function(a, b) - incomplete_beta(b, a, 1 - x)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12 * beta_function(a, b))


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.1, 3.0), b=st.floats(0.1, 3.0), x=st.floats(0.0, 0.99), dx=st.floats(0.0, 0.01))
def test_incomplete_beta_monotone(a, b, x, dx):
    assert incomplete_beta(a, b, x + dx) >= incomplete_beta(a, b, x)


@settings(max_examples=40, deadline=None)
@given(
    beta=st.floats(0.3, 1.0),
    gamma=st.floats(0.2, 3.0),
    delta=st.floats(0.5, 4.0),
    x=st.floats(-4.0, 4.0),
)
def test_matches_mpmath_on_moderate_arguments(beta, gamma, delta, x):
    ref = float(ml_series(beta, gamma, delta, x, dps=50))
    assert ml_three(beta, gamma, delta, x) == pytest.approx(ref, rel=1e-10, abs=1e-280)
