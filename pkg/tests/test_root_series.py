from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkgf.exact_algebra import IrrationalCoefficients
from walkgf.root_series import (
    DiscriminantViolation,
    TrinomialSpec,
    check_one_back_tail_cancellation,
    check_reduction_identity,
    check_root_derivative_identities,
    cubic_roots_numeric,
    large_power_sum,
    large_root_series,
    phi_sum_derivative,
    phi_sum_series,
    root_series_numeric,
    small_power_sum,
    small_root_series,
    trinomial_residual,
    trinomial_roots_numeric,
)

CUBIC = TrinomialSpec(3, 1, 2)


def test_cubic_small_root_prefix():
    # r = z/2 + r^3/2, iterated by hand
    r = small_root_series(CUBIC, 1, order=6).series
    assert r.coeffs == {1: Fraction(1, 2), 3: Fraction(1, 16), 5: Fraction(3, 128)}


def test_large_cubic_roots_need_normalization():
    with pytest.raises(IrrationalCoefficients):
        large_root_series(CUBIC, 1, 0, 4)
    R = large_root_series(CUBIC, 1, 0, 4, scaled=True).series
    assert R[0] == 1
    assert trinomial_residual(large_root_series(CUBIC, 1, 0, 8, scaled=True)).is_zero()


def test_spec_validation():
    with pytest.raises(ValueError):
        TrinomialSpec(2, 2)
    with pytest.raises(ValueError):
        small_root_series(CUBIC, 1, branch=1)
    with pytest.raises(DiscriminantViolation):
        cubic_roots_numeric(2.0)


def test_numeric_roots_agree_with_series():
    z = 0.1
    a, b, c = cubic_roots_numeric(z)
    for x in (a, b, c):
        assert abs(x**3 - 2 * x + z) < 1e-12
    assert abs(root_series_numeric(CUBIC, "small", 0, 1, z) - b) < 1e-12
    assert abs(small_root_series(CUBIC, 1, order=30).series.evaluate(z) - b) < 1e-14
    roots = trinomial_roots_numeric(TrinomialSpec(5, 2, 2), 0.05)
    assert np.max(np.abs(roots**5 - 2 * roots**2 + 0.05)) < 1e-10


@pytest.mark.parametrize(
    "spec, expected",
    [
        # Newton's identities for x^3 - 2x + z and x^5 - 2x^2 + z
        (CUBIC, {1: {}, 2: {0: 4}, 3: {1: -3}, 4: {0: 8}}),
        (TrinomialSpec(5, 2, 2), {1: {}, 2: {}, 3: {0: 6}, 4: {}, 5: {1: -5}}),
    ],
)
def test_power_sums_are_polynomials(spec, expected):
    for k, coeffs in expected.items():
        total = small_power_sum(spec, k, 12) + large_power_sum(spec, k, 12)
        assert total.coeffs == {Fraction(e): Fraction(c) for e, c in coeffs.items()}


@pytest.mark.parametrize("k", [1, 2, 3, 7])
def test_phi_sum_derivative(k):
    assert phi_sum_derivative(k, 10).coeffs == phi_sum_series(k, 11).derivative().truncate(10).coeffs


@settings(max_examples=30, deadline=None)
@given(u=st.integers(1, 3), d=st.integers(1, 4), kind=st.sampled_from(["small", "large"]))
def test_defining_equation_residual(u, d, kind):
    spec = TrinomialSpec(u + d, u, 1)
    rps = (small_root_series if kind == "small" else large_root_series)(spec, 1, 0, 12)
    assert trinomial_residual(rps).is_zero()


@settings(max_examples=25, deadline=None)
@given(k=st.integers(1, 6), order=st.integers(2, 12))
def test_root_powers_multiply(k, order):
    r = small_root_series(CUBIC, 1, order=order + k).series
    rk = small_root_series(CUBIC, k, order=order).series
    assert (r**k).truncate(order).coeffs == rk.coeffs


@pytest.mark.parametrize("v,u", [(3, 1), (5, 2), (7, 2)])
def test_reduction_identity(v, u):
    assert check_reduction_identity(TrinomialSpec(v, u, 2), 0.1)["max_deviation"] < 1e-10


@pytest.mark.parametrize("m", range(0, 9))
def test_root_derivative_identities(m):
    out = check_root_derivative_identities(m, 20)
    assert out["agree"], out["first_mismatch"]
    assert out["vandermonde_max_deviation"] < 1e-10


@pytest.mark.parametrize("half_m", range(2, 7))
def test_one_back_tail_cancellation(half_m):
    assert check_one_back_tail_cancellation(half_m)["ok"]
