from fractions import Fraction

import pytest

from walkgf.barrier_gf import (
    NearDegenerateRoots,
    PreconditionError,
    approx_horizon_series,
    cramer_gf_numeric,
    duchon_inner_series,
    duchon_two_left,
    fuss_single_barrier,
    p_left_one_back,
    p_right_one_back,
    single_barrier_normalization,
    u_poly,
)
from walkgf.exact_algebra import Polynomial

from conftest import enumerate_first_passage

ORDER = 30


def test_u_poly_small_case():
    assert u_poly(2, 8).poly == Polynomial({0: 128, 2: -80, 4: 6})
    assert u_poly(3, 4).poly == Polynomial({0: 8})


@pytest.mark.parametrize("y,m", [(2, m) for m in range(4, 13)] + [(3, 9), (4, 11)])
def test_one_back_gfs_against_path_enumeration(y, m):
    for side, gf in (("left", p_left_one_back(y, m)), ("right", p_right_one_back(y, m))):
        cells = range(0, 1) if side == "left" else range(m, m + y)
        want = enumerate_first_passage(y, 1, m, m - 1, cells, ORDER)
        assert gf.expand(ORDER).coeffs == want, side


def test_one_back_normalization():
    assert p_left_one_back(2, 8).shift == 7
    assert p_right_one_back(2, 8).shift == -1
    with pytest.raises(PreconditionError):
        p_right_one_back(3, 3)
    with pytest.raises(PreconditionError):
        p_left_one_back(2, 1)


@pytest.mark.parametrize("k", range(1, 6))
def test_single_barrier_series_against_path_enumeration(k):
    horizon = 21
    shift, scale = single_barrier_normalization(k)
    series = fuss_single_barrier(k, horizon).substitute_power(scale).shift(shift).truncate(horizon)
    want = enumerate_first_passage(2, 1, horizon + 3, k, [0], horizon)
    assert series.coeffs == want


def test_single_barrier_leading_terms():
    s = fuss_single_barrier(1, 3)
    assert s.coeffs == {0: Fraction(1, 2), 1: Fraction(1, 16), 2: Fraction(3, 128)}
    with pytest.raises(PreconditionError):
        fuss_single_barrier(0, 3)


def test_approximation_breaks_at_horizon():
    a = approx_horizon_series(8, 7)
    assert (a.mismatch_exponent, a.delta, a.trial) == (7, Fraction(1, 2048), 11)
    assert a.partial_sum == Fraction(15, 16)
    assert a.exact_at_trial == Fraction(1949, 2048)
    series, horizon = a
    assert horizon == 7 and series is a.series


def test_approximation_from_second_cell():
    a = approx_horizon_series(8, 6)
    assert (a.mismatch_exponent, a.delta, a.trial) == (6, Fraction(1, 1024), 10)
    assert a.exact_at_trial == Fraction(925, 1024)
    with pytest.raises(PreconditionError):
        approx_horizon_series(8, 3)


@pytest.mark.parametrize("m", [6, 8, 11])
@pytest.mark.parametrize("z", [0.1, 0.3])
def test_cramer_matches_rational_forms(m, z):
    for side, gf in (("right", p_right_one_back(2, m)), ("left", p_left_one_back(2, m))):
        assert cramer_gf_numeric(m, m - 1, side, z) == pytest.approx(gf.expand(120).evaluate(z), rel=1e-12, abs=1e-15)


def test_cramer_rejects_bad_input():
    with pytest.raises(PreconditionError):
        cramer_gf_numeric(6, 9, "left", 0.1)
    with pytest.raises(PreconditionError):
        cramer_gf_numeric(6, 5, "up", 0.1)
    with pytest.raises(NearDegenerateRoots):
        cramer_gf_numeric(6, 5, "left", (32 / 27) ** 0.5 - 1e-13)


@pytest.mark.parametrize("s", [2, 3, 5])
def test_two_left_cells_against_path_enumeration(s):
    horizon = 16
    want = enumerate_first_passage(3, 2, 2 * horizon + 6, s, [0, 1], horizon)
    assert duchon_two_left(5, s, horizon).coeffs == want
    people = enumerate_first_passage(3, 2, 2 * horizon + 6, s, [0, 1], horizon, (0, 2))
    assert duchon_two_left(5, s, horizon, "people").coeffs == people


def test_inner_cell_series():
    s = duchon_inner_series(11)
    assert s.coeffs == {4: Fraction(1, 8), 10: Fraction(7, 256)}
    horizon = 30
    want = enumerate_first_passage(3, 2, horizon + 6, 2, [1], horizon, (0, 2))
    assert duchon_inner_series(horizon).coeffs == want


def test_two_left_preconditions():
    with pytest.raises(PreconditionError):
        duchon_two_left(5, 1, 5)
    with pytest.raises(PreconditionError):
        duchon_two_left(5, 2, 5, "total")
