from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkgf.chain_oracle import (
    InvalidSpec,
    Marking,
    WalkSpec,
    build_chain,
    first_passage_series,
    resolve_target,
    total_absorption,
    transient_mass_profile,
)

from conftest import enumerate_first_passage


def chain(y, b, m):
    return build_chain(WalkSpec(y, b, m))


def test_cells_and_targets():
    c = chain(3, 2, 10)
    assert c.left == frozenset({0, 1})
    assert c.right == frozenset({10, 11, 12})
    assert resolve_target(c, "all") == c.left | c.right
    assert resolve_target(c, [1]) == frozenset({1})
    with pytest.raises(InvalidSpec):
        resolve_target(c, [5])
    with pytest.raises(InvalidSpec):
        resolve_target(c, "middle")


@pytest.mark.parametrize(
    "kwargs",
    [dict(y=0, b=1, m=5), dict(y=2, b=3, m=3), dict(y=2, b=1, m=5, s=5), dict(y=2, b=1, m=5, p=1)],
)
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidSpec):
        WalkSpec(**kwargs)


def test_marking_parse():
    assert Marking.parse("PeopleLeaving") is Marking.PEOPLE_LEAVING
    assert Marking.parse("total_steps") is Marking.TOTAL_STEPS
    assert Marking.PEOPLE_LEAVING.weights(2) == (0, 2)
    with pytest.raises(InvalidSpec):
        Marking.parse("steps")


def test_right_absorption_known_prefix():
    # derived by hand from the 2-forward / 1-back walk with m = 8 started at 7
    s = first_passage_series(chain(2, 1, 8), 7, "right", 8)
    expected = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 16), Fraction(1, 16),
                Fraction(3, 128), Fraction(7, 256), Fraction(3, 256), Fraction(29, 2048)]
    assert [s[k] for k in range(8)] == expected


def test_eventual_absorption_probabilities():
    c = chain(2, 1, 8)
    right, left = total_absorption(c, 7, "right"), total_absorption(c, 7, "left")
    assert right == Fraction(53, 54) and left == Fraction(1, 54)
    assert total_absorption(c, 7, "right", max_steps=11) == Fraction(1949, 2048)


def test_transient_mass_is_decreasing():
    prof = transient_mass_profile(chain(3, 2, 9), 5, 12)
    assert prof[0] == 1
    assert all(a >= b for a, b in zip(prof, prof[1:]))


@settings(max_examples=40, deadline=None)
@given(
    y=st.integers(1, 4), b=st.integers(1, 3), extra=st.integers(1, 6),
    data=st.data(), marking=st.sampled_from(list(Marking)),
)
def test_matches_path_enumeration(y, b, extra, data, marking):
    m = b + extra
    s = data.draw(st.integers(b, m - 1))
    target = data.draw(st.sampled_from(["left", "right"]))
    c = chain(y, b, m)
    cells = resolve_target(c, target)
    horizon = 9
    got = first_passage_series(c, s, target, horizon, marking)
    want = enumerate_first_passage(y, b, m, s, cells, horizon, marking.weights(b))
    assert got.coeffs == want


def test_absorbing_start():
    c = chain(2, 1, 6)
    assert first_passage_series(c, 0, "left", 3).coeffs == {0: 1}
    assert first_passage_series(c, 6, "left", 3).is_zero()
