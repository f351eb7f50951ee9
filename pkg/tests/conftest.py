"""Shared helpers, including a path-enumeration oracle independent of the package."""

from __future__ import annotations

import sys
from fractions import Fraction
from functools import lru_cache

import pytest

from walkgf.exact_algebra import Polynomial

sys.setrecursionlimit(max(10_000, sys.getrecursionlimit()))


def poly(coeffs) -> Polynomial:
    return Polynomial(coeffs)


def enumerate_first_passage(y: int, b: int, m: int, s: int, target, horizon: int, weights=(0, 1)) -> dict[int, Fraction]:
    """Coefficients of the first-passage series, by top-down recursion over paths.

    ``weights`` gives the exponent added by a forward and a backward step.
    Returns ``{exponent: probability}`` for exponents below ``horizon``.
    """
    fw, bw = weights
    targets = frozenset(target)
    half = Fraction(1, 2)

    @lru_cache(maxsize=None)
    def walk(cell: int, budget: int) -> tuple[tuple[int, Fraction], ...]:
        # paths from cell whose remaining weight is below budget
        if cell < b or cell >= m:
            return ((0, Fraction(1)),) if cell in targets else ()
        acc: dict[int, Fraction] = {}
        for step, w in ((y, fw), (-b, bw)):
            if w >= budget:
                continue
            for e, p in walk(cell + step, budget - w):
                acc[e + w] = acc.get(e + w, Fraction(0)) + p * half
        return tuple(sorted(acc.items()))

    return {e: p for e, p in walk(s, horizon) if p}


@pytest.fixture
def brute():
    return enumerate_first_passage
