"""Closed forms for one-back walks, single barriers and the two-left-cell (Duchon) series.

Conventions: unless stated otherwise z marks backward steps.  Every
:class:`RationalGF` records how its raw expansion maps onto that marking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .chain_oracle import Marking, WalkSpec, build_chain, first_passage_series
from .exact_algebra import Polynomial, PuiseuxSeries, RationalGF, binom_general
from .root_series import TrinomialSpec, cubic_roots_numeric, small_power_sum, small_root_series

__all__ = [
    "PreconditionError",
    "NearDegenerateRoots",
    "UPolynomial",
    "u_poly",
    "p_left_one_back",
    "p_right_one_back",
    "fuss_single_barrier",
    "single_barrier_normalization",
    "ApproxHorizon",
    "approx_horizon_series",
    "cramer_coefficients",
    "cramer_gf_numeric",
    "duchon_two_left",
    "duchon_inner_series",
]


class PreconditionError(ValueError):
    """Inputs outside the regime where a closed form applies."""


class NearDegenerateRoots(ArithmeticError):
    """Cubic roots too close together for a stable Cramer solve."""


@dataclass(frozen=True)
class UPolynomial:
    y: int
    m: int
    poly: Polynomial


def u_poly(y: int, m: int) -> UPolynomial:
    """``sum z^(yn) 2^(m-1-(y+1)n) C((y+1)n-m, n)`` over n with ``(y+1)n < m``."""
    if y < 1 or m < 1:
        raise PreconditionError("u_poly needs y >= 1 and m >= 1")
    two = Fraction(2)
    coeffs = {}
    n = 0
    while (y + 1) * n < m:
        coeffs[y * n] = two ** (m - 1 - (y + 1) * n) * binom_general((y + 1) * n - m, n)
        n += 1
    return UPolynomial(y, m, Polynomial(coeffs))


def p_left_one_back(y: int, m: int) -> RationalGF:
    """Left absorption from ``s = m-1`` for the y-forward/1-back walk: ``1/u[y,m]``.

    The minimal left path takes ``m-1`` back steps, hence the shift.
    """
    if y < 1 or m < 2:
        raise PreconditionError("need y >= 1 and m >= 2")
    return RationalGF(Polynomial({0: 1}), u_poly(y, m).poly, shift=m - 1)


def p_right_one_back(y: int, m: int) -> RationalGF:
    """Right absorption from ``s = m-1``: ``sum_i z^i u[y, m-i] / u[y, m]``.

    The raw form carries one extra factor of z relative to back-step
    marking, recorded as ``shift = -1``.
    """
    if y < 1 or m <= y:
        raise PreconditionError(f"need m > y, got m={m}, y={y}")
    num = Polynomial()
    for i in range(1, y + 1):
        num = num + u_poly(y, m - i).poly * Polynomial.monomial(i)
    return RationalGF(num, u_poly(y, m).poly, shift=-1)


# ---------------------------------------------------------------------------
# single barrier
# ---------------------------------------------------------------------------


def fuss_single_barrier(k: int, order: int) -> PuiseuxSeries:
    """Left absorption of the 2-forward/1-back walk started ``k`` cells above a lone barrier.

    The variable counts forward steps; see :func:`single_barrier_normalization`
    for the map to back-step marking.
    """
    if k < 1:
        raise PreconditionError("k must be positive")
    return PuiseuxSeries.from_function(
        lambda n: Fraction(k, 2**k * 8**n * (3 * n + k)) * math.comb(3 * n + k, n),
        lambda n: n,
        order,
    )


def single_barrier_normalization(k: int) -> tuple[int, int]:
    """(shift, scale): a path with n forward steps has ``k + 2n`` back steps."""
    return k, 2


# ---------------------------------------------------------------------------
# truncated approximation and its failure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproxHorizon:
    """Approximate series, its validity horizon and the first disagreement with the oracle.

    Iterates as ``(series, horizon)``.
    """

    m: int
    s: int
    series: PuiseuxSeries
    horizon: int
    mismatch_exponent: int | None
    delta: Fraction | None
    trial: int | None
    partial_sum: Fraction
    exact_at_trial: Fraction | None

    def __iter__(self) -> Iterator:
        return iter((self.series, self.horizon))


def _approx_series(m: int, s: int, order: int) -> PuiseuxSeries:
    cubic = TrinomialSpec(3, 1, 2)
    extra = order + 3
    r = small_root_series(cubic, 1, 0, extra).series
    if s == m - 1:
        body = r + r * r
        return body.shift(-1).truncate(order)
    body = -(r**4) + (r * r).scale(4) - r.shift(1) + r**3
    return body.shift(-2).truncate(order)


def approx_horizon_series(m: int, s: int, order: int | None = None) -> ApproxHorizon:
    """Single-barrier approximation to right absorption near the right barrier.

    Ignoring the left barrier is harmless until a path can reach it, which
    needs at least ``s`` back steps; so the horizon is ``s`` terms.  The
    first disagreement is reported with ``approx - exact`` and the trial (total
    step count) at which it appears.
    """
    if s not in (m - 1, m - 2):
        raise PreconditionError("start must be m-1 or m-2")
    if m < 3:
        raise PreconditionError("need m >= 3")
    order = order or s + 4
    series = _approx_series(m, s, order)
    oracle = first_passage_series(build_chain(WalkSpec(2, 1, m)), s, "right", order, Marking.BACK_STEPS)
    diff = series.first_difference(oracle)
    horizon = s
    partial = sum((c for e, c in series.items() if e < horizon), Fraction(0))
    if diff is None:
        return ApproxHorizon(m, s, series, horizon, None, None, None, partial, None)
    k = int(diff[0])
    trial = k + -(-(k + m - s) // 2)
    exact = sum((c for _, c in first_passage_series(build_chain(WalkSpec(2, 1, m)), s, "right", trial + 1, Marking.TOTAL_STEPS).items()), Fraction(0))
    return ApproxHorizon(m, s, series, horizon, k, diff[1], trial, partial, exact)


# ---------------------------------------------------------------------------
# numeric Cramer solve for the cubic
# ---------------------------------------------------------------------------


def cramer_coefficients(m: int, side: str, z: float) -> tuple[float, float, float]:
    """Coefficients of ``f(s) = ka a^s + kb b^s + kc c^s`` for the two boundary systems.

    ``side='right'``: f(0)=0, f(m)=f(m+1)=1.  ``side='left'``: f(0)=1,
    f(m)=f(m+1)=0.
    """
    a, b, c = cubic_roots_numeric(z)
    if min(abs(a - b), abs(b - c), abs(a - c)) < 1e-6:
        raise NearDegenerateRoots(f"roots nearly coincide at z={z}")
    delta = a ** (m + 1) * (b**m - c**m) + a**m * (c ** (m + 1) - b ** (m + 1)) + (b - c) * b**m * c**m
    if side == "right":
        return (
            (-(b ** (m + 1)) + b**m + (c - 1) * c**m) / delta,
            (-(a ** (m + 1)) + a**m + (c - 1) * c**m) / -delta,
            (-(a ** (m + 1)) + a**m + (b - 1) * b**m) / delta,
        )
    if side == "left":
        return (
            (b - c) * b**m * c**m / delta,
            (a - c) * a**m * c**m / -delta,
            (a - b) * a**m * b**m / delta,
        )
    raise PreconditionError(f"side must be 'left' or 'right', not {side!r}")


def cramer_gf_numeric(m: int, s: int, side: str, z: float) -> float:
    """Absorption generating function of the 2-forward/1-back walk at a numeric z."""
    if not 0 <= s <= m + 1:
        raise PreconditionError("need 0 <= s <= m+1")
    ka, kb, kc = cramer_coefficients(m, side, z)
    a, b, c = cubic_roots_numeric(z)
    return ka * a**s + kb * b**s + kc * c**s


# ---------------------------------------------------------------------------
# two left cells
# ---------------------------------------------------------------------------


def duchon_two_left(v: int, s: int, order: int, marking: Marking | str = Marking.BACK_STEPS) -> PuiseuxSeries:
    """Absorption on either left cell {0, 1} for the (v-2)-forward/2-back walk, no right barrier.

    With small roots a, b of ``x^v - 2x^2 + z`` the answer is
    ``((1-b) a^s + b^s (a-1)) / (a-b) = h_{s-1}(a,b) - ab h_{s-2}(a,b)``, and
    the complete homogeneous sums follow from the power sums.
    """
    if s < 2:
        raise PreconditionError("start must be at least 2")
    if v < 3:
        raise PreconditionError("need v >= 3")
    marking = Marking.parse(marking)
    if marking is Marking.TOTAL_STEPS:
        raise PreconditionError("total-step marking is not available for this series")
    people = marking is Marking.PEOPLE_LEAVING
    target_order = order
    if people:
        order = -(-order // 2)
    spec = TrinomialSpec(v, 2, 2)
    p1 = small_power_sum(spec, 1, order)
    p2 = small_power_sum(spec, 2, order)
    e1, e2 = p1, (p1 * p1 - p2).scale(Fraction(1, 2))
    h_prev, h = PuiseuxSeries.one(), e1  # h_0, h_1
    hs = [h_prev, h]
    for _ in range(2, s):
        h_prev, h = h, e1 * h - e2 * h_prev
        hs.append(h)
    result = (hs[s - 1] - e2 * hs[s - 2]).truncate(order)
    if people:
        return result.substitute_power(2).truncate(target_order)
    return result


def duchon_inner_series(order: int) -> PuiseuxSeries:
    """Absorption exactly on cell 1 from cell 2 for the 3-forward/2-back walk.

    z counts leaving people, i.e. two per backward step.
    """
    return PuiseuxSeries.from_function(
        lambda n: Fraction(math.comb(5 * n + 2, 2 * n), 2 ** (5 * n + 3) * (2 * n + 1)),
        lambda n: 6 * n + 4,
        order,
    )
