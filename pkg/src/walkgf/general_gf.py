"""Generating functions for y-forward/b-back walks between two barriers.

Everything here concerns the walk that starts at ``s = m-1`` and is absorbed
on the inner-most left cell ``b-1``, with z marking backward steps.  The
denominator is split into blocks ``mu_1, mu_2, ...`` by how many small roots
of ``x^(y+b) - 2x^b + z`` each product of root powers ("string") contains.

Three independent routes produce the same rational function:

* closed-form double sums for ``b = 2`` (``mu1_poly``, ``mu2_poly``,
  ``numerator_series``, ``gf_two_back``, ``gf_exact_3f2b``);
* the string expansion for any ``b`` (``enumerate_strings``,
  ``string_series``, ``mu_decomposition``);
* a Jacobi-Trudi evaluation of the generalized Vandermonde ratio
  (``vandermonde_gf``), valid for any start and target cell.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .exact_algebra import (
    IrrationalCoefficients,
    Polynomial,
    PuiseuxSeries,
    RationalGF,
    binom_general,
    exact_root,
)

__all__ = [
    "NoResidueSolution",
    "SingularFormula",
    "PreconditionError",
    "MuDecomposition",
    "StringTerm",
    "solve_residues",
    "mu1_series",
    "mu1_poly",
    "mu2_poly",
    "numerator_series",
    "numerator_parity_series",
    "numerator_degree_bound",
    "g_root_sum",
    "u_series",
    "g_series",
    "ug_numerator",
    "ug_denominator",
    "gf_two_back",
    "gf_exact_3f2b",
    "overlap_bound",
    "overlap_threshold",
    "v_squared_coefficients",
    "weight_partitions",
    "q_binomial_coefficient",
    "enumerate_strings",
    "string_series",
    "mu_from_strings",
    "mu_decomposition",
    "string_denominator",
    "vandermonde_gf",
]

ONE = Fraction(1)


class NoResidueSolution(ValueError):
    """A congruence that selects the surviving root-of-unity terms has no solution."""


class SingularFormula(ZeroDivisionError):
    """A closed form hits a vanishing denominator for these parameters."""


class PreconditionError(ValueError):
    """Parameters outside the regime a construction is defined for."""


def _require_rational_regime(y: int, m: int) -> None:
    if y < 3 or y % 2 == 0:
        raise PreconditionError(f"y must be odd and at least 3 for the rational regime, got y={y}")
    if m % 2:
        raise PreconditionError(f"m must be even, got m={m}")
    if m <= 2:
        raise PreconditionError("need m > 2")


# ---------------------------------------------------------------------------
# residues and overlap
# ---------------------------------------------------------------------------


def solve_residues(y: int, m: int, kind: str = "large", b: int = 2) -> list[tuple[int, int]]:
    """Pairs ``(w, v)`` such that the branch sum of ``G_w`` keeps the terms with ``n = v``.

    For large roots the condition is ``b(v+1) - (w+1-m) = 0 (mod y)``; for
    small roots ``y v + w + 1 - m = 0 (mod b)``.  ``w`` runs over
    ``0 .. 2(b-1)`` and ``v`` is the smallest nonnegative representative.
    """
    if kind not in ("large", "small"):
        raise ValueError("kind must be 'large' or 'small'")
    modulus = y if kind == "large" else b
    out = []
    for w in range(2 * (b - 1) + 1):
        k = w + 1 - m
        for v in range(modulus):
            arg = b * (v + 1) - k if kind == "large" else y * v + k
            if arg % modulus == 0:
                out.append((w, v))
                break
        else:
            raise NoResidueSolution(f"no {kind}-root residue for w={w}, y={y}, b={b}, m={m}")
    return out


def overlap_threshold(y: int, b: int) -> Fraction:
    """Asymptotic cut-off: a block with ``c`` small roots can matter only if ``c >= b^2/(b+y)``."""
    return Fraction(b * b, b + y)


def _min_small_weight(b: int, c: int) -> int:
    """Smallest possible sum of ``c`` weights taken from one admissible weight vector."""
    if c == 0:
        return 0
    return min(sum(sorted(ws)[:c]) for ws, _ in weight_partitions(b))


def overlap_bound(y: int, b: int, m: int) -> tuple[int, int]:
    """``(u, needed_mu)`` for the denominator of the ``(y, b, m)`` walk.

    ``u`` is the largest index with ``u(y+b) + b - 1 - m < 0``, so the
    denominator is a polynomial in ``z^y`` of degree ``u``.  A block with
    ``c`` small roots starts at ``z^(m(b-c)/b + (S + c)/b - c)`` where ``S`` is
    the least small-weight total; it is needed when that start is at most
    ``y u``.
    """
    if y < 1 or b < 1 or m <= b:
        raise PreconditionError("need y, b >= 1 and m > b")
    u = (m - b) // (y + b)
    needed = 1
    for c in range(b):
        start = Fraction(m * (b - c) + _min_small_weight(b, c) + c, b) - c
        if start <= y * u:
            needed += 1
    return u, needed


# ---------------------------------------------------------------------------
# closed forms for b = 2
# ---------------------------------------------------------------------------


def _mu1_double_sum_coefficient(y: int, m: int, K: int) -> Fraction:
    total = Fraction(0)
    half = Fraction(m, 2)
    for L in range(2 * K + 1):
        M = 2 * K - L
        odd = binom_general(Fraction(-y * L, 2) + half - Fraction(1, 2), L) * binom_general(
            Fraction(-y * M, 2) + half - Fraction(3, 2), M
        )
        even = binom_general(Fraction(-y * L, 2) + half - 1, L) * binom_general(Fraction(-y * M, 2) + half - 1, M)
        total += (-1) ** L * (odd + even)
    return Fraction((-2) ** m, 8) * total / Fraction(2) ** (K * (y + 2))


def _mu1_ratio_coefficient(y: int, m: int, K: int) -> Fraction:
    total = Fraction(0)
    half = Fraction(m, 2)
    for L in range(K + 1):
        M = 2 * K - L
        dens = ((y + 2) * L - m + 1, (y + 2) * M - m + 1)
        if 0 in dens:
            raise SingularFormula(f"vanishing denominator at L={L} for y={y}, m={m}")
        pre = Fraction((-1) ** L, 1 + (1 + L) // (1 + K))
        ratio = Fraction(L * y - m + 1, dens[0]) + Fraction(M * y - m + 1, dens[1])
        odd = binom_general(Fraction(-y * L, 2) + half - Fraction(3, 2), L) * binom_general(
            Fraction(-y * M, 2) + half - Fraction(3, 2), M
        )
        even = binom_general(Fraction(-y * L, 2) + half - 1, L) * binom_general(Fraction(-y * M, 2) + half - 1, M)
        total += pre * (ratio * odd + 2 * even)
    return Fraction((-2) ** m, 8) * total / Fraction(2) ** (K * (y + 2))


def mu1_series(y: int, m: int, order: int, variant: str = "double-sum") -> PuiseuxSeries:
    """The first denominator block as a series in z, exact below ``z^order``.

    ``variant='double-sum'`` is the singularity-free double sum; ``'ratio'`` is the
    half-range form with explicit ratios, which raises
    :class:`SingularFormula` when one of its denominators vanishes.
    """
    _require_rational_regime(y, m)
    coefficient = {"double-sum": _mu1_double_sum_coefficient, "ratio": _mu1_ratio_coefficient}.get(variant)
    if coefficient is None:
        raise ValueError(f"unknown variant {variant!r}")
    coeffs = {y * K: coefficient(y, m, K) for K in range(-(-order // y))}
    return PuiseuxSeries(coeffs, order)


def mu1_poly(y: int, m: int, variant: str = "double-sum") -> Polynomial:
    """First denominator block truncated to its polynomial support ``z^0 .. z^(y u)``."""
    u, _ = overlap_bound(y, 2, m)
    return mu1_series(y, m, y * u + 1, variant).to_polynomial()


def _z_power_series(fn, y: int, terms: int) -> PuiseuxSeries:
    return PuiseuxSeries({y * n: fn(n) / Fraction(2) ** ((y + 2) * n) for n in range(terms)})


def _pow2(e: Fraction) -> Fraction:
    return exact_root(2, e)


def mu2_poly(y: int, m: int, order: int) -> PuiseuxSeries:
    """Second denominator block (one large root per string), exact below ``z^order``.

    It is the sum of three products of binomial series, one per large-root
    weight ``W = 0, 1, 2``, each restricted by the residues of
    :func:`solve_residues`.
    """
    _require_rational_regime(y, m)
    res = dict(solve_residues(y, m, "large"))
    v0, v1, v2 = res[0], res[1], res[2]
    terms = order // y + 2

    def product(a: PuiseuxSeries, b: PuiseuxSeries, shift: Fraction, scale: Fraction) -> PuiseuxSeries:
        out: dict[Fraction, Fraction] = {}
        for i, x in a.items():
            for j, w in b.items():
                e = i + j + shift
                if e < order:
                    out[e] = out.get(e, Fraction(0)) + scale * x * w
        return PuiseuxSeries(out, order)

    half = Fraction(1, 2)
    a1 = product(
        _z_power_series(lambda n: binom_general((2 + y) * n + Fraction(y + 3 - m, 2), 2 * n + 1), y, terms),
        _z_power_series(lambda n: binom_general((y + 2) * n + Fraction(2 * v0 + y * v0 + 1 + m, y), y * n + v0), y, terms),
        v0 + Fraction(y + 1 + m, 2),
        _pow2(Fraction(-y * v0 - y - 2 * v0 - m - 1, y) + (m - y - 5) * half),
    )
    a2 = product(
        _z_power_series(lambda n: binom_general((2 + y) * n + Fraction(y + 1 - m, 2), 2 * n + 1), y, terms),
        _z_power_series(lambda n: binom_general((y + 2) * n + Fraction(2 * v2 + y * v2 - 1 + m, y), y * n + v2), y, terms),
        v2 + Fraction(y - 1 + m, 2),
        _pow2(Fraction(-y * v2 - y - 2 * v2 - m + 1, y) + (m - y - 3) * half),
    )
    a3 = product(
        _z_power_series(lambda n: binom_general((2 + y) * n - Fraction(m, 2), 2 * n), y, terms),
        _z_power_series(lambda n: binom_general((y + 2) * n + Fraction((y + 2) * v1 + m, y), y * n + v1), y, terms),
        v1 + Fraction(m, 2),
        -_pow2(Fraction(m, 2) + Fraction(-y * v1 - y - 2 * v1 - m, y)),
    )
    return a1 + a2 + a3


def numerator_degree_bound(y: int, m: int) -> int:
    """Largest exponent the ``s = m-1`` numerator can carry."""
    return 1 + (y + 1) * (m - 2) // (y + 2)


def numerator_series(y: int, m: int, order: int) -> PuiseuxSeries:
    """``z^m`` times the sum of ``G_1`` over all roots, exact below ``z^order``.

    Its truncation to :func:`numerator_degree_bound` is the polynomial
    numerator of :func:`gf_two_back`.
    """
    _require_rational_regime(y, m)
    return g_root_sum(y, 2, m, 1, order - m).shift(m)


def numerator_parity_series(m: int, order: int) -> PuiseuxSeries:
    """Small-root part of the numerator for ``y = 3`` as one binomial sum, split by parity of m.

    This is the sum of ``G_1`` over the two small roots, without the ``z^m``
    factor; exponents can be negative or half-integral.
    """
    if m % 2 == 0:
        h = m // 2
        return PuiseuxSeries.from_function(
            lambda n: binom_general(5 * n - h, 2 * n) / Fraction(2) ** (5 * n - h + 1),
            lambda n: 3 * n - h,
            order,
        )
    h = Fraction(m, 2)
    return PuiseuxSeries.from_function(
        lambda n: binom_general(5 * n + Fraction(5, 2) - h, 2 * n + 1) / _pow2(5 * n + Fraction(7, 2) - h),
        lambda n: 3 * n + Fraction(3, 2) - h,
        order,
    )


# -- u/g route -------------------------------------------------------------
#
# The u and g sums carry half-integer powers of 2 next to half-integer powers
# of z, so they are built in t = z/2 and only converted back once every
# half-integer exponent has cancelled.


def _ug(y: int, M: int, order_t: Fraction, alternate: bool) -> PuiseuxSeries:
    out: dict[Fraction, Fraction] = {}
    n = 0
    while True:
        e = Fraction(y * n - M, 2) - 1
        if e >= order_t:
            break
        c = binom_general(Fraction((y + 2) * n - M, 2) - 1, n) / Fraction(2) ** (n + 2)
        if alternate and (n - M) % 2:
            c = -c
        if c:
            out[e] = out.get(e, Fraction(0)) + c
        n += 1
    return PuiseuxSeries(out, order_t)


def u_series(y: int, M: int, order_t: Fraction) -> PuiseuxSeries:
    """Alternating sum ``u[M]`` as a series in ``t = z/2``."""
    return _ug(y, M, Fraction(order_t), True)


def g_series(y: int, M: int, order_t: Fraction) -> PuiseuxSeries:
    """Non-alternating partner ``g[M]`` as a series in ``t = z/2``."""
    return _ug(y, M, Fraction(order_t), False)


def _t_to_z(series: PuiseuxSeries, m: int, order: int) -> PuiseuxSeries:
    """Multiply by ``z^m`` and rewrite ``t^E`` as ``z^E / 2^E``."""
    out = {}
    for e, c in series.items():
        E = e + m
        if E >= order:
            continue
        if E.denominator != 1:
            raise IrrationalCoefficients(f"half-integer exponent t^{E} survived")
        out[E] = c * Fraction(2) ** m / Fraction(2) ** E
    return PuiseuxSeries(out, order)


def _ug_order(y: int, m: int, order: int) -> Fraction:
    # each factor has valuation about -(m+2)/2 in t; leave room for the partner
    return Fraction(order - m) + Fraction(m + 2, 2) + 2


def ug_numerator(y: int, m: int, order: int) -> PuiseuxSeries:
    """``z^m (u[m-2] + g[m-2])`` in z."""
    T = _ug_order(y, m, order)
    return _t_to_z(u_series(y, m - 2, T) + g_series(y, m - 2, T), m, order)


def ug_denominator(y: int, m: int, order: int) -> PuiseuxSeries:
    """``z^m (2u[m-2]g[m-2] - u[m-1]g[m-3] - g[m-1]u[m-3])`` in z.

    The cross term must be taken symmetrically; the one-sided product leaves
    half-integer powers behind.
    """
    T = _ug_order(y, m, order)
    u2, g2 = u_series(y, m - 2, T), g_series(y, m - 2, T)
    u1, g1 = u_series(y, m - 1, T), g_series(y, m - 1, T)
    u3, g3 = u_series(y, m - 3, T), g_series(y, m - 3, T)
    body = (u2 * g2).scale(2) - u1 * g3 - g1 * u3
    return _t_to_z(body, m, order)


def _correction_terms(kappa: int, order: int) -> tuple[PuiseuxSeries, PuiseuxSeries, PuiseuxSeries]:
    """The three one-large-root products for ``y = 3, m = 6 kappa`` (before the ``z^m`` factor)."""
    terms = order // 3 + 3

    def z3(fn):
        return PuiseuxSeries({3 * n: fn(n) / Fraction(2) ** (5 * n) for n in range(terms)})

    def prod(a, b, shift, c):
        return (a * b).shift(shift).scale(c).truncate(order)

    k = kappa
    a3 = prod(
        z3(lambda n: binom_general(2 * k + 5 * n, 3 * n)),
        z3(lambda n: binom_general(5 * n - 3 * k, 2 * n)),
        -3 * k,
        -Fraction(2) ** (k - 1),
    )
    a2 = prod(
        z3(lambda n: binom_general(2 * k + 3 + 5 * n, 3 * n + 2)),
        z3(lambda n: binom_general(5 * n - 3 * k + 2, 2 * n + 1)),
        -3 * k + 3,
        Fraction(2) ** (k - 7),
    )
    a1 = prod(
        z3(lambda n: binom_general(2 * k + 2 + 5 * n, 3 * n + 1)),
        z3(lambda n: binom_general(5 * n - 3 * k + 3, 2 * n + 1)),
        -3 * k + 3,
        Fraction(2) ** (k - 7),
    )
    return a1, a2, a3


def gf_exact_3f2b(kappa: int, order: int | None = None) -> RationalGF:
    """Exact GF for the 3-forward/2-back walk with ``m = 6 kappa``.

    The denominator is the symmetrized u/g block plus ``z^m`` times the three
    one-large-root corrections; the numerator is ``z^m (u[m-2] + g[m-2])``.
    ``order`` only controls how far the series are carried before truncation.
    """
    if kappa < 1:
        raise PreconditionError("kappa must be a positive integer")
    y, m = 3, 6 * kappa
    u, _ = overlap_bound(y, 2, m)
    top = max(y * u, numerator_degree_bound(y, m)) + 1
    order = max(order or 0, top)
    corr = sum(_correction_terms(kappa, order - m + 3), PuiseuxSeries.zero(order - m + 3)).shift(m)
    den = (ug_denominator(y, m, order) + corr).truncate(y * u + 1)
    num = ug_numerator(y, m, order).truncate(numerator_degree_bound(y, m) + 1)
    return RationalGF(num.to_polynomial(), den.to_polynomial(), shift=-1)


def gf_two_back(y: int, m: int) -> RationalGF:
    """Inner-most left absorption from ``s = m-1`` for the y-forward/2-back walk.

    ``numerator / (mu_1 + mu_2)`` where ``mu_2`` is added only when the
    overlap analysis says it reaches the denominator's support.  The raw
    quotient carries one extra z, recorded as ``shift = -1``.
    """
    _require_rational_regime(y, m)
    u, needed = overlap_bound(y, 2, m)
    top = y * u + 1
    den = mu1_series(y, m, top)
    if needed > 1:
        den = den + mu2_poly(y, m, top)
    num = numerator_series(y, m, numerator_degree_bound(y, m) + 1)
    return RationalGF(num.to_polynomial(), den.to_polynomial(), shift=-1)


# ---------------------------------------------------------------------------
# string calculus
# ---------------------------------------------------------------------------


def v_squared_coefficients(b: int) -> dict[tuple[int, ...], int]:
    """Coefficients of the squared Vandermonde in b variables, keyed by exponent vector."""
    poly: dict[tuple[int, ...], int] = {(0,) * b: 1}
    for i, j in combinations(range(b), 2):
        for _ in range(2):
            nxt: dict[tuple[int, ...], int] = {}
            for mono, c in poly.items():
                for idx, sign in ((i, 1), (j, -1)):
                    e = list(mono)
                    e[idx] += 1
                    key = tuple(e)
                    nxt[key] = nxt.get(key, 0) + sign * c
            poly = {k: v for k, v in nxt.items() if v}
    return poly


@lru_cache(maxsize=None)
def weight_partitions(b: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """``(weights, lambda)`` for every weight multiset with nonzero coefficient.

    Weights are listed in decreasing order; they sum to ``b(b-1)`` and none
    exceeds ``2(b-1)``.
    """
    coeffs = v_squared_coefficients(b)
    out = []
    for mono, c in coeffs.items():
        if list(mono) == sorted(mono, reverse=True):
            out.append((mono, c))
    return tuple(sorted(out, reverse=True))


def q_binomial_coefficient(n: int, k: int, power: int) -> int:
    """Coefficient of ``q^power`` in the Gaussian binomial ``[n choose k]_q``."""
    # count partitions fitting in a k x (n-k) box
    @lru_cache(maxsize=None)
    def count(total: int, parts: int, cap: int) -> int:
        if total == 0:
            return 1
        if parts == 0 or cap == 0:
            return 0
        return sum(count(total - p, parts - 1, p) for p in range(1, min(cap, total) + 1))

    return count(power, k, n - k)


@dataclass(frozen=True)
class StringTerm:
    """All strings of one weight pattern with a fixed small/large split.

    ``p`` counts the distinct root products in this split and ``partition_p``
    the count for the whole weight pattern summed over its splits.  When m
    is known, ``residues`` lists ``(v, V, theta)``: ``v`` and ``V`` are the
    residues of the summation indices on the small and large factors and
    ``theta`` the averaged root-of-unity factor that survives.
    """

    y: int
    b: int
    small_weights: tuple[int, ...]
    large_weights: tuple[int, ...]
    lam: int
    p: int
    partition_p: int
    m: int | None = None
    residues: tuple[tuple[tuple[int, ...], tuple[int, ...], Fraction], ...] = ()
    Q: Fraction | None = None

    @property
    def mu_index(self) -> int:
        return len(self.large_weights) + 1

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(sorted(self.small_weights + self.large_weights, reverse=True))

    def to_json(self) -> dict:
        out = {
            "small_weights": list(self.small_weights),
            "large_weights": list(self.large_weights),
            "lambda": self.lam,
            "p": self.p,
            "partition_p": self.partition_p,
        }
        if self.m is not None:
            out["residues"] = [
                {"v": list(v), "V": list(V), "theta": str(t)} for v, V, t in self.residues
            ]
            out["Q"] = None if self.Q is None else str(self.Q)
        return out


def _mult_factorial(ws: Iterable[int]) -> int:
    out = 1
    for c in Counter(ws).values():
        out *= math.factorial(c)
    return out


def _sub_multisets(ws: tuple[int, ...], size: int) -> list[tuple[int, ...]]:
    return sorted({tuple(sorted(c, reverse=True)) for c in combinations(ws, size)}, reverse=True)


def _multiset_minus(ws: tuple[int, ...], sub: tuple[int, ...]) -> tuple[int, ...]:
    rest = Counter(ws) - Counter(sub)
    return tuple(sorted(rest.elements(), reverse=True))


def enumerate_strings(y: int, b: int, mu_index: int, m: int | None = None) -> list[StringTerm]:
    """String terms of ``mu_{mu_index}``: ``mu_index - 1`` weights on large roots, the rest on small.

    With ``m`` given, each term also carries its residue solutions and the
    leading exponent ``Q`` of its series (before the ``z^m`` factor).
    Output is ordered lexicographically on (weights, small weights).
    """
    if not 1 <= mu_index <= b + 1:
        raise PreconditionError(f"mu_index must be in 1..{b + 1}")
    g = mu_index - 1
    if g > y:
        return []
    j = b - g
    out = []
    for ws, lam in weight_partitions(b):
        partition_p = math.comb(b, j) * math.comb(y, g) * math.factorial(b) // _mult_factorial(ws)
        for small in _sub_multisets(ws, j):
            large = _multiset_minus(ws, small)
            p = (
                math.comb(b, j) * math.comb(y, g) * math.factorial(j) * math.factorial(g)
                // (_mult_factorial(small) * _mult_factorial(large))
            )
            term = StringTerm(y, b, small, large, lam, p, partition_p)
            if m is not None:
                term = _attach_residues(term, m)
            out.append(term)
    return out


# -- per-branch series of G_w = d/dz (x^(w+1-m) / (w+1-m)) ------------------
#
# Everything is computed for the normalized trinomial X^v - X^b + Z (j = 1)
# and rescaled at the end; x = c X with c^y = j and Z = z / c^v.


@dataclass(frozen=True)
class _Factor:
    """One G-factor split by the residue of its summation index.

    ``classes[r]`` is ``(phase, series)``: every term in the class carries
    the root of unity ``exp(2 pi i I phase / M)`` on branch ``I``.
    """

    modulus: int
    classes: dict[int, tuple[int, PuiseuxSeries]]
    valuation: Fraction


def _small_factor(y: int, b: int, m: int, w: int, order: Fraction) -> _Factor:
    k = w + 1 - m
    buckets: dict[int, dict[Fraction, Fraction]] = {r: {} for r in range(b)}
    n = 0
    lowest = None
    while True:
        e = Fraction(y * n + k, b) - 1
        if lowest is not None and e >= order:
            break
        if y * n + k != 0:
            c = binom_general(Fraction((y + b) * n + k, b) - 1, n) / b
            if c:
                buckets[n % b][e] = c
            if lowest is None:
                lowest = e
                # an order below the first term would make every class look empty
                order = max(order, lowest + 1)
        n += 1
    classes = {r: ((y * r + k) % b, PuiseuxSeries(t, order)) for r, t in buckets.items()}
    return _Factor(b, classes, lowest)


def _large_factor(y: int, b: int, m: int, w: int, order: Fraction) -> _Factor:
    k = w + 1 - m
    buckets: dict[int, dict[Fraction, Fraction]] = {r: {} for r in range(y)}
    order = max(Fraction(order), ONE)
    n = 0
    while n < order:
        c = -binom_general(Fraction((y + b) * n + b - k, y), n) / y
        if c:
            buckets[n % y][Fraction(n)] = c
        n += 1
    classes = {r: ((b * (r + 1) - k) % y, PuiseuxSeries(t, order)) for r, t in buckets.items()}
    return _Factor(y, classes, Fraction(0))


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def _injective_phase_sum(phases: Sequence[int], modulus: int) -> int:
    """Sum over injective branch assignments of ``prod_i omega^(I_i phase_i)``.

    Moebius inversion on the set-partition lattice turns the injective sum
    into unrestricted sums, each of which is ``modulus`` or 0.
    """
    total = 0
    for part in _set_partitions(list(range(len(phases)))):
        term = 1
        for block in part:
            if sum(phases[i] for i in block) % modulus:
                term = 0
                break
            term *= (-1) ** (len(block) - 1) * math.factorial(len(block) - 1) * modulus
        total += term
    return total


def _falling(n: int, k: int) -> int:
    return math.perm(n, k) if 0 <= k <= n else 0


def _branch_sum(factors: list[_Factor], order: Fraction) -> tuple[PuiseuxSeries, list[tuple[tuple[int, ...], Fraction]]]:
    """Sum over injective branch assignments of the product of the factors.

    Returns the series (exact below ``order``) and the residue vectors with
    their nonzero averaged phase factors.
    """
    if not factors:
        return PuiseuxSeries.one(), [((), ONE)]
    M = factors[0].modulus
    count = _falling(M, len(factors))
    result = PuiseuxSeries.zero(order)
    residues = []

    def rec(i: int, chosen: list[int]) -> None:
        nonlocal result
        if i == len(factors):
            phases = [factors[t].classes[r][0] for t, r in enumerate(chosen)]
            theta = _injective_phase_sum(phases, M)
            if theta == 0:
                return
            residues.append((tuple(chosen), Fraction(theta, count)))
            prod = PuiseuxSeries.one()
            for t, r in enumerate(chosen):
                prod = prod * factors[t].classes[r][1]
            result = result + prod.scale(theta).truncate(order)
            return
        for r in range(M):
            rec(i + 1, chosen + [r])

    if count:
        rec(0, [])
    return result, residues


def _factor_orders(valuations: list[Fraction], order: Fraction) -> list[Fraction]:
    total = sum(valuations, Fraction(0))
    return [order - (total - v) for v in valuations]


def _string_parts(y: int, b: int, m: int, small: tuple[int, ...], large: tuple[int, ...], order: Fraction):
    """Branch sums of the small and large factors, each carried far enough for their product."""
    small_vals = [Fraction(w + 1 - m, b) - 1 for w in small]
    s_factors = [_small_factor(y, b, m, w, o) for w, o in zip(small, _factor_orders(small_vals, order))]
    S, s_res = _branch_sum(s_factors, order)
    # the large part starts at z^0, so only the small part's valuation matters
    s_low = S.valuation if S.valuation is not None else S.order
    l_order = order - s_low
    L, l_res = _branch_sum([_large_factor(y, b, m, w, l_order) for w in large], l_order)
    return S, s_res, L, l_res


def _rescale(series: PuiseuxSeries, c_power: int, v: int, y: int, j: Fraction) -> PuiseuxSeries:
    """Map a j = 1 series in Z to the j-trinomial: coefficient at z^e gains ``c^(c_power - v e)``."""
    if j == 1:
        return series
    return series.map_coefficients(lambda e, c: c * exact_root(j, Fraction(c_power - v * e, y)))


def _attach_residues(term: StringTerm, m: int) -> StringTerm:
    y, b = term.y, term.b
    small_res = _residue_classes(y, b, m, term.small_weights, "small")
    large_res = _residue_classes(y, b, m, term.large_weights, "large")
    residues = tuple((v, V, ts * tl) for v, ts in small_res for V, tl in large_res)
    Q = None
    if residues:
        Q = min(
            sum((Fraction(y * r + w + 1 - m, b) - 1 for r, w in zip(v, term.small_weights)), Fraction(0))
            + sum(V, 0)
            for v, V, _ in residues
        )
    return StringTerm(y, b, term.small_weights, term.large_weights, term.lam, term.p, term.partition_p, m, residues, Q)


def _residue_classes(y: int, b: int, m: int, ws: tuple[int, ...], kind: str) -> list[tuple[tuple[int, ...], Fraction]]:
    M = b if kind == "small" else y
    count = _falling(M, len(ws))
    if not ws:
        return [((), ONE)]
    if count == 0:
        return []
    out = []

    def phase(w: int, r: int) -> int:
        k = w + 1 - m
        return (y * r + k) % b if kind == "small" else (b * (r + 1) - k) % y

    def rec(i: int, chosen: list[int]) -> None:
        if i == len(ws):
            theta = _injective_phase_sum([phase(w, r) for w, r in zip(ws, chosen)], M)
            if theta:
                out.append((tuple(chosen), Fraction(theta, count)))
            return
        for r in range(M):
            rec(i + 1, chosen + [r])

    rec(0, [])
    return out


def _c_power(y: int, b: int, m: int, weight_sum: int, factors: int) -> int:
    """Power of ``c`` collected from ``z^m`` and the G factors."""
    v = y + b
    return v * m + weight_sum - factors * (m + v - 1)


def string_series(term: StringTerm, m: int, order: int, j: Fraction | int = 2) -> PuiseuxSeries:
    """Contribution of one string term to its denominator block, exact below ``z^order``.

    This is ``-(-1)^b z^m lambda / (mult!)`` times the branch sums of the
    small and large G-products.  ``j`` is the middle coefficient of the
    trinomial; ``j = 1`` gives the normalized form.
    """
    y, b = term.y, term.b
    if term.m is not None and term.m != m:
        raise ValueError("term was built for a different m")
    order_f = Fraction(order)
    inner = order_f - m
    S, s_res, L, l_res = _string_parts(y, b, m, term.small_weights, term.large_weights, inner)
    if not s_res or not l_res:
        raise NoResidueSolution(f"no surviving residues for {term.small_weights}|{term.large_weights}")
    body = (S * L).truncate(inner)
    coef = Fraction(-((-1) ** b) * term.lam, _mult_factorial(term.small_weights) * _mult_factorial(term.large_weights))
    raw = body.scale(coef).shift(m)
    return _rescale(raw, _c_power(y, b, m, b * (b - 1), b), y + b, y, Fraction(j)).truncate(order)


def mu_from_strings(y: int, b: int, m: int, mu_index: int, order: int, j: Fraction | int = 2) -> PuiseuxSeries:
    """``mu_{mu_index}`` as the sum of its string series."""
    total = PuiseuxSeries.zero(order)
    for term in enumerate_strings(y, b, mu_index):
        try:
            total = total + string_series(term, m, order, j)
        except NoResidueSolution:
            continue  # every branch assignment cancels
    return total


def g_root_sum(y: int, b: int, m: int, w: int, order: Fraction, j: Fraction | int = 2, part: str = "all") -> PuiseuxSeries:
    """Sum of ``G_w = -x^(w-m) / P'(x)`` over the small, large or all roots, exact below ``z^order``."""
    if part not in ("all", "small", "large"):
        raise ValueError("part must be 'all', 'small' or 'large'")
    order = Fraction(order)
    total = PuiseuxSeries.zero(order)
    if part in ("all", "small"):
        total = total + _branch_sum([_small_factor(y, b, m, w, order)], order)[0]
    if part in ("all", "large"):
        total = total + _branch_sum([_large_factor(y, b, m, w, order)], order)[0]
    v = y + b
    # no z^m factor here, so drop its c^(v m)
    return _rescale(total, _c_power(y, b, m, w, 1) - v * m, v, y, Fraction(j)).truncate(order)


@dataclass(frozen=True)
class MuDecomposition:
    """Denominator blocks truncated to the denominator's support ``z^0 .. z^(y u)``."""

    y: int
    b: int
    m: int
    mu_terms: tuple[Polynomial, ...]
    needed_count: int
    degree_bound: int

    @property
    def denominator(self) -> Polynomial:
        total = Polynomial()
        for p in self.mu_terms[: self.needed_count]:
            total = total + p
        return total

    def to_json(self) -> dict:
        return {
            "y": self.y,
            "b": self.b,
            "m": self.m,
            "degree_bound": self.degree_bound,
            "needed_count": self.needed_count,
            "mu_terms": [p.to_json() for p in self.mu_terms],
            "denominator": self.denominator.to_json(),
        }


def mu_decomposition(y: int, b: int, m: int, j: Fraction | int = 2, all_terms: bool = False) -> MuDecomposition:
    """Blocks ``mu_1 .. mu_needed`` (or every block with ``all_terms``) on ``z^0 .. z^(y u)``.

    Requires ``gcd(y, b) = 1``; otherwise only a sublattice of cells is
    reachable and the root-of-unity bookkeeping degenerates.
    """
    if math.gcd(y, b) != 1:
        raise PreconditionError(f"string expansion needs gcd(y, b) = 1, got y={y}, b={b}")
    u, needed = overlap_bound(y, b, m)
    top = y * u + 1
    count = min(b + 1, y + 1) if all_terms else needed
    terms = []
    for idx in range(1, count + 1):
        series = mu_from_strings(y, b, m, idx, top, j)
        terms.append(_as_polynomial(series))
    return MuDecomposition(y, b, m, tuple(terms), needed, u)


def _as_polynomial(series: PuiseuxSeries) -> Polynomial:
    for e, _ in series.items():
        if e.denominator != 1 or e < 0:
            raise IrrationalCoefficients(f"non-polynomial exponent {e} in a denominator block")
    return series.to_polynomial()


def string_denominator(y: int, b: int, m: int, j: Fraction | int = 2) -> Polynomial:
    """Sum of the needed denominator blocks, i.e. the GF denominator up to a scalar."""
    return mu_decomposition(y, b, m, j).denominator


# ---------------------------------------------------------------------------
# Jacobi-Trudi route
# ---------------------------------------------------------------------------


def _complete_homogeneous(y: int, b: int, top: int) -> list[Polynomial]:
    """``h_0 .. h_top`` of all roots of ``x^(y+b) - 2x^b + z``."""
    h = [Polynomial()] * (top + 1)
    for k in range(top + 1):
        if k == 0:
            h[k] = Polynomial({0: 1})
            continue
        acc = Polynomial()
        if k - y >= 0:
            acc = acc + h[k - y].scale(2)
        if k - y - b >= 0:
            acc = acc - h[k - y - b] * Polynomial.monomial(1)
        h[k] = acc
    return h


def _poly_det(mat: list[list[Polynomial]]) -> Polynomial:
    """Fraction-free (Bareiss) determinant over Q[z]."""
    n = len(mat)
    if n == 0:
        return Polynomial({0: 1})
    a = [row[:] for row in mat]
    sign = 1
    prev = Polynomial({0: 1})
    for k in range(n - 1):
        if a[k][k].is_zero():
            swap = next((r for r in range(k + 1, n) if not a[r][k].is_zero()), None)
            if swap is None:
                return Polynomial()
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for jj in range(k + 1, n):
                a[i][jj] = (a[i][jj] * a[k][k] - a[i][k] * a[k][jj]) // prev
        prev = a[k][k]
    return a[n - 1][n - 1].scale(sign)


def _schur(shape: Sequence[int], h: list[Polynomial]) -> Polynomial:
    parts = [p for p in shape if p > 0]
    n = len(parts)

    def entry(i: int, jj: int) -> Polynomial:
        idx = parts[i] - i + jj
        return h[idx] if 0 <= idx < len(h) else Polynomial()

    return _poly_det([[entry(i, jj) for jj in range(n)] for i in range(n)])


def _shape_and_sign(exponents: list[int]) -> tuple[list[int], int]:
    """Sort exponents ascending; return the partition of the alternant and the sorting sign."""
    sign = 1
    arr = list(exponents)
    for i in range(len(arr)):
        for k in range(len(arr) - 1 - i):
            if arr[k] > arr[k + 1]:
                arr[k], arr[k + 1] = arr[k + 1], arr[k]
                sign = -sign
    n = len(arr)
    shape = [arr[n - 1 - i] - (n - 1 - i) for i in range(n)]
    return shape, sign


def vandermonde_gf(y: int, b: int, m: int, s: int | None = None, target: int | Iterable[int] | None = None) -> RationalGF:
    """Exact back-step GF for absorption in ``target`` cells from ``s`` as a ratio of Schur polynomials.

    The absorption function is ``sum_i C_i x_i^s`` over the roots; Cramer's
    rule writes it as a ratio of generalized Vandermonde determinants, i.e.
    of Schur functions of the roots, which Jacobi-Trudi expresses through
    the complete homogeneous sums ``h_k = 2 h_(k-y) - z h_(k-y-b)``.
    Defaults: ``s = m-1`` and target the inner-most left cell ``b-1``.
    """
    if y < 1 or b < 1 or m <= b:
        raise PreconditionError("need y, b >= 1 and m > b")
    s = m - 1 if s is None else s
    if not b <= s <= m - 1:
        raise PreconditionError(f"start {s} is not a transient cell")
    cells = list(range(b)) + list(range(m, m + y))
    targets = [b - 1] if target is None else ([target] if isinstance(target, int) else list(target))
    for t in targets:
        if t not in cells:
            raise PreconditionError(f"target {t} is not an absorbing cell")
    top = (m + y) * 2 + y + b
    h = _complete_homogeneous(y, b, top)
    base_shape, base_sign = _shape_and_sign(cells)
    den = _schur(base_shape, h).scale(base_sign)
    num = Polynomial()
    for t in targets:
        shape, sign = _shape_and_sign([s if c == t else c for c in cells])
        num = num + _schur(shape, h).scale(sign)
    return RationalGF(num, den).reduced()
