"""Lagrange-Burmann series for powers of roots of ``x^v - j x^u + z = 0``.

The trinomial has ``u`` *small* roots (vanishing like ``z^(1/u)``) and ``v-u``
*large* roots (tending to the ``(v-u)``-th roots of ``j``).  Every branch is
generated from the normalized trinomial ``X^v - X^u + Z = 0``: with
``c = j^(1/(v-u))`` one has ``x = c X`` and ``Z = z / c^v``.  The normalized
series always have rational magnitudes, so irrationality can only enter
through roots of unity or through fractional powers of ``j``; both are
detected exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .exact_algebra import (
    INF,
    IrrationalCoefficients,
    Number,
    PuiseuxSeries,
    binom_general,
    exact_root,
    series_invert,
)

__all__ = [
    "TrinomialSpec",
    "RootPowerSeries",
    "DiscriminantViolation",
    "small_root_series",
    "large_root_series",
    "root_series_numeric",
    "small_power_sum",
    "large_power_sum",
    "phi_sum_series",
    "phi_sum_derivative",
    "cubic_roots_numeric",
    "trinomial_roots_numeric",
    "trinomial_residual",
    "check_reduction_identity",
    "check_root_derivative_identities",
    "check_one_back_tail_cancellation",
]


class DiscriminantViolation(ValueError):
    """The cubic x^3 - 2x + z has non-real roots for this z."""


@dataclass(frozen=True)
class TrinomialSpec:
    v: int
    u: int
    j: Fraction = field(default=Fraction(2))

    def __post_init__(self) -> None:
        object.__setattr__(self, "j", Fraction(self.j))
        if not self.v > self.u >= 1:
            raise ValueError(f"need v > u >= 1, got v={self.v}, u={self.u}")
        if self.j == 0:
            raise ValueError("j must be nonzero")

    @property
    def d(self) -> int:
        return self.v - self.u

    def branches(self, kind: str) -> int:
        return self.u if kind == "small" else self.d

    def normalized(self) -> "TrinomialSpec":
        return TrinomialSpec(self.v, self.u, 1)


@dataclass(frozen=True)
class RootPowerSeries:
    """k-th power of one root branch.

    When ``scaled`` is true the series is in the normalized variable ``Z`` and
    represents ``X^k`` for ``X^v - X^u + Z = 0``.
    """

    spec: TrinomialSpec
    k: int
    branch: int
    kind: str
    series: PuiseuxSeries
    scaled: bool = False


# ---------------------------------------------------------------------------
# term generators in the normalized variable
# ---------------------------------------------------------------------------
# Each yields (exponent of Z, phase p, magnitude) meaning magnitude * zeta^p * Z^exponent
# with zeta = exp(2 pi i / modulus).


def _small_terms(v: int, u: int, k: int, branch: int, order: Fraction) -> Iterator[tuple[Fraction, int, Fraction]]:
    d = v - u
    n = 0
    while True:
        top = d * n + k
        e = Fraction(top, u)
        if e >= order:
            return
        if top == 0:
            yield Fraction(0), 0, Fraction(-d, u)
        else:
            c = Fraction(k, top) * binom_general(Fraction(v * n + k, u) - 1, n)
            if c:
                yield e, branch * top, c
        n += 1


def _large_terms(v: int, u: int, k: int, branch: int, order: Fraction) -> Iterator[tuple[Fraction, int, Fraction]]:
    d = v - u
    if order > 0:
        yield Fraction(0), -branch * k, Fraction(1)
    if k == 0:
        return
    n = 0
    while n + 1 < order:
        c = Fraction(-k, d * (n + 1)) * binom_general(Fraction(v * n + u - k, d), n)
        if c:
            yield Fraction(n + 1), branch * (u * (n + 1) - k), c
        n += 1


def _terms(spec: TrinomialSpec, kind: str, k: int, branch: int, order: Fraction):
    if kind not in ("small", "large"):
        raise ValueError(f"kind must be 'small' or 'large', not {kind!r}")
    count = spec.branches(kind)
    if not 0 <= branch < count:
        raise ValueError(f"branch {branch} out of range 0..{count - 1} for {kind} roots")
    gen = _small_terms if kind == "small" else _large_terms
    return gen(spec.v, spec.u, k, branch, order), (spec.u if kind == "small" else spec.d)


def _real_phase(p: int, modulus: int) -> int:
    """zeta^p as +-1, or raise when it is not real."""
    if (2 * p) % modulus:
        raise IrrationalCoefficients(f"phase exp(2 pi i {p}/{modulus}) is not rational")
    return 1 if (p % modulus) == 0 else -1


def _materialize(spec: TrinomialSpec, kind: str, k: int, branch: int, order: Number, scaled: bool) -> RootPowerSeries:
    order = Fraction(order) if order != INF else INF
    terms, modulus = _terms(spec, kind, k, branch, order)
    out: dict[Fraction, Fraction] = {}
    for e, p, c in terms:
        c *= _real_phase(p, modulus)
        if not scaled:
            c *= exact_root(spec.j, Fraction(k - spec.v * e, spec.d))
        out[e] = out.get(e, Fraction(0)) + c
    return RootPowerSeries(spec, k, branch, kind, PuiseuxSeries(out, order), scaled)


def small_root_series(spec: TrinomialSpec, k: int, branch: int = 0, order: Number = 10, scaled: bool = False) -> RootPowerSeries:
    """Series of ``r_I(z)^k`` for the small root with branch index ``I``.

    The branch phase is ``exp(2 pi i I / u)`` on the leading ``z^(1/u)``.
    Raises :class:`IrrationalCoefficients` when the branch phase or a power
    of ``j`` is irrational; ``scaled=True`` removes the ``j`` powers.
    """
    return _materialize(spec, "small", k, branch, order, scaled)


def large_root_series(spec: TrinomialSpec, k: int, branch: int = 0, order: Number = 10, scaled: bool = False) -> RootPowerSeries:
    """Series of ``R_J(z)^k`` for the large root with ``R_J(0) = j^(1/(v-u)) exp(-2 pi i J/(v-u))``."""
    return _materialize(spec, "large", k, branch, order, scaled)


def root_series_numeric(spec: TrinomialSpec, kind: str, branch: int, k: int, z: complex, order: int = 200) -> complex:
    """Evaluate a branch power by summing its series numerically (complex phases allowed)."""
    terms, modulus = _terms(spec, kind, k, branch, Fraction(order))
    c = float(spec.j) ** (1.0 / spec.d) if spec.j > 0 else complex(float(spec.j)) ** (1.0 / spec.d)
    zz = z / c**spec.v
    total = 0j
    for e, p, mag in terms:
        total += float(mag) * cmath.exp(2j * math.pi * p / modulus) * (zz ** float(e) if e else 1)
    return total * c**k


# ---------------------------------------------------------------------------
# power sums over branches (always rational)
# ---------------------------------------------------------------------------


def small_power_sum(spec: TrinomialSpec, k: int, order: Number) -> PuiseuxSeries:
    """Sum over the ``u`` small roots of ``r^k``."""
    order = Fraction(order)
    v, u, d = spec.v, spec.u, spec.d
    out: dict[Fraction, Fraction] = {}
    for e, _, c in _small_terms(v, u, k, 0, order):
        if (e * u) % u:
            continue  # branch phases sum to zero
        out[e] = out.get(e, Fraction(0)) + u * c * exact_root(spec.j, Fraction(k - v * e, d))
    return PuiseuxSeries(out, order)


def large_power_sum(spec: TrinomialSpec, k: int, order: Number) -> PuiseuxSeries:
    """Sum over the ``v-u`` large roots of ``R^k``."""
    order = Fraction(order)
    v, u, d = spec.v, spec.u, spec.d
    out: dict[Fraction, Fraction] = {}
    for e, _, c in _large_terms(v, u, k, 0, order):
        phase_arg = -k if e == 0 else u * int(e) - k
        if phase_arg % d:
            continue
        out[e] = out.get(e, Fraction(0)) + d * c * exact_root(spec.j, Fraction(k - v * e, d))
    return PuiseuxSeries(out, order)


QUINTIC = TrinomialSpec(5, 2, 2)


def phi_sum_series(k: int, order: Number, spec: TrinomialSpec = QUINTIC) -> PuiseuxSeries:
    """Sum of the k-th powers of the large roots (default: x^5 - 2x^2 + z)."""
    return large_power_sum(spec, k, order)


def phi_sum_derivative(k: int, order: Number, spec: TrinomialSpec = QUINTIC) -> PuiseuxSeries:
    """Direct series for ``d/dz`` of the large-root power sum, with the phase sum kept explicit.

    The phase sum over branches equals ``v-u`` exactly when
    ``u(n+1) - k`` is divisible by ``v-u`` and vanishes otherwise.
    """
    v, u, d = spec.v, spec.u, spec.d
    out = {}
    for n in range(int(math.ceil(Fraction(order)))):
        theta = sum(cmath.exp(-2j * math.pi * i * (u * (1 + n) - k) / d) for i in range(d))
        if abs(theta) < 1e-9:
            continue
        theta_int = round(theta.real)
        out[n] = Fraction(-k, d) * theta_int * exact_root(spec.j, Fraction(k - v * (n + 1), d)) * binom_general(Fraction(v * n + u - k, d), n)
    return PuiseuxSeries(out, order)


# ---------------------------------------------------------------------------
# numerics
# ---------------------------------------------------------------------------


def cubic_roots_numeric(z: float) -> tuple[float, float, float]:
    """Real roots ``(a, b, c)`` of ``x^3 - 2x + z``: a near sqrt 2, b small, c near -sqrt 2."""
    arg = 0.75 * z * math.sqrt(1.5)
    if not 27 * z * z < 32:
        raise DiscriminantViolation(f"27 z^2 must be < 32, got z={z}")
    r = 2 * math.sqrt(2 / 3)
    b = r * math.sin(math.asin(arg) / 3)
    c = -r * math.cos(math.acos(arg) / 3)
    return -b - c, b, c


def trinomial_roots_numeric(spec: TrinomialSpec, z: complex) -> np.ndarray:
    """All roots of ``x^v - j x^u + z``, sorted by (real, imaginary) part."""
    coeffs = np.zeros(spec.v + 1, dtype=complex)
    coeffs[0] = 1
    coeffs[spec.v - spec.u] = -float(spec.j)
    coeffs[spec.v] = z
    roots = np.roots(coeffs)
    return np.array(sorted(roots, key=lambda r: (round(r.real, 12), round(r.imag, 12))))


def trinomial_residual(rps: RootPowerSeries) -> PuiseuxSeries:
    """Residual of the defining trinomial for a k=1 series, valid below its truncation order."""
    if rps.k != 1:
        raise ValueError("residual needs the first power")
    spec = rps.spec
    j = Fraction(1) if rps.scaled else spec.j
    r = rps.series
    res = r**spec.v - (r**spec.u).scale(j) + PuiseuxSeries({1: 1})
    shift = r.valuation or 0
    # r^v and r^u are known below order + (power-1)*valuation
    known = r.order + (spec.u - 1) * shift
    return res.truncate(known)


def _numeric_branch_match(spec: TrinomialSpec, z: float) -> dict[tuple[str, int], complex]:
    """Match numeric roots to branch labels through their series values."""
    roots = list(trinomial_roots_numeric(spec, z))
    labels = {}
    for kind in ("small", "large"):
        for i in range(spec.branches(kind)):
            approx = root_series_numeric(spec, kind, i, 1, z)
            best = min(range(len(roots)), key=lambda t: abs(roots[t] - approx))
            labels[(kind, i)] = roots.pop(best)
    return labels


def check_reduction_identity(spec: TrinomialSpec, z: float = 0.1) -> dict:
    """Check ``(v-u) r^(v-1) - u z / r = prod_{s != r}(r - s)`` at every numeric root."""
    roots = trinomial_roots_numeric(spec, z)
    deviations = []
    for i, r in enumerate(roots):
        lhs = (spec.v - spec.u) * r ** (spec.v - 1) - spec.u * z / r
        rhs = np.prod([r - s for t, s in enumerate(roots) if t != i])
        deviations.append(abs(lhs - rhs))
    return {
        "spec": {"v": spec.v, "u": spec.u, "j": str(spec.j)},
        "z": z,
        "deviations": [float(d) for d in deviations],
        "max_deviation": float(max(deviations)),
    }


def check_root_derivative_identities(m: int, order: int = 20, z: float = 0.1) -> dict:
    """Compare ``-r^m / prod(r - r_j)`` with ``d/dz [r^(m+1)/(m+1)]`` for each cubic root.

    The product over the other roots equals the derivative of the cubic at
    ``r``, so the left side is built from the series of ``r`` and a series
    inversion, independently of the right side.  The small root is checked
    in z; the two large roots in the normalized variable, where their
    coefficients are rational.  The Vandermonde form is checked numerically.
    """
    if m + 1 == 0:
        raise ValueError("m = -1 makes the right side singular")
    spec = TrinomialSpec(3, 1, 2)
    results = {}
    first = None
    for kind, branch, scaled in (("small", 0, False), ("large", 0, True), ("large", 1, True)):
        j = Fraction(1) if scaled else spec.j
        extra = 2
        r = _materialize(spec, kind, 1, branch, order + extra + m, scaled).series
        deriv = (r * r).scale(3) - j  # cubic derivative at r
        rm = r**m if m >= 0 else None
        lhs = -(rm * series_invert(deriv, order + extra))
        rhs = _materialize(spec, kind, m + 1, branch, order + 2, scaled).series.scale(Fraction(1, m + 1)).derivative()
        bound = Fraction(order + 1)
        diff = lhs.first_difference(rhs, bound)
        label = f"{kind}{branch}"
        results[label] = diff is None
        if diff is not None and first is None:
            first = {"root": label, "exponent": str(diff[0]), "delta": str(diff[1])}
    a, b, c = cubic_roots_numeric(z)
    roots = [a, b, c]
    h = (a - b) * (a - c) * (b - c)
    vdm_dev = []
    for i, r in enumerate(roots):
        others = [roots[t] for t in range(3) if t != i]
        # order the roots with r first; h flips sign with the permutation parity
        perm_sign = 1 if i in (0, 2) else -1
        lhs = -(r**m) * (others[0] - others[1])
        rhs = perm_sign * h * (r**m) * (-1.0 / (3 * r * r - 2))
        vdm_dev.append(abs(lhs - rhs))
    return {
        "m": m,
        "order": order,
        "series_agree": results,
        "agree": all(results.values()),
        "first_mismatch": first,
        "vandermonde_max_deviation": max(vdm_dev),
    }


def check_one_back_tail_cancellation(half_m: int, order: int = 40) -> dict:
    """Termwise checks for the one-back cubic denominator with ``m = 2 * half_m``.

    The denominator ``z * sum_roots d/dz[r^(1-m)/(1-m)]`` splits into a
    small-root sum and a large-root sum.  Checked: (1) the large-root terms
    vanish for ``2u/3 < n < u``; (2) the small-root sum cancels the large-root
    terms with ``n >= u`` exactly; (3) what remains equals
    ``z^(-m) u[2, m]``; (4) the power-sum route gives ``z`` times that
    remainder, whose reciprocal is the left-absorption series.
    """
    uu = half_m
    m = 2 * uu
    two = Fraction(2)

    def first(n: int) -> Fraction:  # coefficient of z^(2n) in the small-root sum
        return -(two**-uu) / 2 / Fraction(8) ** n * binom_general(3 * n + uu, 2 * n)

    def second(n: int) -> Fraction:  # coefficient of z^(2n-2u) in the large-root sum
        return Fraction(4) ** uu / 2 / Fraction(8) ** n * binom_general(3 * n - 2 * uu, n)

    vanishing = all(second(n) == 0 for n in range(uu) if 3 * n > 2 * uu)
    cancel = all(first(n) + second(n + uu) == 0 for n in range(order))
    remainder = {2 * n - m: second(n) for n in range(uu) if second(n)}
    from .barrier_gf import u_poly  # local import: barrier_gf depends on this module

    upoly = u_poly(2, m).poly
    matches_u = remainder == {e - m: c for e, c in upoly.items()}

    spec = TrinomialSpec(3, 1, 2)
    k = 1 - m
    total = (small_power_sum(spec, k, order + 2) + large_power_sum(spec, k, order + 2)).scale(Fraction(1, k)).derivative().shift(1)
    expect = PuiseuxSeries(remainder).shift(1).truncate(total.order)
    return {
        "half_m": uu,
        "vanishing_window": vanishing,
        "tail_cancels": cancel,
        "remainder_is_u_poly": matches_u,
        "power_sum_route": total == expect,
        "ok": vanishing and cancel and matches_u and total == expect,
    }
