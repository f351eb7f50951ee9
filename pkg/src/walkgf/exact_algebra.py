"""Exact rational arithmetic, polynomials, truncated Puiseux series and rational GFs.

Every coefficient in the package is a :class:`fractions.Fraction`; nothing here
ever rounds.  Series carry an explicit truncation order so that unknown
coefficients are never mistaken for zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Union

ExactRational = Fraction
Number = Union[int, Fraction]
Order = Union[Fraction, float]

INF = math.inf

__all__ = [
    "ExactRational",
    "INF",
    "ZeroLeadingTerm",
    "IrrationalCoefficients",
    "Polynomial",
    "PuiseuxSeries",
    "RationalGF",
    "binom_general",
    "series_arith",
    "series_invert",
    "gf_expand",
    "format_rational",
    "parse_rational",
    "exact_root",
]


class ZeroLeadingTerm(ArithmeticError):
    """Raised when a series without a unit constant term is inverted."""


class IrrationalCoefficients(ArithmeticError):
    """Raised when a requested quantity leaves the rational field."""


def format_rational(q: Number) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def binom_general(top: Number, k: int) -> Fraction:
    """Generalized binomial coefficient ``top (top-1) ... (top-k+1) / k!``."""
    if k < 0:
        return Fraction(0)
    top = Fraction(top)
    acc = Fraction(1)
    for i in range(k):
        acc *= top - i
    return acc / math.factorial(k)


def _iroot(n: int, q: int) -> int | None:
    """Exact integer q-th root of n >= 0, or None."""
    if n < 2:
        return n if n >= 0 else None
    x = 1 << -(-n.bit_length() // q)
    while True:
        nxt = ((q - 1) * x + n // x ** (q - 1)) // q
        if nxt >= x:
            break
        x = nxt
    return x if x**q == n else None


def exact_root(base: Number, exponent: Number) -> Fraction:
    """Return ``base ** exponent`` for a rational exponent, if it is rational.

    Raises :class:`IrrationalCoefficients` otherwise.
    """
    base, exponent = Fraction(base), Fraction(exponent)
    if exponent.denominator == 1:
        return base ** int(exponent)
    q = exponent.denominator
    if base < 0:
        raise IrrationalCoefficients(f"{base}^{exponent} is not real")
    num, den = _iroot(base.numerator, q), _iroot(base.denominator, q)
    if num is None or den is None:
        raise IrrationalCoefficients(f"{base}^{exponent} is irrational")
    return Fraction(num, den) ** exponent.numerator


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class Polynomial:
    """Immutable polynomial in z with rational coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, Number] | Iterable[Number] | None = None):
        if coeffs is None:
            items: Iterable[tuple[int, Number]] = ()
        elif isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            items = enumerate(coeffs)
        c: dict[int, Fraction] = {}
        for e, v in items:
            e = int(e)
            if e < 0:
                raise ValueError("polynomial exponents must be nonnegative")
            v = Fraction(v)
            if v:
                c[e] = c.get(e, Fraction(0)) + v
        self._c = {e: v for e, v in sorted(c.items()) if v}

    # -- construction helpers
    @classmethod
    def monomial(cls, e: int, c: Number = 1) -> "Polynomial":
        return cls({e: c})

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "Polynomial":
        return cls({int(k): parse_rational(v) for k, v in data.items()})

    # -- inspection
    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._c)

    def __getitem__(self, e: int) -> Fraction:
        return self._c.get(e, Fraction(0))

    def items(self) -> Iterator[tuple[int, Fraction]]:
        return iter(self._c.items())

    @property
    def degree(self) -> int:
        return max(self._c) if self._c else -1

    @property
    def valuation(self) -> int | None:
        return min(self._c) if self._c else None

    def is_zero(self) -> bool:
        return not self._c

    def lowest_coefficient(self) -> Fraction:
        return self._c[min(self._c)] if self._c else Fraction(0)

    def leading_coefficient(self) -> Fraction:
        return self._c[max(self._c)] if self._c else Fraction(0)

    def __call__(self, z):
        return sum(c * z**e for e, c in self._c.items()) if self._c else 0 * z

    # -- arithmetic
    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial({0: other})
        return isinstance(other, Polynomial) and self._c == other._c

    def __hash__(self) -> int:
        return hash(tuple(self._c.items()))

    def __add__(self, other: "Polynomial | Number") -> "Polynomial":
        other = _as_poly(other)
        out = dict(self._c)
        for e, v in other._c.items():
            out[e] = out.get(e, Fraction(0)) + v
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({e: -v for e, v in self._c.items()})

    def __sub__(self, other: "Polynomial | Number") -> "Polynomial":
        return self + (-_as_poly(other))

    def __rsub__(self, other: Number) -> "Polynomial":
        return _as_poly(other) - self

    def __mul__(self, other: "Polynomial | Number") -> "Polynomial":
        other = _as_poly(other)
        out: dict[int, Fraction] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                out[e1 + e2] = out.get(e1 + e2, Fraction(0)) + v1 * v2
        return Polynomial(out)

    __rmul__ = __mul__

    def scale(self, c: Number) -> "Polynomial":
        return Polynomial({e: v * c for e, v in self._c.items()})

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = dict(self._c)
        dd, lc = other.degree, other.leading_coefficient()
        quo: dict[int, Fraction] = {}
        while rem and max(rem) >= dd:
            top = max(rem)
            f = rem[top] / lc
            quo[top - dd] = f
            for e, v in other._c.items():
                k = e + top - dd
                nv = rem.get(k, Fraction(0)) - f * v
                if nv:
                    rem[k] = nv
                else:
                    rem.pop(k, None)
        return Polynomial(quo), Polynomial(rem)

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[0]

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[1]

    def monic(self) -> "Polynomial":
        return self.scale(1 / self.leading_coefficient()) if self._c else self

    def gcd(self, other: "Polynomial") -> "Polynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def derivative(self) -> "Polynomial":
        return Polynomial({e - 1: e * v for e, v in self._c.items() if e})

    def substitute_power(self, k: int) -> "Polynomial":
        """Return p(z**k)."""
        return Polynomial({e * k: v for e, v in self._c.items()})

    def substitute_scale(self, c: Number) -> "Polynomial":
        """Return p(c*z)."""
        c = Fraction(c)
        return Polynomial({e: v * c**e for e, v in self._c.items()})

    def normalized(self) -> "Polynomial":
        """Scale so the lowest-order coefficient equals 1."""
        return self.scale(1 / self.lowest_coefficient()) if self._c else self

    def is_proportional(self, other: "Polynomial") -> bool:
        return self.normalized() == other.normalized()

    def to_json(self) -> dict[str, str]:
        return {str(e): format_rational(v) for e, v in self._c.items()}

    def __repr__(self) -> str:
        if not self._c:
            return "Polynomial(0)"
        terms = " + ".join(f"({format_rational(v)})z^{e}" for e, v in self._c.items())
        return f"Polynomial({terms})"


def _as_poly(x: "Polynomial | Number") -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial({0: x})


# ---------------------------------------------------------------------------
# Truncated Puiseux series
# ---------------------------------------------------------------------------


def _as_order(t: Order | int) -> Order:
    return t if isinstance(t, float) else Fraction(t)


class PuiseuxSeries:
    """Truncated series ``sum c_k z^(k/grid)`` known for exponents below ``order``.

    ``order`` is a Fraction, or ``INF`` when the series is an exact finite sum.
    """

    __slots__ = ("grid", "_c", "order")

    def __init__(self, coeffs: Mapping[Number, Number] | None = None, order: Order | int = INF, grid: int | None = None):
        order = _as_order(order)
        terms: dict[Fraction, Fraction] = {}
        for e, v in (coeffs or {}).items():
            e, v = Fraction(e), Fraction(v)
            if v and e < order:
                terms[e] = terms.get(e, Fraction(0)) + v
        terms = {e: v for e, v in terms.items() if v}
        g = 1
        for e in terms:
            g = math.lcm(g, e.denominator)
        if grid is not None:
            if grid % g:
                raise ValueError(f"grid {grid} cannot hold exponents with denominator {g}")
            g = grid
        self.grid = g
        self._c = {int(e * g): terms[e] for e in sorted(terms)}
        self.order = order

    # -- construction
    @classmethod
    def from_polynomial(cls, p: Polynomial, order: Order | int = INF) -> "PuiseuxSeries":
        return cls(dict(p.items()), order)

    @classmethod
    def from_function(cls, fn: Callable[[int], Number], exponent: Callable[[int], Number], order: Order | int, stop: int | None = None) -> "PuiseuxSeries":
        """Collect ``fn(n) z^exponent(n)`` for n = 0, 1, ... while exponents stay below order.

        ``exponent`` must be nondecreasing in n unless ``stop`` bounds the loop.
        """
        order = _as_order(order)
        terms: dict[Fraction, Fraction] = {}
        n = 0
        while stop is None or n < stop:
            e = Fraction(exponent(n))
            if e >= order:
                if stop is None:
                    break
            else:
                c = Fraction(fn(n))
                if c:
                    terms[e] = terms.get(e, Fraction(0)) + c
            n += 1
        return cls(terms, order)

    @classmethod
    def one(cls) -> "PuiseuxSeries":
        return cls({0: 1})

    @classmethod
    def zero(cls, order: Order | int = INF) -> "PuiseuxSeries":
        return cls({}, order)

    # -- inspection
    def items(self) -> Iterator[tuple[Fraction, Fraction]]:
        for k, v in self._c.items():
            yield Fraction(k, self.grid), v

    @property
    def coeffs(self) -> dict[Fraction, Fraction]:
        return dict(self.items())

    def coefficient(self, e: Number) -> Fraction:
        e = Fraction(e)
        if e >= self.order:
            raise ValueError(f"coefficient of z^{e} is beyond the truncation order {self.order}")
        k = e * self.grid
        return self._c.get(int(k), Fraction(0)) if k.denominator == 1 else Fraction(0)

    def __getitem__(self, e: Number) -> Fraction:
        return self.coefficient(e)

    @property
    def valuation(self) -> Fraction | None:
        return Fraction(min(self._c), self.grid) if self._c else None

    def is_exact(self) -> bool:
        return self.order == INF

    def is_zero(self) -> bool:
        """True when every known coefficient vanishes."""
        return not self._c

    def reduced_grid(self) -> int:
        g = self.grid
        for k in self._c:
            g = math.gcd(g, k)
        return self.grid // g if g else 1

    def evaluate(self, z: float) -> float:
        return sum(float(v) * z ** float(e) for e, v in self.items())

    def to_polynomial(self) -> Polynomial:
        out = {}
        for e, v in self.items():
            if e.denominator != 1 or e < 0:
                raise ValueError(f"exponent {e} is not a nonnegative integer")
            out[int(e)] = v
        return Polynomial(out)

    def to_json(self) -> dict:
        return {
            "order": None if self.order == INF else format_rational(self.order),
            "coefficients": [[format_rational(e), format_rational(v)] for e, v in self.items()],
        }

    def __repr__(self) -> str:
        body = " + ".join(f"({format_rational(v)})z^{format_rational(e)}" for e, v in self.items()) or "0"
        tail = "" if self.order == INF else f" + O(z^{format_rational(self.order)})"
        return f"PuiseuxSeries({body}{tail})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = PuiseuxSeries({0: other})
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    __hash__ = None  # type: ignore[assignment]

    def agrees_with(self, other: "PuiseuxSeries", below: Order | int | None = None) -> bool:
        """Coefficientwise equality below ``below`` (default: the common known range)."""
        bound = min(self.order, other.order) if below is None else _as_order(below)
        if bound > self.order or bound > other.order:
            raise ValueError("comparison bound exceeds a truncation order")
        return self.truncate(bound).coeffs == other.truncate(bound).coeffs

    def first_difference(self, other: "PuiseuxSeries", below: Order | int | None = None) -> tuple[Fraction, Fraction] | None:
        """Lowest exponent where the two series differ, with ``self - other`` there."""
        bound = min(self.order, other.order) if below is None else _as_order(below)
        if bound > self.order or bound > other.order:
            raise ValueError("comparison bound exceeds a truncation order")
        a, b = self.truncate(bound).coeffs, other.truncate(bound).coeffs
        for e in sorted(set(a) | set(b)):
            d = a.get(e, Fraction(0)) - b.get(e, Fraction(0))
            if d:
                return e, d
        return None

    # -- transformations
    def truncate(self, order: Order | int) -> "PuiseuxSeries":
        order = _as_order(order)
        return PuiseuxSeries(self.coeffs, min(order, self.order))

    def shift(self, e: Number) -> "PuiseuxSeries":
        """Multiply by z**e."""
        e = Fraction(e)
        return PuiseuxSeries({k + e: v for k, v in self.items()}, self.order + e)

    def substitute_power(self, s: Number) -> "PuiseuxSeries":
        """Return f(z**s) for a positive rational s."""
        s = Fraction(s)
        if s <= 0:
            raise ValueError("substitution power must be positive")
        return PuiseuxSeries({k * s: v for k, v in self.items()}, self.order * s)

    def substitute_scale(self, c: Number) -> "PuiseuxSeries":
        """Return f(c*z); needs rational c**e for every stored exponent e."""
        return PuiseuxSeries({e: v * exact_root(c, e) for e, v in self.items()}, self.order)

    def scale(self, c: Number) -> "PuiseuxSeries":
        c = Fraction(c)
        if not c:
            return PuiseuxSeries({}, INF) if self.order == INF else PuiseuxSeries({}, self.order)
        return PuiseuxSeries({e: v * c for e, v in self.items()}, self.order)

    def derivative(self) -> "PuiseuxSeries":
        return PuiseuxSeries({e - 1: e * v for e, v in self.items() if e}, self.order - 1)

    def map_coefficients(self, fn: Callable[[Fraction, Fraction], Number]) -> "PuiseuxSeries":
        return PuiseuxSeries({e: fn(e, v) for e, v in self.items()}, self.order)

    # -- arithmetic
    def __add__(self, other: "PuiseuxSeries | Number") -> "PuiseuxSeries":
        return series_arith(self, _as_series(other), "add")

    __radd__ = __add__

    def __sub__(self, other: "PuiseuxSeries | Number") -> "PuiseuxSeries":
        return series_arith(self, _as_series(other), "sub")

    def __rsub__(self, other: Number) -> "PuiseuxSeries":
        return series_arith(_as_series(other), self, "sub")

    def __neg__(self) -> "PuiseuxSeries":
        return PuiseuxSeries({e: -v for e, v in self.items()}, self.order)

    def __mul__(self, other: "PuiseuxSeries | Number") -> "PuiseuxSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return series_arith(self, other, "mul")

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "PuiseuxSeries":
        if n < 0:
            raise ValueError("use series_invert for negative powers")
        result = PuiseuxSeries.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


def _as_series(x: "PuiseuxSeries | Number") -> PuiseuxSeries:
    return x if isinstance(x, PuiseuxSeries) else PuiseuxSeries({0: x})


def series_arith(a: PuiseuxSeries, b: PuiseuxSeries, op: str) -> PuiseuxSeries:
    """Add, subtract or multiply two truncated series.

    Sums are known below ``min(Ta, Tb)``.  A product is known below
    ``min(Ta + val(b), Tb + val(a))``, which reduces to ``min(Ta, Tb)`` for
    series with nonzero constant terms.
    """
    if op in ("add", "sub"):
        sign = 1 if op == "add" else -1
        out = a.coeffs
        for e, v in b.items():
            out[e] = out.get(e, Fraction(0)) + sign * v
        return PuiseuxSeries(out, min(a.order, b.order))
    if op != "mul":
        raise ValueError(f"unknown series operation {op!r}")
    va, vb = a.valuation, b.valuation
    if (va is None and a.order == INF) or (vb is None and b.order == INF):
        return PuiseuxSeries({}, INF)
    ta = a.order + (vb if vb is not None else b.order)
    tb = b.order + (va if va is not None else a.order)
    order = min(ta, tb)
    g = math.lcm(a.grid, b.grid)
    fa, fb = g // a.grid, g // b.grid
    bound = None if order == INF else order * g
    out: dict[int, Fraction] = {}
    bitems = sorted((k * fb, v) for k, v in b._c.items())
    for ka, va_ in a._c.items():
        ka *= fa
        for kb, vb_ in bitems:
            k = ka + kb
            if bound is not None and k >= bound:
                break
            out[k] = out.get(k, Fraction(0)) + va_ * vb_
    return PuiseuxSeries({Fraction(k, g): v for k, v in out.items()}, order)


def series_invert(a: PuiseuxSeries, order: Order | int) -> PuiseuxSeries:
    """Multiplicative inverse of a series with a nonzero constant term, modulo z^order."""
    order = _as_order(order)
    if a.valuation != 0:
        raise ZeroLeadingTerm("series has no nonzero constant term")
    order = min(order, a.order)
    g = a.grid
    c0 = a._c[0]
    terms = sorted((k, v) for k, v in a._c.items() if k)
    top = math.ceil(order * g) if order != INF else None
    if top is None:
        raise ValueError("an explicit finite order is required for inversion")
    inv = [Fraction(0)] * top
    inv[0] = 1 / c0
    for n in range(1, top):
        s = Fraction(0)
        for k, v in terms:
            if k > n:
                break
            s += v * inv[n - k]
        inv[n] = -s / c0
    return PuiseuxSeries({Fraction(k, g): v for k, v in enumerate(inv) if v}, order)


# ---------------------------------------------------------------------------
# Rational generating functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalGF:
    """``numerator / denominator`` with an exponent normalization.

    The oracle series equals ``z**shift * F(z**scale)`` where ``F`` is the
    rational function.
    """

    numerator: Polynomial
    denominator: Polynomial
    shift: int = 0
    scale: int = 1

    def __post_init__(self) -> None:
        if self.denominator.is_zero():
            raise ZeroDivisionError("zero denominator")
        if self.scale < 1:
            raise ValueError("scale must be a positive integer")

    def reduced(self) -> "RationalGF":
        """Cancel the polynomial gcd and normalize the denominator's constant term to 1."""
        g = self.numerator.gcd(self.denominator)
        num, den = self.numerator // g, self.denominator // g
        c = den.lowest_coefficient()
        return RationalGF(num.scale(1 / c), den.scale(1 / c), self.shift, self.scale)

    def same_function(self, other: "RationalGF") -> bool:
        """Equality as rational functions with identical normalization."""
        return (
            self.shift == other.shift
            and self.scale == other.scale
            and self.numerator * other.denominator == other.numerator * self.denominator
        )

    def jointly_proportional(self, num: Polynomial, den: Polynomial) -> bool:
        """True when (num, den) = c * (numerator, denominator) for one nonzero c."""
        if den.is_zero() or num.is_zero() != self.numerator.is_zero():
            return False
        c = den.lowest_coefficient() / self.denominator.lowest_coefficient()
        return self.denominator.scale(c) == den and self.numerator.scale(c) == num

    def expand(self, order: Order | int, normalized: bool = True) -> PuiseuxSeries:
        return gf_expand(self, order, normalized)

    def to_json(self) -> dict:
        return {
            "numerator": self.numerator.to_json(),
            "denominator": self.denominator.to_json(),
            "normalization": {"shift": self.shift, "scale": self.scale},
        }


def gf_expand(f: RationalGF, order: Order | int, normalized: bool = True) -> PuiseuxSeries:
    """Power-series expansion of a RationalGF, exact below z^order.

    With ``normalized`` the stored (shift, scale) is applied so the result is
    directly comparable with oracle series; otherwise the raw quotient is
    expanded.
    """
    order = _as_order(order)
    den = f.denominator
    v = den.valuation
    # pull out any monomial factor of the denominator
    den_s = PuiseuxSeries.from_polynomial(den).shift(-v)
    num_s = PuiseuxSeries.from_polynomial(f.numerator).shift(-v)
    if normalized:
        raw_order = (order - f.shift) / f.scale
    else:
        raw_order = order
    nv = num_s.valuation if num_s.valuation is not None else Fraction(0)
    inv = series_invert(den_s, max(raw_order - min(nv, 0), Fraction(1)))
    raw = (num_s * inv).truncate(raw_order)
    if not normalized:
        return raw
    return raw.substitute_power(f.scale).shift(f.shift).truncate(order)
