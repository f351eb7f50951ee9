"""Ground-truth first-passage probabilities from the explicit absorbing chain.

The walk lives on cells ``0 .. m+y-1``.  Cells ``0 .. b-1`` and
``m .. m+y-1`` absorb; from a transient cell the walker moves ``+y`` with
probability ``p`` and ``-b`` with probability ``1-p``.  Exact distributions are
propagated step by step, so every coefficient is an exact rational.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .exact_algebra import PuiseuxSeries

__all__ = [
    "InvalidSpec",
    "SingularSystem",
    "WalkSpec",
    "AbsorbingChain",
    "Marking",
    "build_chain",
    "first_passage_series",
    "total_absorption",
    "transient_mass_profile",
    "resolve_target",
]


class InvalidSpec(ValueError):
    """Walk parameters that do not describe a valid two-barrier chain."""


class SingularSystem(ArithmeticError):
    """The absorption linear system could not be solved."""


class Marking(enum.Enum):
    """What the formal variable z counts along a path."""

    BACK_STEPS = "back"
    TOTAL_STEPS = "total"
    PEOPLE_LEAVING = "people"

    @classmethod
    def parse(cls, name: "str | Marking") -> "Marking":
        if isinstance(name, Marking):
            return name
        aliases = {"backsteps": "back", "totalsteps": "total", "peopleleaving": "people"}
        key = aliases.get(name.lower().replace("_", "").replace("-", ""), name.lower())
        try:
            return cls(key)
        except ValueError:
            raise InvalidSpec(f"unknown marking {name!r}") from None

    def weights(self, b: int) -> tuple[int, int]:
        """Exponent increments for (forward step, backward step)."""
        if self is Marking.BACK_STEPS:
            return 0, 1
        if self is Marking.TOTAL_STEPS:
            return 1, 1
        return 0, b


@dataclass(frozen=True)
class WalkSpec:
    y: int
    b: int
    m: int
    s: int | None = None
    p: Fraction = field(default=Fraction(1, 2))

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", Fraction(self.p))
        if self.y < 1 or self.b < 1:
            raise InvalidSpec("step sizes y and b must be positive")
        if self.m <= self.b:
            raise InvalidSpec(f"need m > b, got m={self.m}, b={self.b}")
        if not 0 < self.p < 1:
            raise InvalidSpec("forward probability must lie strictly between 0 and 1")
        if self.s is not None and not self.b <= self.s <= self.m - 1:
            raise InvalidSpec(f"start {self.s} outside transient cells {self.b}..{self.m - 1}")

    def to_json(self) -> dict:
        out = {"y": self.y, "b": self.b, "m": self.m, "p": str(self.p)}
        if self.s is not None:
            out["s"] = self.s
        return out


@dataclass(frozen=True)
class AbsorbingChain:
    spec: WalkSpec

    @property
    def n_states(self) -> int:
        return self.spec.m + self.spec.y

    @property
    def left(self) -> frozenset[int]:
        return frozenset(range(self.spec.b))

    @property
    def right(self) -> frozenset[int]:
        return frozenset(range(self.spec.m, self.spec.m + self.spec.y))

    @property
    def absorbing(self) -> frozenset[int]:
        return self.left | self.right

    @property
    def transient(self) -> range:
        return range(self.spec.b, self.spec.m)

    def is_absorbing(self, state: int) -> bool:
        return state < self.spec.b or state >= self.spec.m

    def transitions(self, state: int) -> tuple[tuple[int, Fraction], ...]:
        """Sparse row: ``((target, probability), ...)``."""
        if self.is_absorbing(state):
            return ((state, Fraction(1)),)
        sp = self.spec
        return ((state + sp.y, sp.p), (state - sp.b, 1 - sp.p))

    def matrix(self) -> list[list[Fraction]]:
        n = self.n_states
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j, pr in self.transitions(i):
                rows[i][j] += pr
        return rows


def build_chain(spec: WalkSpec) -> AbsorbingChain:
    if not isinstance(spec, WalkSpec):
        raise InvalidSpec("expected a WalkSpec")
    return AbsorbingChain(spec)


def resolve_target(chain: AbsorbingChain, target: "str | Iterable[int]") -> frozenset[int]:
    """Turn ``'left'``, ``'right'``, ``'all'`` or an iterable of cells into a cell set."""
    if isinstance(target, str):
        named = {"left": chain.left, "right": chain.right, "all": chain.absorbing}
        if target not in named:
            raise InvalidSpec(f"unknown target {target!r}")
        return named[target]
    cells = frozenset(int(c) for c in target)
    bad = cells - chain.absorbing
    if bad:
        raise InvalidSpec(f"target cells {sorted(bad)} are not absorbing")
    return cells


def _check_start(chain: AbsorbingChain, start: int) -> None:
    if not 0 <= start < chain.n_states:
        raise InvalidSpec(f"start {start} outside 0..{chain.n_states - 1}")


def first_passage_series(
    chain: AbsorbingChain,
    start: int,
    target: "str | Iterable[int]",
    horizon: int,
    marking: "Marking | str" = Marking.BACK_STEPS,
) -> PuiseuxSeries:
    """Exact first-passage series into ``target``, known for exponents below ``horizon``.

    Probability mass is tracked per (cell, accumulated weight); mass whose
    weight reaches the horizon is dropped, which is safe because weights never
    decrease.  Under back-step marking forward runs are finite (they hit the
    right block), so the propagation terminates.
    """
    if horizon < 1:
        raise InvalidSpec("horizon must be at least 1")
    marking = Marking.parse(marking)
    _check_start(chain, start)
    targets = resolve_target(chain, target)
    if chain.is_absorbing(start):
        return PuiseuxSeries({0: 1} if start in targets else {}, horizon)

    sp = chain.spec
    fw, bw = marking.weights(sp.b)
    if fw == 0 and sp.y == 0:  # pragma: no cover - excluded by WalkSpec
        raise InvalidSpec("forward step must move")
    moves = ((sp.y, sp.p, fw), (-sp.b, 1 - sp.p, bw))
    out: dict[int, Fraction] = defaultdict(Fraction)
    current: dict[tuple[int, int], Fraction] = {(start, 0): Fraction(1)}
    while current:
        nxt: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for (cell, weight), mass in current.items():
            for step, pr, dw in moves:
                w = weight + dw
                if w >= horizon:
                    continue
                c = cell + step
                if chain.is_absorbing(c):
                    if c in targets:
                        out[w] += mass * pr
                else:
                    nxt[(c, w)] += mass * pr
        current = nxt
    return PuiseuxSeries(dict(out), horizon)


def transient_mass_profile(chain: AbsorbingChain, start: int, steps: int) -> list[Fraction]:
    """Probability of still being transient after 0, 1, ..., steps steps."""
    _check_start(chain, start)
    dist = {start: Fraction(1)}
    profile = []
    for _ in range(steps + 1):
        profile.append(sum((v for c, v in dist.items() if not chain.is_absorbing(c)), Fraction(0)))
        nxt: dict[int, Fraction] = defaultdict(Fraction)
        for c, v in dist.items():
            if chain.is_absorbing(c):
                continue
            for t, pr in chain.transitions(c):
                nxt[t] += v * pr
        dist = nxt
    return profile


def total_absorption(
    chain: AbsorbingChain,
    start: int,
    target: "str | Iterable[int]",
    max_steps: int | None = None,
) -> Fraction:
    """Probability of (eventual, or within ``max_steps`` steps) absorption in ``target``."""
    _check_start(chain, start)
    targets = resolve_target(chain, target)
    if max_steps is not None:
        series = first_passage_series(chain, start, targets, max_steps + 1, Marking.TOTAL_STEPS)
        return sum((v for _, v in series.items()), Fraction(0))
    if chain.is_absorbing(start):
        return Fraction(int(start in targets))
    return _solve_hitting(chain, targets)[start]


def _solve_hitting(chain: AbsorbingChain, targets: frozenset[int]) -> dict[int, Fraction]:
    """Solve h = P h on transient cells with h = 1_target on absorbing cells."""
    cells = list(chain.transient)
    index = {c: i for i, c in enumerate(cells)}
    n = len(cells)
    rows = []
    for c in cells:
        row = [Fraction(0)] * (n + 1)
        row[index[c]] += 1
        for t, pr in chain.transitions(c):
            if t in index:
                row[index[t]] -= pr
            elif t in targets:
                row[n] += pr
        rows.append(row)
    # Gauss-Jordan elimination over the rationals
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col]), None)
        if piv is None:
            raise SingularSystem(f"no pivot in column {col}")
        rows[col], rows[piv] = rows[piv], rows[col]
        pv = rows[col][col]
        rows[col] = [v / pv for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return {c: rows[index[c]][n] for c in cells}
