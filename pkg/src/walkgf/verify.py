"""Oracle verification of every closed form, cell by cell.

A *cell* names a formula and its parameters.  Running it builds the
formula's series, builds the exact chain series for the same event, and
reports the first exponent where they differ.  Grids of cells ship as JSON
under ``walkgf/grids``.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from . import barrier_gf, general_gf
from .chain_oracle import InvalidSpec, Marking, WalkSpec, build_chain, first_passage_series, resolve_target
from .exact_algebra import PuiseuxSeries, RationalGF, format_rational

__all__ = [
    "Cell",
    "VerifyReport",
    "FORMULAS",
    "run_cell",
    "run_cells",
    "load_grid",
    "expand_cells",
    "packaged_grids",
]


@dataclass(frozen=True)
class Cell:
    """One verification task.  ``order`` is inclusive: exponents ``0..order`` are compared."""

    formula: str
    y: int
    b: int
    m: int
    order: int = 30
    s: int | None = None
    extra: tuple[tuple[str, Any], ...] = ()

    def option(self, key: str, default: Any = None) -> Any:
        return dict(self.extra).get(key, default)

    def to_json(self) -> dict:
        out = {"formula": self.formula, "y": self.y, "b": self.b, "m": self.m, "order": self.order}
        if self.s is not None:
            out["s"] = self.s
        out.update(dict(self.extra))
        return out


@dataclass
class VerifyReport:
    cell: Cell
    passed: bool
    checked_through: int | None = None
    first_mismatch: Fraction | None = None
    delta: Fraction | None = None
    normalization: tuple[int, int] = (0, 1)
    wall_time: float = 0.0
    status: str = "ok"
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "cell": self.cell.to_json(),
            "pass": self.passed,
            "status": self.status,
            "checked_through": self.checked_through,
            "first_mismatch": None if self.first_mismatch is None else format_rational(self.first_mismatch),
            "delta": None if self.delta is None else format_rational(self.delta),
            "normalization": {"shift": self.normalization[0], "scale": self.normalization[1]},
            "wall_time": round(self.wall_time, 4),
            "detail": self.detail,
        }


# ---------------------------------------------------------------------------
# formula adapters: each returns (series under back-step marking, start, target, marking, normalization)
# ---------------------------------------------------------------------------


def _from_gf(gf: RationalGF, horizon: int) -> tuple[PuiseuxSeries, tuple[int, int]]:
    return gf.expand(horizon), (gf.shift, gf.scale)


def _one_back(side: str) -> Callable[[Cell, int], dict]:
    def build(cell: Cell, horizon: int) -> dict:
        if cell.b != 1:
            raise barrier_gf.PreconditionError("one-back formulas need b = 1")
        fn = barrier_gf.p_left_one_back if side == "left" else barrier_gf.p_right_one_back
        series, norm = _from_gf(fn(cell.y, cell.m), horizon)
        return {"series": series, "start": cell.m - 1, "target": side, "normalization": norm}

    return build


def _two_back(cell: Cell, horizon: int) -> dict:
    if cell.b != 2:
        raise general_gf.PreconditionError("two-back formula needs b = 2")
    series, norm = _from_gf(general_gf.gf_two_back(cell.y, cell.m), horizon)
    return {"series": series, "start": cell.m - 1, "target": [1], "normalization": norm}


def _exact_3f2b(cell: Cell, horizon: int) -> dict:
    if (cell.y, cell.b) != (3, 2) or cell.m % 6:
        raise general_gf.PreconditionError("exact-3f2b needs y = 3, b = 2 and m divisible by 6")
    series, norm = _from_gf(general_gf.gf_exact_3f2b(cell.m // 6), horizon)
    return {"series": series, "start": cell.m - 1, "target": [1], "normalization": norm}


def _schur(cell: Cell, horizon: int) -> dict:
    s = cell.m - 1 if cell.s is None else cell.s
    target = cell.option("target", cell.b - 1)
    if isinstance(target, int):
        cells = [target]
    elif isinstance(target, str):
        cells = sorted(resolve_target(build_chain(WalkSpec(cell.y, cell.b, cell.m)), target))
    else:
        cells = list(target)
    gf = general_gf.vandermonde_gf(cell.y, cell.b, cell.m, s, cells)
    series, norm = _from_gf(gf, horizon)
    return {"series": series, "start": s, "target": cells, "normalization": norm}


def _duchon(cell: Cell, horizon: int) -> dict:
    if cell.b != 2:
        raise barrier_gf.PreconditionError("the two-left-cell series needs b = 2")
    marking = Marking.parse(cell.option("marking", "back"))
    s = 2 if cell.s is None else cell.s
    _require_far_barrier(cell, horizon, marking)
    series = barrier_gf.duchon_two_left(cell.y + 2, s, horizon, marking)
    return {"series": series, "start": s, "target": "left", "normalization": (0, 1), "marking": marking}


def _duchon_inner(cell: Cell, horizon: int) -> dict:
    if (cell.y, cell.b) != (3, 2):
        raise barrier_gf.PreconditionError("the inner-cell series is for y = 3, b = 2")
    _require_far_barrier(cell, horizon, Marking.PEOPLE_LEAVING)
    series = barrier_gf.duchon_inner_series(horizon)
    return {"series": series, "start": 2, "target": [1], "normalization": (0, 1), "marking": Marking.PEOPLE_LEAVING}


def _single_barrier(cell: Cell, horizon: int) -> dict:
    if (cell.y, cell.b) != (2, 1):
        raise barrier_gf.PreconditionError("the single-barrier series is for y = 2, b = 1")
    k = cell.option("k", 1 if cell.s is None else cell.s)
    _require_far_barrier(cell, horizon, Marking.BACK_STEPS)
    shift, scale = barrier_gf.single_barrier_normalization(k)
    raw = barrier_gf.fuss_single_barrier(k, Fraction(horizon - shift, scale))
    series = raw.substitute_power(scale).shift(shift).truncate(horizon)
    return {"series": series, "start": k, "target": "left", "normalization": (shift, scale)}


def _require_far_barrier(cell: Cell, horizon: int, marking: Marking) -> None:
    """The right barrier must be out of reach within the compared exponents."""
    _, bw = marking.weights(cell.b)
    # from the right block down to cell b-1 or below takes at least ceil((m-b+1)/b) back steps
    reach = -(-(cell.m - cell.b + 1) // cell.b) * bw
    if reach < horizon:
        raise barrier_gf.PreconditionError(
            f"right barrier at m={cell.m} is reachable before exponent {horizon}; increase m"
        )


FORMULAS: dict[str, Callable[[Cell, int], dict]] = {
    "one-back-left": _one_back("left"),
    "one-back-right": _one_back("right"),
    "two-back": _two_back,
    "exact-3f2b": _exact_3f2b,
    "schur": _schur,
    "duchon": _duchon,
    "duchon-inner": _duchon_inner,
    "single-barrier": _single_barrier,
}

SPECIAL = ("approx-horizon", "string-denominator")


def _run_approx(cell: Cell) -> VerifyReport:
    s = cell.m - 1 if cell.s is None else cell.s
    res = barrier_gf.approx_horizon_series(cell.m, s)
    ok = res.mismatch_exponent is None or res.mismatch_exponent >= res.horizon
    detail = {
        "horizon": res.horizon,
        "partial_sum": format_rational(res.partial_sum),
        "trial": res.trial,
        "exact_at_trial": None if res.exact_at_trial is None else format_rational(res.exact_at_trial),
    }
    return VerifyReport(
        cell,
        ok,
        checked_through=res.horizon - 1,
        first_mismatch=None if res.mismatch_exponent is None else Fraction(res.mismatch_exponent),
        delta=res.delta,
        detail=detail,
    )


def _run_string_denominator(cell: Cell) -> VerifyReport:
    decomposition = general_gf.mu_decomposition(cell.y, cell.b, cell.m)
    schur = general_gf.vandermonde_gf(cell.y, cell.b, cell.m)
    ok = decomposition.denominator.is_proportional(schur.denominator)
    detail = {"needed_mu": decomposition.needed_count, "degree_bound": decomposition.degree_bound}
    return VerifyReport(cell, ok, detail=detail)


def run_cell(cell: Cell) -> VerifyReport:
    """Verify one cell; preconditions and invalid specs become failing reports, not exceptions."""
    start = time.perf_counter()
    try:
        WalkSpec(cell.y, cell.b, cell.m)
        if cell.formula == "approx-horizon":
            report = _run_approx(cell)
        elif cell.formula == "string-denominator":
            report = _run_string_denominator(cell)
        elif cell.formula in FORMULAS:
            report = _run_series(cell)
        else:
            raise KeyError(cell.formula)
    except KeyError:
        report = VerifyReport(cell, False, status="unknown-formula")
    except InvalidSpec as exc:
        report = VerifyReport(cell, False, status="invalid-spec", detail={"message": str(exc)})
    except (barrier_gf.PreconditionError, general_gf.PreconditionError, ArithmeticError) as exc:
        report = VerifyReport(cell, False, status="precondition", detail={"message": str(exc)})
    report.wall_time = time.perf_counter() - start
    return report


def _run_series(cell: Cell) -> VerifyReport:
    horizon = cell.order + 1
    built = FORMULAS[cell.formula](cell, horizon)
    marking = built.get("marking", Marking.BACK_STEPS)
    chain = build_chain(WalkSpec(cell.y, cell.b, cell.m))
    oracle = first_passage_series(chain, built["start"], built["target"], horizon, marking)
    diff = built["series"].first_difference(oracle, horizon)
    if diff is None:
        return VerifyReport(cell, True, checked_through=cell.order, normalization=built["normalization"])
    return VerifyReport(
        cell,
        False,
        checked_through=cell.order,
        first_mismatch=diff[0],
        delta=diff[1],
        normalization=built["normalization"],
    )


def run_cells(cells: Iterable[Cell], jobs: int = 1) -> list[VerifyReport]:
    """Run cells, concurrently when ``jobs > 1``; results keep the input order."""
    cells = list(cells)
    if jobs <= 1 or len(cells) <= 1:
        return [run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_cell, cells))


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


def _values(spec: Any) -> list[int]:
    """An int, a list of ints, ``"a..b"`` or ``{"from": a, "to": b}`` (inclusive)."""
    if isinstance(spec, bool):
        raise InvalidSpec("booleans are not parameter values")
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, list):
        return [int(v) for v in spec]
    if isinstance(spec, str):
        if "," in spec:
            return [v for part in spec.split(",") for v in _values(part.strip())]
        if ".." in spec:
            lo, hi = spec.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(spec)]
    if isinstance(spec, Mapping):
        return list(range(int(spec["from"]), int(spec["to"]) + 1))
    raise InvalidSpec(f"cannot read parameter values from {spec!r}")


RANGED = ("s", "k")


def expand_cells(entries: Iterable[Mapping[str, Any]], default_order: int = 30) -> list[Cell]:
    """Expand grid entries into concrete cells.

    ``y``, ``b``, ``m``, ``s`` and ``k`` accept ranges; the product is taken
    row-major in that order.  Other keys are passed through as options.
    """
    cells = []
    for entry in entries:
        entry = dict(entry)
        formula = entry.pop("formula")
        order = int(entry.pop("order", default_order))
        axes = [_values(entry.pop(key)) for key in ("y", "b", "m")]
        ranged = {key: _values(entry.pop(key)) for key in RANGED if key in entry}
        fixed = {k: tuple(v) if isinstance(v, list) else v for k, v in entry.items()}
        for y, b, m in product(*axes):
            for combo in product(*ranged.values()):
                opts = dict(zip(ranged, combo))
                s = opts.pop("s", None)
                extra = tuple(sorted({**fixed, **opts}.items()))
                cells.append(Cell(formula, y, b, m, order, s, extra))
    return cells


def packaged_grids() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("walkgf").joinpath("grids").iterdir() if p.name.endswith(".json"))


def load_grid(name_or_path: str | os.PathLike, order: int | None = None) -> list[Cell]:
    """Load a grid from a path or by packaged name; ``order`` overrides the grid default."""
    path = Path(name_or_path)
    if path.exists():
        data = json.loads(path.read_text())
    else:
        ref = resources.files("walkgf").joinpath("grids", f"{name_or_path}.json")
        if not ref.is_file():
            raise InvalidSpec(f"no grid file or packaged grid named {name_or_path!r}")
        data = json.loads(ref.read_text())
    default = int(data.get("order", 30)) if order is None else order
    entries = data.get("cells", [])
    if order is not None:
        entries = [{**e, "order": order} for e in entries]
    return expand_cells(entries, default)
