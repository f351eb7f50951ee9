"""``walkgf`` command line: oracle series, closed forms, root series, verification, strings.

Output is JSON on stdout (``--table`` renders aligned text instead);
diagnostics go to stderr.  Exit codes: 0 success, 1 verification failure,
2 invalid walk specification, 3 violated precondition of a pipeline.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import __version__, barrier_gf, general_gf
from .chain_oracle import InvalidSpec, Marking, WalkSpec, build_chain, first_passage_series
from .exact_algebra import IrrationalCoefficients, PuiseuxSeries, RationalGF, format_rational
from .root_series import TrinomialSpec, large_power_sum, large_root_series, small_power_sum, small_root_series
from .verify import Cell, load_grid, packaged_grids, run_cells

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_PRECONDITION = 0, 1, 2, 3

PRECONDITION_ERRORS = (
    barrier_gf.PreconditionError,
    general_gf.PreconditionError,
    general_gf.NoResidueSolution,
    IrrationalCoefficients,
)


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind, self.message = code, kind, message


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _coeff_map(items) -> dict[str, str]:
    return {format_rational(e): format_rational(c) for e, c in items}


def _series_json(series: PuiseuxSeries) -> dict:
    order = series.order
    return {
        "order": None if order == float("inf") else format_rational(order),
        "coefficients": _coeff_map(series.items()),
    }


def _gf_json(gf: RationalGF, expand: int | None) -> dict:
    out = {
        "numerator": _coeff_map(gf.numerator.items()),
        "denominator": _coeff_map(gf.denominator.items()),
        "normalization": {"shift": gf.shift, "scale": gf.scale},
    }
    if expand:
        out["expansion"] = _series_json(gf.expand(expand))
    return out


COEFFICIENT_KEYS = ("coefficients", "numerator", "denominator")


def _table(payload: dict) -> str:
    """Aligned ``exponent  coefficient`` columns for every coefficient map in the payload."""
    lines: list[str] = []

    def emit(title: str, mapping: dict) -> None:
        lines.append(title)
        if not mapping:
            lines.append("  (empty)")
            return
        width = max(len(k) for k in mapping)
        for k, v in mapping.items():
            lines.append(f"  z^{k.ljust(width)}  {v}")

    def walk(obj: Any, path: str) -> None:
        if isinstance(obj, dict):
            if path.split(".")[-1] in COEFFICIENT_KEYS:
                emit(path, obj)
                return
            for k, v in obj.items():
                walk(v, f"{path}.{k}" if path else k)
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                walk(v, f"{path}[{i}]")
        else:
            lines.append(f"{path}: {obj}")

    walk(payload, "")
    return "\n".join(lines)


def _emit(payload: dict, table: bool) -> None:
    if table:
        print(_table(payload))
    else:
        print(json.dumps(payload, indent=2))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _parse_target(text: str) -> Any:
    if text in ("left", "right", "all"):
        return text
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        raise CliError(EXIT_INVALID, "InvalidSpec", f"cannot parse target {text!r}") from None
    if isinstance(value, int):
        return [value]
    if isinstance(value, list) and all(isinstance(v, int) for v in value):
        return value
    raise CliError(EXIT_INVALID, "InvalidSpec", f"target must be left, right, all or a list of cells, not {text!r}")


def cmd_oracle(args: argparse.Namespace) -> dict:
    """First ``--order`` nonzero coefficients of the exact first-passage series."""
    spec = WalkSpec(args.y, args.b, args.m)
    chain = build_chain(spec)
    marking = Marking.parse(args.marking)
    target = _parse_target(args.target)
    if args.order < 1:
        raise InvalidSpec("order must be positive")
    cap = args.max_exponent if args.max_exponent is not None else 8 * args.order + 4 * args.m
    horizon = max(args.order + 1, 8)
    while True:
        series = first_passage_series(chain, args.start, target, min(horizon, cap + 1), marking)
        found = [(e, c) for e, c in series.items() if c]
        if len(found) >= args.order or horizon > cap:
            break
        horizon *= 2
    found = found[: args.order]
    return {
        "spec": spec.to_json(),
        "start": args.start,
        "target": args.target,
        "marking": marking.value,
        "requested_terms": args.order,
        "exponent_cap": cap,
        "complete": len(found) == args.order,
        "coefficients": _coeff_map(found),
    }


def cmd_gf(args: argparse.Namespace) -> dict:
    pipeline = args.pipeline
    out: dict[str, Any] = {"pipeline": pipeline}
    if pipeline == "one-back":
        fn = barrier_gf.p_left_one_back if args.side == "left" else barrier_gf.p_right_one_back
        WalkSpec(args.y, 1, args.m)
        out.update(params={"y": args.y, "b": 1, "m": args.m, "side": args.side})
        out.update(_gf_json(fn(args.y, args.m), args.expand))
    elif pipeline in ("two-back", "general"):
        b = 2 if pipeline == "two-back" else args.b
        WalkSpec(args.y, b, args.m)
        out["params"] = {"y": args.y, "b": b, "m": args.m}
        if b == 2:
            out.update(_gf_json(general_gf.gf_two_back(args.y, args.m), args.expand))
        else:
            out.update(_general_gf_any_b(args.y, b, args.m, args.expand))
        if getattr(args, "show_mu", False):
            out["mu"] = general_gf.mu_decomposition(args.y, b, args.m).to_json()
        if getattr(args, "show_strings", False):
            out["strings"] = _strings_dump(args.y, b, args.m)
    elif pipeline == "exact-3f2b":
        out["params"] = {"kappa": args.kappa, "m": 6 * args.kappa}
        out.update(_gf_json(general_gf.gf_exact_3f2b(args.kappa), args.expand))
    elif pipeline == "duchon":
        marking = Marking.parse(args.marking)
        out["params"] = {"v": args.v, "s": args.s, "marking": marking.value}
        out["series"] = _series_json(barrier_gf.duchon_two_left(args.v, args.s, args.order, marking))
    elif pipeline == "duchon-inner":
        out["series"] = _series_json(barrier_gf.duchon_inner_series(args.order))
    elif pipeline == "single-barrier":
        shift, scale = barrier_gf.single_barrier_normalization(args.k)
        out["params"] = {"k": args.k}
        out["normalization"] = {"shift": shift, "scale": scale}
        out["series"] = _series_json(barrier_gf.fuss_single_barrier(args.k, args.order))
    return out


def _general_gf_any_b(y: int, b: int, m: int, expand: int | None) -> dict:
    """String-expansion denominator paired with the Jacobi-Trudi numerator on the same scale."""
    schur = general_gf.vandermonde_gf(y, b, m)
    den = general_gf.string_denominator(y, b, m)
    if not den.is_proportional(schur.denominator):
        raise CliError(EXIT_FAIL, "VerificationFailure", "string denominator disagrees with the determinant route")
    scale = den.lowest_coefficient() / schur.denominator.lowest_coefficient()
    return _gf_json(RationalGF(schur.numerator.scale(scale), den, schur.shift, schur.scale), expand)


def _strings_dump(y: int, b: int, m: int | None) -> list[dict]:
    dump = []
    for idx in range(1, b + 2):
        for term in general_gf.enumerate_strings(y, b, idx, m):
            dump.append({"mu": idx, **term.to_json()})
    return dump


def cmd_roots(args: argparse.Namespace) -> dict:
    spec = TrinomialSpec(args.v, args.u, Fraction(args.j))
    if args.sum:
        fn = small_power_sum if args.kind == "small" else large_power_sum
        series = fn(spec, args.k, args.order)
    else:
        fn = small_root_series if args.kind == "small" else large_root_series
        series = fn(spec, args.k, args.branch, args.order, args.scaled).series
    return {
        "trinomial": {"v": args.v, "u": args.u, "j": format_rational(spec.j)},
        "kind": args.kind,
        "k": args.k,
        "branch": None if args.sum else args.branch,
        "power_sum": args.sum,
        "scaled": args.scaled,
        "series": _series_json(series),
    }


def _inline_cells(args: argparse.Namespace) -> list[Cell]:
    from .verify import expand_cells

    entry: dict[str, Any] = {"formula": args.formula, "y": args.y, "b": args.b, "m": args.m, "order": args.order}
    if args.s is not None:
        entry["s"] = args.s
    for opt in args.option or []:
        key, _, value = opt.partition("=")
        try:
            entry[key] = json.loads(value)
        except json.JSONDecodeError:
            entry[key] = value
    return expand_cells([entry], args.order)


def cmd_verify(args: argparse.Namespace) -> tuple[dict, int]:
    if args.list_grids:
        return {"grids": packaged_grids()}, EXIT_OK
    if args.grid:
        cells = load_grid(args.grid, args.order)
    elif args.formula:
        if args.y is None or args.b is None or args.m is None:
            raise InvalidSpec("inline verification needs --y, --b and --m")
        cells = _inline_cells(args)
    else:
        raise InvalidSpec("give --grid or --formula")
    jobs = args.jobs if args.jobs is not None else int(os.environ.get("WALKGF_JOBS", "1"))
    reports = run_cells(cells, max(1, jobs))
    failed = [r for r in reports if not r.passed]
    payload = {
        "summary": {"cells": len(reports), "passed": len(reports) - len(failed), "failed": len(failed)},
        "reports": [r.to_json() for r in reports],
    }
    for r in failed:
        print(f"FAIL {r.cell.to_json()} status={r.status} mismatch={r.first_mismatch} delta={r.delta}", file=sys.stderr)
    return payload, EXIT_FAIL if failed else EXIT_OK


def cmd_strings(args: argparse.Namespace) -> dict:
    terms = general_gf.enumerate_strings(args.y, args.b, args.mu, args.m)
    parts = general_gf.weight_partitions(args.b)
    b = args.b
    return {
        "params": {"y": args.y, "b": b, "mu": args.mu, "m": args.m},
        "partitions": [{"weights": list(w), "lambda": lam} for w, lam in parts],
        "partition_count": len(parts),
        "q_binomial_count": general_gf.q_binomial_coefficient(3 * b - 2, b, b * (b - 1)),
        "term_count": sum(t.p for t in terms),
        "terms": [t.to_json() for t in terms],
    }


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walkgf", description="Exact generating functions for walks between two absorbing barriers.")
    parser.add_argument("--version", action="version", version=f"walkgf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--table", action="store_true", help="aligned text instead of JSON")
        p.add_argument("--json", action="store_true", help="JSON output (the default)")

    p = sub.add_parser("oracle", help="exact first-passage coefficients from the absorbing chain")
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--target", default="left", help="left, right, all or a JSON list of cells")
    p.add_argument("--order", type=int, default=10, help="number of nonzero coefficients to emit")
    p.add_argument("--marking", default="back", help="back, total or people")
    p.add_argument("--max-exponent", type=int, default=None, help="stop searching beyond this exponent")
    common(p)

    p = sub.add_parser("gf", help="closed-form generating functions")
    gsub = p.add_subparsers(dest="pipeline", required=True)
    g = gsub.add_parser("one-back")
    g.add_argument("--y", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--side", choices=("left", "right"), default="left")
    g.add_argument("--expand", type=int, default=None, help="also expand below this exponent")
    common(g)
    for name in ("two-back", "general"):
        g = gsub.add_parser(name)
        g.add_argument("--y", type=int, required=True)
        if name == "general":
            g.add_argument("--b", type=int, required=True)
            g.add_argument("--show-strings", action="store_true")
            g.add_argument("--show-mu", action="store_true")
        g.add_argument("--m", type=int, required=True)
        g.add_argument("--order", dest="expand", type=int, default=None, help="also expand below this exponent")
        common(g)
    g = gsub.add_parser("exact-3f2b")
    g.add_argument("--kappa", type=int, required=True)
    g.add_argument("--order", dest="expand", type=int, default=None)
    common(g)
    g = gsub.add_parser("duchon")
    g.add_argument("--v", type=int, default=5)
    g.add_argument("--s", type=int, default=2)
    g.add_argument("--order", type=int, default=20)
    g.add_argument("--marking", default="back")
    common(g)
    g = gsub.add_parser("duchon-inner")
    g.add_argument("--order", type=int, default=32)
    common(g)
    g = gsub.add_parser("single-barrier")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--order", type=int, default=10)
    common(g)

    p = sub.add_parser("roots", help="series of trinomial roots and their power sums")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--j", default="2")
    p.add_argument("--kind", choices=("small", "large"), default="small")
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--k", type=int, default=1, help="power of the root")
    p.add_argument("--order", type=int, default=10)
    p.add_argument("--scaled", action="store_true", help="normalized variable, no powers of j")
    p.add_argument("--sum", action="store_true", help="sum over all branches of the kind")
    common(p)

    p = sub.add_parser("verify", help="check closed forms against the oracle")
    p.add_argument("--grid", help="grid JSON path or packaged grid name")
    p.add_argument("--list-grids", action="store_true")
    p.add_argument("--formula")
    p.add_argument("--y")
    p.add_argument("--b")
    p.add_argument("--m", help="value, list or range a..b")
    p.add_argument("--s")
    p.add_argument("--option", action="append", help="extra cell option key=value")
    p.add_argument("--order", type=int, default=None, help="compare exponents 0..order (inclusive)")
    p.add_argument("--jobs", type=int, default=None, help="parallel workers (default $WALKGF_JOBS or 1)")
    common(p)

    p = sub.add_parser("strings", help="string terms of a denominator block")
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--mu", type=int, default=1)
    p.add_argument("--m", type=int, default=None)
    common(p)
    return parser


def _error_payload(kind: str, message: str, code: int) -> dict:
    return {"error": {"type": kind, "message": message, "exit_code": code}}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    table = getattr(args, "table", False)
    code = EXIT_OK
    try:
        if args.command == "verify":
            if args.order is None and not args.grid:
                args.order = 30
            payload, code = cmd_verify(args)
        else:
            handler = {"oracle": cmd_oracle, "gf": cmd_gf, "roots": cmd_roots, "strings": cmd_strings}[args.command]
            payload = handler(args)
    except CliError as exc:
        payload, code = _error_payload(exc.kind, exc.message, exc.code), exc.code
    except InvalidSpec as exc:
        payload, code = _error_payload("InvalidSpec", str(exc), EXIT_INVALID), EXIT_INVALID
    except PRECONDITION_ERRORS as exc:
        payload, code = _error_payload(type(exc).__name__, str(exc), EXIT_PRECONDITION), EXIT_PRECONDITION
    except ValueError as exc:
        payload, code = _error_payload("InvalidSpec", str(exc), EXIT_INVALID), EXIT_INVALID
    if "error" in payload:
        print(f"walkgf: {payload['error']['type']}: {payload['error']['message']}", file=sys.stderr)
    _emit(payload, table)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
