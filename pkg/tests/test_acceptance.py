"""Acceptance run: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import pytest

from walkgf.barrier_gf import (
    approx_horizon_series,
    duchon_inner_series,
    fuss_single_barrier,
    p_left_one_back,
    p_right_one_back,
    u_poly,
)
from walkgf.chain_oracle import Marking, WalkSpec, build_chain, first_passage_series
from walkgf.exact_algebra import Polynomial
from walkgf.general_gf import enumerate_strings, gf_two_back, mu1_series, mu2_poly, solve_residues, string_denominator, weight_partitions
from walkgf.root_series import (
    TrinomialSpec,
    check_one_back_tail_cancellation,
    check_reduction_identity,
    check_root_derivative_identities,
    large_root_series,
    small_root_series,
    trinomial_residual,
)

ORDER = 30


def report(number: int, title: str, failures: list[str], capsys=None) -> None:
    status = "PASS" if not failures else "FAIL"
    line = f"ACCEPTANCE {number}: {status}  {title}"
    if failures:
        line += "  [" + "; ".join(failures) + "]"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    assert not failures, line


def oracle(y, b, m, s, target, horizon=ORDER + 1, marking=Marking.BACK_STEPS):
    return first_passage_series(build_chain(WalkSpec(y, b, m)), s, target, horizon, marking)


def P(coeffs) -> Polynomial:
    return Polynomial(coeffs)


def criterion_1() -> list[str]:
    failures = []
    start = time.perf_counter()
    cases = []
    for m in range(4, 13):
        cases += [(f"left y=2 m={m}", p_left_one_back(2, m), (2, 1, m, "left"))]
        cases += [(f"right y=2 m={m}", p_right_one_back(2, m), (2, 1, m, "right"))]
    cases += [("left y=3 m=9", p_left_one_back(3, 9), (3, 1, 9, "left"))]
    cases += [("right y=3 m=9", p_right_one_back(3, 9), (3, 1, 9, "right"))]
    for y, m in [(3, 14), (3, 18), (3, 20), (5, 22)]:
        cases.append((f"two-back y={y} m={m}", gf_two_back(y, m), (y, 2, m, [1])))
    for name, gf, (y, b, m, target) in cases:
        # exponents 0..30 inclusive
        if gf.expand(ORDER + 1).coeffs != oracle(y, b, m, m - 1, target).coeffs:
            failures.append(name)
    elapsed = time.perf_counter() - start
    if elapsed > 60:
        failures.append(f"took {elapsed:.1f}s")
    return failures


def criterion_2() -> list[str]:
    failures = []

    def joint(name, gf, num, den):
        if not gf.jointly_proportional(P(num), P(den)):
            failures.append(f"{name} closed form")

    def expansion(name, gf, terms):
        top = max(terms) + 1
        if gf.expand(top, normalized=False).coeffs != {e: Fraction(c) for e, c in terms.items()}:
            failures.append(f"{name} expansion")

    if u_poly(2, 8).poly != P({4: 6, 2: -80, 0: 128}):
        failures.append("u_poly(2,8)")

    # z(z^7 + 8z^6 - 80z^5 - 240z^4 + 448z^3 + 1024z^2 - 512z - 1024) / (8(5z^6 - 84z^4 + 288z^2 - 256))
    pr12 = p_right_one_back(2, 12)
    joint("m=12", pr12, {8: 1, 7: 8, 6: -80, 5: -240, 4: 448, 3: 1024, 2: -512, 1: -1024}, {6: 40, 4: -672, 2: 2304, 0: -2048})
    expansion("m=12", pr12, {1: Fraction(1, 2), 2: Fraction(1, 4), 3: Fraction(1, 16), 4: Fraction(1, 16), 5: Fraction(3, 128)})

    # (-32z(z^3-4) + 4z^2(16-3z^3) - 4z^3(z^3-8)) / (z^6 - 80z^3 + 256)
    num9 = (P({1: -32}) * P({3: 1, 0: -4}) + P({2: 4}) * P({0: 16, 3: -3}) - P({3: 4}) * P({3: 1, 0: -8})).coeffs
    joint("y=3 m=9", p_right_one_back(3, 9), num9, {6: 1, 3: -80, 0: 256})

    # -z^10(15z^3 + 32) / (4(5z^9 - 492z^6 + 3328z^3 - 4096))
    g20 = gf_two_back(3, 20)
    joint("y=3 m=20", g20, {13: -15, 10: -32}, {9: 20, 6: -1968, 3: 13312, 0: -16384})
    expansion("y=3 m=20", g20, {10: Fraction(1, 512), 13: Fraction(41, 16384), 16: Fraction(943, 524288)})

    # (64z^7 + 6z^10) / (4096 - 1792z^3 + 36z^6)
    g14 = gf_two_back(3, 14)
    joint("y=3 m=14", g14, {7: 64, 10: 6}, {0: 4096, 3: -1792, 6: 36})
    expansion("y=3 m=14", g14, {7: Fraction(1, 64), 10: Fraction(17, 2048), 13: Fraction(229, 65536)})

    # z^11(80z^5 + 1024) / (64(93z^10 - 4608z^5 + 16384))
    joint("y=5 m=22", gf_two_back(5, 22), {16: 80, 11: 1024}, {10: 64 * 93, 5: -64 * 4608, 0: 64 * 16384})

    # 16z^9(5z^3 + 16) / (-8z^9 + 4416z^6 - 45056z^3 + 65536)
    g18 = gf_two_back(3, 18)
    joint("y=3 m=18", g18, {12: 80, 9: 256}, {9: -8, 6: 4416, 3: -45056, 0: 65536})
    expansion("y=3 m=18", g18, {9: Fraction(1, 256), 12: Fraction(1, 256), 15: Fraction(635, 262144)})
    return failures


def criterion_3() -> list[str]:
    failures = []
    a = approx_horizon_series(8, 7)
    oracle_series = oracle(2, 1, 8, 7, "right", 7)
    if a.series.truncate(7).coeffs != oracle_series.coeffs:
        failures.append("first 7 terms differ from oracle")
    if a.mismatch_exponent != 7:
        failures.append(f"first mismatch at z^{a.mismatch_exponent}")
    if a.partial_sum != Fraction(15, 16):
        failures.append(f"partial sum {a.partial_sum}")
    if a.delta != Fraction(1, 2048) or a.trial != 11:
        failures.append(f"delta {a.delta} at trial {a.trial}")
    if a.exact_at_trial != Fraction(1949, 2048):
        failures.append(f"oracle mass {a.exact_at_trial}")
    return failures


def criterion_4() -> list[str]:
    failures = []
    if [v for _, v in solve_residues(5, 22)] != [1, 4, 2]:
        failures.append("residues for y=5 m=22")
    tail, second = mu1_series(5, 22, 21), mu2_poly(5, 22, 21)
    if (abs(tail[15]), abs(tail[20])) != (315, Fraction(92309, 256)):
        failures.append("y=5 m=22 tail values")
    for e in (15, 20):
        if tail[e] + second[e] != 0:
            failures.append(f"y=5 m=22 z^{e}")
    tail, second = mu1_series(3, 18, 16), mu2_poly(3, 18, 16)
    if (tail[12], tail[15]) != (Fraction(325, 8), Fraction(9443, 128)):
        failures.append("y=3 m=18 tail values")
    for e in (12, 15):
        if tail[e] + second[e] != 0:
            failures.append(f"y=3 m=18 z^{e}")
    return failures


def criterion_5() -> list[str]:
    failures = []
    if dict(weight_partitions(2)) != {(2, 0): 1, (1, 1): -2}:
        failures.append("b=2 partitions")
    three = dict(weight_partitions(3))
    if three != {(4, 2, 0): 1, (4, 1, 1): -2, (3, 3, 0): -2, (3, 2, 1): 2, (2, 2, 2): -6}:
        failures.append(f"b=3 partitions {three}")
    counts = [sum(t.p for t in enumerate_strings(4, 3, k)) for k in (2, 3)]
    if counts != [228, 342]:
        failures.append(f"term counts {counts}")
    if string_denominator(3, 2, 12, j=1) != P({0: 1, 3: -10, 6: 1}):
        failures.append("m=12 denominator")
    return failures


def criterion_6() -> list[str]:
    failures = []
    head = duchon_inner_series(11)
    if head.coeffs != {4: Fraction(1, 8), 10: Fraction(7, 256)}:
        failures.append(f"leading terms {head}")
    # 15 back steps at most; a right barrier at 40 is out of reach
    want = oracle(3, 2, 40, 2, [1], ORDER + 1, Marking.PEOPLE_LEAVING)
    if duchon_inner_series(ORDER + 1).coeffs != want.coeffs:
        failures.append("oracle disagreement")
    return failures


def criterion_7() -> list[str]:
    failures = []
    phi = (1 + math.sqrt(5)) / 2
    for k in range(1, 6):
        series = fuss_single_barrier(k, 2000)
        total = sum(series.coeffs.values(), Fraction(0))
        if len(series.coeffs) != 2000:
            failures.append(f"k={k} has {len(series.coeffs)} terms")
        if abs(float(total) - (phi - 1) ** k) >= 1e-4:
            failures.append(f"k={k} off by {abs(float(total) - (phi - 1) ** k):.2e}")
    return failures


def criterion_8() -> list[str]:
    failures = []
    for v, u in [(3, 1), (5, 2), (7, 2)]:
        dev = check_reduction_identity(TrinomialSpec(v, u, 2), 0.1)["max_deviation"]
        if not dev < 1e-10:
            failures.append(f"reduction identity ({v},{u}) {dev:.1e}")
    for m in range(0, 9):
        if not check_root_derivative_identities(m, 20)["agree"]:
            failures.append(f"derivative identity m={m}")
    for half_m in range(2, 7):
        if not check_one_back_tail_cancellation(half_m)["ok"]:
            failures.append(f"tail cancellation u={half_m}")
    materialized = [small_root_series(TrinomialSpec(3, 1, 2), 1, 0, 25)]
    for v, u in [(3, 1), (5, 2), (7, 2), (7, 3)]:
        spec = TrinomialSpec(v, u, 1)
        materialized.append(small_root_series(spec, 1, 0, 20))
        materialized.append(large_root_series(spec, 1, 0, 20))
    for rps in materialized:
        if not trinomial_residual(rps).is_zero():
            failures.append(f"residual {rps.kind} v={rps.spec.v} u={rps.spec.u}")
    return failures


CRITERIA = [
    (1, "oracle equivalence through order 30 for every listed walk", criterion_1),
    (2, "golden closed forms and expansions", criterion_2),
    (3, "truncated approximation fails exactly where expected", criterion_3),
    (4, "second-block cancellation of first-block tails", criterion_4),
    (5, "string partition constants and counts", criterion_5),
    (6, "two-left-cell series: leading terms and oracle agreement", criterion_6),
    (7, "single-barrier partial sums approach (phi-1)^k", criterion_7),
    (8, "root-series identity suite", criterion_8),
]


@pytest.mark.parametrize("number,title,check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_acceptance(number, title, check, capsys):
    report(number, title, check(), capsys)


if __name__ == "__main__":
    bad = 0
    for number, title, check in CRITERIA:
        try:
            report(number, title, check())
        except AssertionError:
            bad += 1
    raise SystemExit(1 if bad else 0)
