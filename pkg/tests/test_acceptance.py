"""One test per acceptance criterion; each prints a PASS/FAIL line in the summary.

Run ``pytest tests/test_acceptance.py -v``.  Lines are collected in
``conftest.ACCEPTANCE_LINES`` and shown under "acceptance criteria".
"""

import random
import time
from collections import Counter
from fractions import Fraction

import pytest

from nodaltorus.exact import LinearForm, format_linear_form, format_rational, lf_eval, parse_linear_form, parse_rational
from nodaltorus.oracle import nodal_count_without_plus_one, validate_formula
from nodaltorus.spectral import build_spectrum, check_isospectral, cutoff_for_lines, enumerate_ball, first_nodal_difference
from nodaltorus.theorem import (
    UNIQUE_MAX_FORM,
    build_E,
    certify_unique_max,
    check_isometric_degenerate,
    classify_parity,
    compare_E,
    load_golden,
    verify_theorem,
)
from nodaltorus.torus import ParamTuple, make_Q_minus, make_Q_plus, make_U, matvec, quad_form, quad_value

from conftest import ACCEPTANCE_LINES, brute_force_spectrum

DISTINCT = ["1,2,3,4", "2,3,5,7", "1/2,1,3/2,2"]
ISOMETRIC = ["1,1,2,3", "2,3,3,5", "1,2,2,2"]
# (line index, eigenvalue) of the first nodal difference, pinned after an exhaustive build
FIRST_DIFFERENCE = {"1,2,3,4": (37, Fraction(12)), "2,3,5,7": (49, Fraction(67, 3)), "1/2,1,3/2,2": (37, Fraction(6))}


def record(number, name, ok, detail, started, budget=None):
    elapsed = time.perf_counter() - started
    within = budget is None or elapsed < budget
    limit = f" / budget {budget:g}s" if budget is not None else ""
    verdict = "PASS" if ok and within else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {number:>2} [{verdict}] {name}: {detail} ({elapsed:.2f}s{limit})")
    print(ACCEPTANCE_LINES[-1])
    return ok and within


def test_c01_equal_for_small_m():
    t = time.perf_counter()
    sizes = {m: compare_E(m) for m in (1, 2, 3)}
    ok = all(c.equal for c in sizes.values())
    detail = ", ".join(f"m={m} {'equal' if c.equal else 'differ'} ({len(c.common)} forms)" for m, c in sizes.items())
    assert record(1, "E_m+ = E_m- for m <= 3", ok, detail, t, 1.0)


def test_c02_m4_golden_lists():
    t = time.perf_counter()
    cmp4 = compare_E(4)
    gp, gm = set(load_golden("+")), set(load_golden("-"))
    ok = len(cmp4.only_plus) == len(cmp4.only_minus) == 24 and set(cmp4.only_plus) == gp and set(cmp4.only_minus) == gm
    detail = f"{len(cmp4.only_plus)}+{len(cmp4.only_minus)} private forms, golden match {set(cmp4.only_plus) == gp and set(cmp4.only_minus) == gm}"
    assert record(2, "m=4 private lists equal the transcribed lists", ok, detail, t, 1.0)


def _parity_counts(base):
    cmp4 = compare_E(4)
    plus = classify_parity(cmp4.only_plus, base)
    minus = classify_parity(cmp4.only_minus, base)
    return len(plus.even_members), len(plus.odd_members), len(minus.even_members), len(minus.odd_members)


def test_c03_parity_even_in_plus():
    # literal form: with each base read in ascending order, E_4^+ holds the even arrangements
    t = time.perf_counter()
    results = {base: _parity_counts(base) for base in [(1, 4, 9, 16), (0, 1, 4, 25)]}
    ok = all(r == (12, 0, 0, 12) for r in results.values())
    detail = "; ".join(f"base {b}: +even {r[0]} +odd {r[1]} -even {r[2]} -odd {r[3]}" for b, r in results.items())
    assert record(3, "E_4^+ private = even permutations, E_4^- private = odd (ascending bases)", ok, detail, t, 1.0)


def test_c03b_parity_classes_split():
    # each side holds one full parity class per pattern, and the two sides hold opposite classes
    t = time.perf_counter()
    results = {base: _parity_counts(base) for base in [(1, 4, 9, 16), (0, 1, 4, 25)]}
    ok = all(r in ((12, 0, 0, 12), (0, 12, 12, 0)) for r in results.values())
    detail = "; ".join(f"base {b}: {'+even/-odd' if r[0] else '+odd/-even'}" for b, r in results.items())
    assert record(3, "parity classes split 12/12 and opposite between sides", ok, detail, t, 1.0)


def test_c04_unique_max_over_union():
    t = time.perf_counter()
    cert = certify_unique_max(build_E("+", 4), build_E("-", 4))
    top3 = 3 * lf_eval(UNIQUE_MAX_FORM, (1, 2, 3, 4))
    ok = cert.holds_over_union and cert.numeric_top_is_strict_max and top3 == 114
    losers = ", ".join(format_linear_form(e.competitor) for e in cert.union_failures)
    detail = (
        f"undominated competitors: {len(cert.union_failures)} [{losers}]; "
        f"numeric 3*top = {format_rational(top3)} strict over difference {cert.numeric_top_is_strict_max}; "
        f"union max at (1,2,3,4) is {format_linear_form(cert.union_max[0])} = {format_rational(cert.union_max[1])}"
    )
    assert record(4, "b+4c+25d dominates every other element of E_4^+ u E_4^-", ok, detail, t, 1.0)


def test_c04b_unique_max_over_difference():
    t = time.perf_counter()
    cert = certify_unique_max(build_E("+", 4), build_E("-", 4))
    top3 = 3 * lf_eval(UNIQUE_MAX_FORM, (1, 2, 3, 4))
    ok = cert.holds_over_difference and cert.numeric_top_is_strict_max and top3 == 114
    n = sum(e.in_difference for e in cert.entries)
    detail = f"{n} competitors in the symmetric difference all dominated, 3*top = {format_rational(top3)} strict"
    assert record(4, "b+4c+25d dominates the symmetric difference", ok, detail, t, 1.0)


def test_c05_nodal_formula():
    t = time.perf_counter()
    result = validate_formula(3)
    detail = f"{len(result.rows)} (q, part) rows, {len(result.mismatches)} mismatches"
    assert record(5, "formula = slab count = flood fill for |q|_1 <= 3", result.passed, detail, t, 60.0)


@pytest.mark.parametrize("params", DISTINCT)
def test_c06_isospectral(params):
    t = time.perf_counter()
    p = ParamTuple.parse(params)
    cutoff = cutoff_for_lines(p, 30)
    plus, minus = build_spectrum("+", p, cutoff), build_spectrum("-", p, cutoff)
    check_isospectral(plus, minus)
    ok = plus.degeneracy_profile() == minus.degeneracy_profile() and len(plus.lines) >= 30
    detail = f"p=({params}) cutoff {format_rational(cutoff)}, {len(plus.lines)} eigenvalues, {plus.total_vectors()} vectors, profiles equal"
    assert record(6, "T+ and T- isospectral", ok, detail, t, 30.0)


@pytest.mark.parametrize("params", DISTINCT)
def test_c07_distinguished(params):
    t = time.perf_counter()
    p = ParamTuple.parse(params)
    cmp4 = compare_E(4)
    values = {lf_eval(f, tuple(p)) for f in cmp4.only_plus + cmp4.only_minus}
    diff = first_nodal_difference(p, max(values))
    ok = diff is not None and diff.eigenvalue in values and (diff.index, diff.eigenvalue) == FIRST_DIFFERENCE[params]
    detail = "no difference" if diff is None else (
        f"p=({params}) line {diff.index}, eigenvalue {format_rational(diff.eigenvalue)}, "
        f"m=4 form value {diff.eigenvalue in values}, {diff.pair_counts()}"
    )
    assert record(7, "first nodal difference at an m=4 form value", ok, detail, t, 30.0)


@pytest.mark.parametrize("params", ISOMETRIC)
def test_c08_isometric(params):
    t = time.perf_counter()
    report = check_isometric_degenerate(ParamTuple.parse(params), min_lines=20)
    ok = not report.violation and report.lines >= 20
    detail = f"p=({params}) {report.lines} eigenvalues up to {format_rational(report.cutoff)}, no difference {not report.violation}"
    assert record(8, "no nodal difference when parameters coincide", ok, detail, t, 30.0)


def _random_pd(rng):
    n = rng.randint(2, 4)
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            m[i][j] = m[j][i] = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
    for i in range(n):
        m[i][i] = sum(abs(x) for x in m[i]) + Fraction(rng.randint(1, 6), rng.randint(1, 3))
    return tuple(tuple(r) for r in m)


def test_c09_properties():
    t = time.perf_counter()
    rng = random.Random(9)
    failures = []
    p = (Fraction(3, 2), Fraction(2), Fraction(7, 3), Fraction(5))
    qp, qm = make_Q_plus(), make_Q_minus()
    u = make_U()
    for _ in range(200):
        q = tuple(rng.randint(-7, 7) for _ in range(4))
        for Q in (qp, qm):
            if quad_form(Q, q) != quad_form(Q, tuple(-x for x in q)):
                failures.append(f"evenness {q}")
        q2 = tuple(2 * x for x in q)
        if quad_value(qm.evaluate(p), q2) != quad_value(qp.evaluate(p), matvec(u, q2)):
            failures.append(f"congruence {q2}")
    for _ in range(50):
        Q = _random_pd(rng)
        cutoff = Fraction(rng.randint(2, 30), rng.randint(1, 3))
        brute = brute_force_spectrum(Q, cutoff)
        got = enumerate_ball(Q, cutoff)
        if Counter(quad_value(Q, v) for v in got) != {v: sum(c.values()) for v, c in brute.items()}:
            failures.append(f"ball {Q} {cutoff}")
    for _ in range(1000):
        r = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**6))
        if parse_rational(format_rational(r)) != r:
            failures.append(f"rational {r}")
        f = LinearForm(tuple(Fraction(rng.randint(-50, 50), rng.randint(1, 12)) for _ in range(4)))
        if parse_linear_form(format_linear_form(f)) != f:
            failures.append(f"form {f}")
    detail = f"200 evenness/congruence samples, 50 random matrices, 1000 round trips, {len(failures)} failures"
    assert record(9, "property suites", not failures, detail, t), failures[:5]


def test_c10_mutations():
    t = time.perf_counter()
    mutant = validate_formula(2, formula=nodal_count_without_plus_one)
    golden = list(load_golden("+"))
    c = golden[0].coeffs
    golden[0] = LinearForm((c[1], c[0], c[2], c[3]))
    report = verify_theorem(4, golden_plus=golden)
    ok = not mutant.passed and report.verdict == "FAIL"
    detail = f"dropped +1 gives {len(mutant.mismatches)} mismatches; mutated golden form gives verdict {report.verdict}"
    assert record(10, "injected bugs are caught", ok, detail, t)
