"""Mechanical check that nodal sequences separate T+(a,b,c,d) from T-(a,b,c,d).

For each ``m`` the set ``E_m^sign`` collects the symbolic eigenvalues
``q^T Q^sign q`` over integer vectors with ``sum |q_i| = m`` (exactly the
vectors whose eigenfunctions have ``2m`` or ``2m+1`` nodal domains).  If the
two sets differ for some ``m`` the nodal sequences differ.  They agree for
``m <= 3``; at ``m = 4`` each side has 24 private forms, split by permutation
parity over the coefficient patterns (1,4,9,16) and (0,1,4,25), and
``(b + 4c + 25d)/3`` dominates every private form whenever ``a < b < c < d``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable, Optional, Sequence

from .exact import (
    LinearForm,
    display_linear_form,
    format_linear_form,
    format_rational,
    lf_eval,
    parse_linear_form,
)
from .spectral import NodalDifference, build_spectrum, compare_sequences, cutoff_for_lines, enumerate_V_m
from .torus import ParamTuple, make_Q, quad_form, quad_value

PARITY_BASES: tuple[tuple[int, int, int, int], ...] = ((1, 4, 9, 16), (0, 1, 4, 25))
# (b + 4c + 25d) / 3
UNIQUE_MAX_FORM = LinearForm.of(0, 1, 4, 25, scale=Fraction(1, 3))
CROSS_CHECK_POINT = (1, 2, 3, 4)


class TheoremCheckError(AssertionError):
    """A sanity invariant of the symbolic computation failed."""


class ClassificationError(ValueError):
    pass


@dataclass(frozen=True)
class EigenvalueSet:
    m: int
    sign: str
    forms: tuple[LinearForm, ...]

    def __contains__(self, form: LinearForm) -> bool:
        return form in self.as_set()

    def __len__(self) -> int:
        return len(self.forms)

    def as_set(self) -> frozenset[LinearForm]:
        return frozenset(self.forms)


def eigenvalue_witnesses(sign: str, m: int) -> dict[LinearForm, list[tuple[int, ...]]]:
    """Each form of ``E_m^sign`` with every ``q`` in ``V_m`` that produces it."""
    q_matrix = make_Q(sign)
    out: dict[LinearForm, list[tuple[int, ...]]] = {}
    for q in enumerate_V_m(m):
        out.setdefault(quad_form(q_matrix, q), []).append(q)
    return out


def build_E(sign: str, m: int) -> EigenvalueSet:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return EigenvalueSet(m, sign, tuple(sorted(eigenvalue_witnesses(sign, m))))


@dataclass(frozen=True)
class EComparison:
    m: int
    only_plus: tuple[LinearForm, ...]
    only_minus: tuple[LinearForm, ...]
    common: tuple[LinearForm, ...]

    @property
    def equal(self) -> bool:
        return not self.only_plus and not self.only_minus

    def to_dict(self, display: bool = False) -> dict:
        fmt = display_linear_form if display else format_linear_form
        return {
            "m": self.m,
            "equal": self.equal,
            "sizes": {"plus": len(self.only_plus) + len(self.common), "minus": len(self.only_minus) + len(self.common),
                      "common": len(self.common)},
            "only_plus": [fmt(f) for f in self.only_plus],
            "only_minus": [fmt(f) for f in self.only_minus],
        }


def compare_E(m: int) -> EComparison:
    plus, minus = build_E("+", m).as_set(), build_E("-", m).as_set()
    return EComparison(
        m,
        only_plus=tuple(sorted(plus - minus)),
        only_minus=tuple(sorted(minus - plus)),
        common=tuple(sorted(plus & minus)),
    )


# -- permutation parity ------------------------------------------------------


def permutation_parity(perm: Sequence[int]) -> int:
    """0 for even, 1 for odd (inversion count)."""
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return inversions % 2


def _cleared(form: LinearForm, scale: Fraction) -> Optional[tuple[int, ...]]:
    values = [c / scale for c in form.coeffs]
    if any(v.denominator != 1 for v in values):
        return None
    return tuple(int(v) for v in values)


@dataclass(frozen=True)
class ParityClassification:
    """Forms whose cleared coefficients permute ``coefficient_multiset``.

    Parity is that of the permutation taking the reference assignment
    ``coefficient_multiset`` (coefficient k on variable k) to the form.
    """

    coefficient_multiset: tuple[int, int, int, int]
    even_members: tuple[LinearForm, ...]
    odd_members: tuple[LinearForm, ...]

    def to_dict(self) -> dict:
        return {
            "reference": list(self.coefficient_multiset),
            "even": [display_linear_form(f) for f in self.even_members],
            "odd": [display_linear_form(f) for f in self.odd_members],
        }


def classify_parity(
    diff: Iterable[LinearForm],
    base: Sequence[int],
    known_bases: Sequence[Sequence[int]] = PARITY_BASES,
    scale: Fraction = Fraction(1, 3),
) -> ParityClassification:
    """Split the forms of ``diff`` that permute ``base`` by permutation parity.

    Coefficients are divided by ``scale`` first.  Forms that permute one of
    the other ``known_bases`` are skipped; any form matching none of them
    raises ClassificationError.
    """
    base = tuple(int(x) for x in base)
    if len(set(base)) != len(base):
        raise ValueError(f"base {base} has repeated entries; parity would be ambiguous")
    others = [tuple(sorted(b)) for b in known_bases]
    even, odd = [], []
    for form in sorted(set(diff)):
        cleared = _cleared(form, scale)
        if cleared is None or sorted(cleared) != sorted(base):
            if cleared is None or tuple(sorted(cleared)) not in others:
                raise ClassificationError(
                    f"{display_linear_form(form)} does not permute any of {list(map(list, known_bases))}"
                )
            continue
        perm = [base.index(c) for c in cleared]
        (odd if permutation_parity(perm) else even).append(form)
    return ParityClassification(base, tuple(even), tuple(odd))


# -- unique maximum ----------------------------------------------------------


def gap_coefficients(form: LinearForm) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Rewrite ``form`` in ``(a, g1, g2, g3)`` with ``b = a+g1, c = b+g2, d = c+g3``."""
    ca, cb, cc, cd = form.coeffs
    return (ca + cb + cc + cd, cb + cc + cd, cc + cd, cd)


@dataclass(frozen=True)
class Dominance:
    competitor: LinearForm
    gaps: tuple[Fraction, Fraction, Fraction, Fraction]
    in_difference: bool

    @property
    def dominated(self) -> bool:
        # a > 0 and every gap > 0, so nonnegative coefficients, not all zero, give strict dominance
        return all(x >= 0 for x in self.gaps) and any(x > 0 for x in self.gaps)

    def to_dict(self) -> dict:
        return {
            "competitor": format_linear_form(self.competitor),
            "display": display_linear_form(self.competitor),
            "gap_coefficients": [format_rational(x) for x in self.gaps],
            "in_difference": self.in_difference,
            "dominated": self.dominated,
        }


@dataclass(frozen=True)
class UniqueMaxCertificate:
    top: LinearForm
    in_plus: bool
    in_minus: bool
    entries: tuple[Dominance, ...]
    point: tuple[Fraction, ...]
    difference_values: tuple[tuple[LinearForm, Fraction], ...]
    union_max: tuple[LinearForm, Fraction]

    @property
    def in_exactly_one(self) -> bool:
        return self.in_plus != self.in_minus

    @property
    def union_failures(self) -> tuple[Dominance, ...]:
        return tuple(e for e in self.entries if not e.dominated)

    @property
    def difference_failures(self) -> tuple[Dominance, ...]:
        return tuple(e for e in self.entries if e.in_difference and not e.dominated)

    @property
    def holds_over_union(self) -> bool:
        return self.in_exactly_one and not self.union_failures

    @property
    def holds_over_difference(self) -> bool:
        return self.in_exactly_one and not self.difference_failures

    @property
    def scope(self) -> str:
        if self.holds_over_union:
            return "union"
        if self.holds_over_difference:
            return "symmetric-difference"
        return "none"

    @property
    def numeric_top_is_strict_max(self) -> bool:
        """At the cross-check point, is ``top`` the strict maximum of the difference lists?"""
        top_value = lf_eval(self.top, self.point)
        others = [v for f, v in self.difference_values if f != self.top]
        return all(v < top_value for v in others)

    def to_dict(self) -> dict:
        top_value = lf_eval(self.top, self.point)
        return {
            "top": format_linear_form(self.top),
            "top_display": display_linear_form(self.top),
            "in_plus": self.in_plus,
            "in_minus": self.in_minus,
            "scope": self.scope,
            "holds_over_union": self.holds_over_union,
            "holds_over_difference": self.holds_over_difference,
            "union_failures": [e.to_dict() for e in self.union_failures],
            "certificates": [e.to_dict() for e in self.entries],
            "numeric_cross_check": {
                "point": [format_rational(x) for x in self.point],
                "top_value": format_rational(top_value),
                "top_value_times_3": format_rational(3 * top_value),
                "strict_max_of_difference": self.numeric_top_is_strict_max,
                "union_max_form": format_linear_form(self.union_max[0]),
                "union_max_value": format_rational(self.union_max[1]),
            },
        }


def certify_unique_max(
    plus: EigenvalueSet,
    minus: EigenvalueSet,
    top: LinearForm = UNIQUE_MAX_FORM,
    point: Sequence[int] = CROSS_CHECK_POINT,
) -> UniqueMaxCertificate:
    """Gap-variable dominance of ``top`` over every other element of ``plus | minus``.

    Each competitor is certified individually; the certificate records which
    competitors lie in the symmetric difference so a caller can fall back to
    that scope when some common form is not dominated.
    """
    ps, ms = plus.as_set(), minus.as_set()
    diff = ps ^ ms
    entries = tuple(
        Dominance(f, gap_coefficients(top - f), f in diff) for f in sorted(ps | ms) if f != top
    )
    point = tuple(Fraction(x) for x in point)
    difference_values = tuple((f, lf_eval(f, point)) for f in sorted(diff))
    union_max = max(((f, lf_eval(f, point)) for f in ps | ms), key=lambda fv: (fv[1], fv[0]))
    return UniqueMaxCertificate(top, top in ps, top in ms, entries, point, difference_values, union_max)


# -- golden lists ------------------------------------------------------------


def load_golden(sign: str) -> tuple[LinearForm, ...]:
    """Reference list of the private part of ``E_4^sign``, canonical form."""
    name = {"+": "e4_plus_only.txt", "-": "e4_minus_only.txt"}[sign]
    text = resources.files("nodaltorus").joinpath("data").joinpath(name).read_text()
    return tuple(parse_linear_form(line) for line in text.splitlines() if line.strip())


# -- full verification -------------------------------------------------------


@dataclass
class TheoremReport:
    max_m: int
    comparisons: list[EComparison]
    golden_mismatches: dict[str, dict[str, list[str]]]
    parity: dict[str, dict[str, ParityClassification]]
    certificate: UniqueMaxCertificate
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "max_m": self.max_m,
            "per_m": [
                dict(c.to_dict(), claim=("proof" if c.m <= 4 else "exploratory")) for c in self.comparisons
            ],
            "golden_mismatches": self.golden_mismatches,
            "parity": {side: {str(k): v.to_dict() for k, v in tables.items()} for side, tables in self.parity.items()},
            "unique_max": self.certificate.to_dict(),
            "failures": list(self.failures),
            "notes": list(self.notes),
        }


def _check_sums(sign: str, m: int, witnesses: dict[LinearForm, list[tuple[int, ...]]]) -> None:
    # Q(1,1,1,1) = I, so coefficients of q^T Q q sum to |q|^2; 12 * form is integral.
    for form, qs in witnesses.items():
        if any((12 * c).denominator != 1 for c in form.coeffs):
            raise TheoremCheckError(f"E_{m}^{sign}: {format_linear_form(form)} is not in (1/12)Z^4")
        for q in qs:
            if form.coefficient_sum() != sum(x * x for x in q):
                raise TheoremCheckError(
                    f"E_{m}^{sign}: coefficient sum of {format_linear_form(form)} != |q|^2 for q={q}"
                )


def _check_evaluation(sign: str, witnesses: dict, rng: random.Random) -> None:
    p = tuple(Fraction(rng.randint(1, 50), rng.randint(1, 12)) for _ in range(4))
    q_numeric = make_Q(sign).evaluate(p)
    for form, qs in witnesses.items():
        if lf_eval(form, p) != quad_value(q_numeric, qs[0]):
            raise TheoremCheckError(f"symbolic and numeric eigenvalue disagree for q={qs[0]} at {p}")


def verify_theorem(
    max_m: int = 4,
    golden_plus: Optional[Iterable[LinearForm]] = None,
    golden_minus: Optional[Iterable[LinearForm]] = None,
    seed: int = 0,
) -> TheoremReport:
    """Run every step of the separation argument and collect failures.

    Raises ValueError when ``max_m < 4`` and TheoremCheckError when an
    internal sanity invariant breaks.
    """
    if max_m < 4:
        raise ValueError(f"max_m must be at least 4, got {max_m}")
    rng = random.Random(seed)
    failures: list[str] = []
    notes: list[str] = []
    comparisons = []
    for m in range(1, max_m + 1):
        for sign in "+-":
            w = eigenvalue_witnesses(sign, m)
            _check_sums(sign, m, w)
            _check_evaluation(sign, w, rng)
        comparisons.append(compare_E(m))
    for c in comparisons[:3]:
        if not c.equal:
            failures.append(
                f"E_{c.m}^+ != E_{c.m}^-: only+ {[format_linear_form(f) for f in c.only_plus]}, "
                f"only- {[format_linear_form(f) for f in c.only_minus]}"
            )
    m4 = comparisons[3]

    golden = {
        "+": frozenset(golden_plus) if golden_plus is not None else frozenset(load_golden("+")),
        "-": frozenset(golden_minus) if golden_minus is not None else frozenset(load_golden("-")),
    }
    golden_mismatches = {}
    for sign, computed in (("+", m4.only_plus), ("-", m4.only_minus)):
        missing = sorted(golden[sign] - set(computed))
        unexpected = sorted(set(computed) - golden[sign])
        golden_mismatches[sign] = {
            "missing_from_computed": [format_linear_form(f) for f in missing],
            "not_in_golden": [format_linear_form(f) for f in unexpected],
        }
        for f in missing:
            failures.append(f"golden E_4^{sign} form {format_linear_form(f)} not produced by the computation")
        for f in unexpected:
            failures.append(f"computed E_4^{sign} form {format_linear_form(f)} absent from the golden list")

    parity: dict[str, dict[str, ParityClassification]] = {"+": {}, "-": {}}
    for sign, diff in (("+", m4.only_plus), ("-", m4.only_minus)):
        for base in PARITY_BASES:
            try:
                parity[sign][base] = classify_parity(diff, base)
            except ClassificationError as exc:
                failures.append(f"parity E_4^{sign}: {exc}")
    for base in PARITY_BASES:
        if base not in parity["+"] or base not in parity["-"]:
            continue
        p_cls, m_cls = parity["+"][base], parity["-"][base]
        sizes = (len(p_cls.even_members), len(p_cls.odd_members), len(m_cls.even_members), len(m_cls.odd_members))
        if sizes not in ((12, 0, 0, 12), (0, 12, 12, 0)):
            failures.append(f"parity split for {base} is not one full class per side: (+even,+odd,-even,-odd)={sizes}")
        else:
            plus_class = "even" if sizes[0] else "odd"
            notes.append(f"pattern {base}: E_4^+ holds the {plus_class} permutations, E_4^- the others")

    cert = certify_unique_max(build_E("+", 4), build_E("-", 4))
    if not cert.in_exactly_one:
        failures.append(f"{display_linear_form(cert.top)} is in {'both' if cert.in_plus else 'neither'} of E_4^+-")
    if cert.difference_failures:
        failures.append(
            "not dominated inside the symmetric difference: "
            + ", ".join(format_linear_form(e.competitor) for e in cert.difference_failures)
        )
    if not cert.numeric_top_is_strict_max:
        failures.append(f"numeric cross-check: {display_linear_form(cert.top)} is not the strict max at {cert.point}")
    if cert.union_failures:
        notes.append(
            "common forms not dominated by "
            + display_linear_form(cert.top)
            + ": "
            + ", ".join(display_linear_form(e.competitor) for e in cert.union_failures)
            + "; maximum certified over the symmetric difference only"
        )
    return TheoremReport(max_m, comparisons, golden_mismatches, parity, cert, failures, notes)


# -- isometric parameter tuples ----------------------------------------------


@dataclass(frozen=True)
class IsometryReport:
    params: ParamTuple
    cutoff: Fraction
    lines: int
    difference: Optional[NodalDifference]

    @property
    def violation(self) -> bool:
        return self.difference is not None

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_strings(),
            "cutoff": format_rational(self.cutoff),
            "lines_compared": self.lines,
            "violation": self.violation,
            "difference": self.difference.to_dict() if self.difference else None,
        }


def check_isometric_degenerate(
    p: ParamTuple, cutoff: Optional[Fraction] = None, min_lines: int = 20
) -> IsometryReport:
    """Confirm T+ and T- have identical nodal data when two parameters coincide.

    Without an explicit cutoff, the smallest one covering ``min_lines``
    distinct eigenvalues is used.
    """
    if p.all_distinct():
        raise ValueError(f"parameters {p} are pairwise distinct; the tori need not be isometric")
    if cutoff is None:
        cutoff = cutoff_for_lines(p, min_lines)
    plus = build_spectrum("+", p, cutoff)
    minus = build_spectrum("-", p, cutoff)
    return IsometryReport(p, Fraction(cutoff), len(plus.lines), compare_sequences(plus, minus))
