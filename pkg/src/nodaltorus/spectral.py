"""Spectra and nodal sequences of concrete Conway-Sloane tori.

Eigenvalues are reported divided by ``4 pi^2`` (see :mod:`nodaltorus.exact`).
Lattice enumeration is exact: a box from the dual-diagonal bound
``|q_i| <= sqrt(cutoff * (Q^{-1})_ii)`` is filtered with integer arithmetic
after scaling ``Q`` to a common denominator.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .exact import RationalLike, format_rational, parse_rational
from .torus import (
    LatticeVector,
    NotPositiveDefiniteError,
    ParamTuple,
    RationalMatrix,
    inverse_exact,
    is_positive_definite,
    make_Q,
    quad_value,
)

PARTS = ("re", "im")
_INT64_SAFE = 2**62


class NodalDegeneracyError(ValueError):
    """The imaginary part of the constant eigenfunction vanishes identically."""


class IsospectralityError(RuntimeError):
    """T+ and T- disagree as eigenvalue multisets; indicates a bug, not a finding."""


def worker_count() -> int:
    """Thread cap from ``NODALTORUS_THREADS`` (default: up to 4 CPUs)."""
    raw = os.environ.get("NODALTORUS_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"NODALTORUS_THREADS must be an integer, got {raw!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


# -- nodal counts ------------------------------------------------------------


def l1_norm(q: Sequence[int]) -> int:
    return sum(abs(int(x)) for x in q)


def nodal_count(q: Sequence[int], part: str) -> int:
    """Nodal domains of the real or imaginary part of ``exp(2 pi i q.y)`` in the unit cube."""
    if part not in PARTS:
        raise ValueError(f"part must be 're' or 'im', got {part!r}")
    m = l1_norm(q)
    if part == "im":
        if m == 0:
            raise NodalDegeneracyError("sin(0) vanishes identically; q = 0 has no imaginary nodal count")
        return 2 * m
    return 2 * m + 1


def nodal_pair(q: Sequence[int]) -> tuple[int, int]:
    """``(nu_im, nu_re)`` for a nonzero representing vector."""
    m = l1_norm(q)
    return (2 * m, 2 * m + 1)


# -- enumeration -------------------------------------------------------------


def enumerate_V_m(m: int, n: int = 4) -> list[LatticeVector]:
    """All integer ``n``-vectors with ``sum |q_i| == m``, lexicographically sorted."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")

    def rec(remaining: int, slots: int):
        if slots == 1:
            if remaining == 0:
                yield (0,)
            else:
                yield (-remaining,)
                yield (remaining,)
            return
        for head in range(-remaining, remaining + 1):
            for tail in rec(remaining - abs(head), slots - 1):
                yield (head,) + tail

    return sorted(rec(m, n))


def _ceil_sqrt(x: Fraction) -> int:
    """Smallest integer ``k >= 0`` with ``k*k >= x``."""
    if x <= 0:
        return 0
    k = math.isqrt(x.numerator // x.denominator)
    while k * k < x:
        k += 1
    return k


def coordinate_bounds(q_matrix: RationalMatrix, cutoff: Fraction) -> list[int]:
    gamma = inverse_exact(q_matrix)
    return [_ceil_sqrt(cutoff * gamma[i][i]) for i in range(len(q_matrix))]


def _ball_values(q_matrix: RationalMatrix, cutoff: RationalLike) -> tuple[np.ndarray, list[int], int]:
    """Lattice vectors with ``0 < q^T Q q <= cutoff`` plus their scaled values.

    Returns ``(vectors, values, scale)`` where ``value / scale`` is the exact
    form value; vectors are in lexicographic order.
    """
    cutoff = parse_rational(cutoff)
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    if not is_positive_definite(q_matrix):
        raise NotPositiveDefiniteError("quadratic form is not positive definite")
    n = len(q_matrix)
    scale = math.lcm(*(x.denominator for row in q_matrix for x in row))
    m_int = [[int(x * scale) for x in row] for row in q_matrix]
    limit = math.floor(cutoff * scale)
    bounds = coordinate_bounds(q_matrix, cutoff)

    largest = n * n * max(abs(x) for row in m_int for x in row) * max(bounds) ** 2
    dtype = np.int64 if largest < _INT64_SAFE else object
    mat = np.array(m_int, dtype=dtype)
    tail_axes = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds[1:]]
    if tail_axes:
        tail = np.stack(np.meshgrid(*tail_axes, indexing="ij"), -1).reshape(-1, n - 1)
    else:
        tail = np.zeros((1, 0), dtype=np.int64)
    tail = tail.astype(dtype)

    def chunk(head: int):
        vecs = np.concatenate([np.full((len(tail), 1), head, dtype=dtype), tail], axis=1)
        vals = ((vecs @ mat) * vecs).sum(axis=1)
        keep = (vals <= limit) & (vals > 0)
        return vecs[keep], vals[keep]

    heads = range(-bounds[0], bounds[0] + 1)
    workers = worker_count()
    if workers > 1 and len(heads) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, heads))
    else:
        parts = [chunk(h) for h in heads]
    vectors = np.concatenate([v for v, _ in parts]).astype(np.int64) if parts else np.zeros((0, n), np.int64)
    values = [int(x) for _, vals in parts for x in vals]
    return vectors, values, scale


def enumerate_ball(q_matrix: RationalMatrix, cutoff: RationalLike) -> list[LatticeVector]:
    """Exactly ``{q != 0 : q^T Q q <= cutoff}`` in lexicographic order.

    Raises NotPositiveDefiniteError when ``Q`` fails Sylvester's test.
    """
    vectors, _, _ = _ball_values(q_matrix, cutoff)
    return [tuple(int(x) for x in row) for row in vectors]


# -- spectra -----------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumLine:
    """One distinct eigenvalue (over 4 pi^2) with its representing vectors.

    ``nodal_pairs[k]`` is ``(nu_im, nu_re)`` for ``reps[k]``.
    """

    eigenvalue: Fraction
    reps: tuple[LatticeVector, ...]
    nodal_pairs: tuple[tuple[int, int], ...]

    @property
    def degeneracy(self) -> int:
        return len(self.reps)

    def nodal_multiset(self) -> Counter:
        return Counter(self.nodal_pairs)

    def check(self) -> None:
        """Raise AssertionError if any line invariant fails."""
        assert len(self.reps) == len(self.nodal_pairs) > 0
        assert set(self.reps) == {tuple(-x for x in q) for q in self.reps}, "reps not closed under q -> -q"
        for q, (im, re) in zip(self.reps, self.nodal_pairs):
            assert im == 2 * l1_norm(q) and re == im + 1

    def to_dict(self) -> dict:
        return {
            "eigenvalue": format_rational(self.eigenvalue),
            "degeneracy": self.degeneracy,
            "reps": [list(q) for q in self.reps],
            "nodal_pairs": [list(pair) for pair in self.nodal_pairs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectrumLine":
        return cls(
            eigenvalue=parse_rational(data["eigenvalue"]),
            reps=tuple(tuple(int(x) for x in q) for q in data["reps"]),
            nodal_pairs=tuple((int(im), int(re)) for im, re in data["nodal_pairs"]),
        )


@dataclass(frozen=True)
class NodalSequence:
    lines: tuple[SpectrumLine, ...]
    params: ParamTuple
    sign: str
    cutoff: Fraction

    def eigenvalues(self) -> list[Fraction]:
        return [line.eigenvalue for line in self.lines]

    def degeneracy_profile(self) -> list[tuple[Fraction, int]]:
        return [(line.eigenvalue, line.degeneracy) for line in self.lines]

    def total_vectors(self) -> int:
        return sum(line.degeneracy for line in self.lines)

    def flat_counts(self) -> list[list[int]]:
        """Per line, the sorted counts of every real eigenfunction (re and im listed separately)."""
        return [sorted(x for pair in line.nodal_pairs for x in pair) for line in self.lines]

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_strings(),
            "sign": self.sign,
            "cutoff": format_rational(self.cutoff),
            "lines": [line.to_dict() for line in self.lines],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NodalSequence":
        return cls(
            lines=tuple(SpectrumLine.from_dict(x) for x in data["lines"]),
            params=ParamTuple.of(data["params"]),
            sign=data["sign"],
            cutoff=parse_rational(data["cutoff"]),
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def csv_rows(self, approx: bool = False) -> list[dict]:
        rows = []
        for index, line in enumerate(self.lines, start=1):
            for q, (im, re) in zip(line.reps, line.nodal_pairs):
                row = {
                    "index": index,
                    "eigenvalue": format_rational(line.eigenvalue),
                    "degeneracy": line.degeneracy,
                    "q1": q[0], "q2": q[1], "q3": q[2], "q4": q[3],
                    "nu_im": im,
                    "nu_re": re,
                }
                if approx:
                    row["eigenvalue_approx"] = f"{float(line.eigenvalue):.12g}"
                rows.append(row)
        return rows

    def to_csv(self, approx: bool = False) -> str:
        return write_csv(self.csv_rows(approx), CSV_FIELDS + (["eigenvalue_approx"] if approx else []))


CSV_FIELDS = ["index", "eigenvalue", "degeneracy", "q1", "q2", "q3", "q4", "nu_im", "nu_re"]


def write_csv(rows: Iterable[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def read_spectrum_csv(text: str) -> list[tuple[Fraction, LatticeVector, int, int]]:
    """Parse :meth:`NodalSequence.to_csv` output back into ``(eigenvalue, q, nu_im, nu_re)`` rows."""
    reader = csv.DictReader(io.StringIO(text))
    missing = set(CSV_FIELDS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"CSV header lacks {sorted(missing)}")
    return [
        (
            parse_rational(row["eigenvalue"]),
            tuple(int(row[k]) for k in ("q1", "q2", "q3", "q4")),
            int(row["nu_im"]),
            int(row["nu_re"]),
        )
        for row in reader
    ]


def spectrum_of_matrix(q_matrix: RationalMatrix, cutoff: RationalLike) -> list[SpectrumLine]:
    """Distinct nonzero eigenvalues ``<= cutoff`` of an arbitrary PD form, with nodal data."""
    vectors, values, scale = _ball_values(q_matrix, cutoff)
    groups: dict[int, list[LatticeVector]] = {}
    for row, value in zip(vectors, values):
        groups.setdefault(value, []).append(tuple(int(x) for x in row))
    lines = []
    for value in sorted(groups):
        reps = tuple(groups[value])
        lines.append(SpectrumLine(Fraction(value, scale), reps, tuple(nodal_pair(q) for q in reps)))
    return lines


def build_spectrum(sign: str, p: ParamTuple, cutoff: RationalLike) -> NodalSequence:
    """Nodal sequence of ``T^sign(p)`` up to ``cutoff`` (eigenvalues over 4 pi^2)."""
    cutoff = parse_rational(cutoff)
    q_matrix = make_Q(sign).evaluate(p)
    return NodalSequence(tuple(spectrum_of_matrix(q_matrix, cutoff)), p, sign, cutoff)


def cutoff_for_lines(p: ParamTuple, count: int, sign: str = "+") -> Fraction:
    """Smallest cutoff whose spectrum has at least ``count`` distinct eigenvalues."""
    if count < 1:
        raise ValueError("count must be >= 1")
    q_matrix = make_Q(sign).evaluate(p)
    cutoff = min(q_matrix[i][i] for i in range(len(q_matrix)))
    while True:
        lines = spectrum_of_matrix(q_matrix, cutoff)
        if len(lines) >= count:
            return lines[count - 1].eigenvalue
        cutoff *= 2


# -- comparison of T+ and T- -------------------------------------------------


@dataclass(frozen=True)
class NodalDifference:
    """First spectral position where the nodal data of T+ and T- disagree."""

    eigenvalue: Fraction
    index: int
    plus_pairs: tuple[tuple[int, int], ...]
    minus_pairs: tuple[tuple[int, int], ...]
    plus_reps: tuple[LatticeVector, ...] = field(repr=False)
    minus_reps: tuple[LatticeVector, ...] = field(repr=False)

    def pair_counts(self) -> dict[str, dict[str, int]]:
        def fmt(pairs):
            return {f"{im}/{re}": k for (im, re), k in sorted(Counter(pairs).items())}

        return {"plus": fmt(self.plus_pairs), "minus": fmt(self.minus_pairs)}

    def to_dict(self) -> dict:
        return {
            "eigenvalue": format_rational(self.eigenvalue),
            "index": self.index,
            "degeneracy": len(self.plus_reps),
            "nodal_pair_counts": self.pair_counts(),
        }


def check_isospectral(plus: NodalSequence, minus: NodalSequence) -> None:
    if plus.degeneracy_profile() != minus.degeneracy_profile():
        for k, (x, y) in enumerate(itertools.zip_longest(plus.degeneracy_profile(), minus.degeneracy_profile())):
            if x != y:
                raise IsospectralityError(f"T+ and T- differ at line {k + 1}: {x} vs {y}")


def compare_sequences(plus: NodalSequence, minus: NodalSequence) -> Optional[NodalDifference]:
    check_isospectral(plus, minus)
    for index, (lp, lm) in enumerate(zip(plus.lines, minus.lines), start=1):
        if lp.nodal_multiset() != lm.nodal_multiset():
            return NodalDifference(
                lp.eigenvalue, index, lp.nodal_pairs, lm.nodal_pairs, lp.reps, lm.reps
            )
    return None


def first_nodal_difference(p: ParamTuple, max_cutoff: RationalLike) -> Optional[NodalDifference]:
    """Lowest eigenvalue at which the nodal-pair multisets of T+ and T- differ, or None.

    Raises IsospectralityError if the two spectra disagree below ``max_cutoff``.
    """
    plus = build_spectrum("+", p, max_cutoff)
    minus = build_spectrum("-", p, max_cutoff)
    return compare_sequences(plus, minus)


def brute_force_ball(q_matrix: RationalMatrix, cutoff: RationalLike, box: int) -> list[LatticeVector]:
    """Reference filter over ``[-box, box]^n`` in pure Python (for tests and audits)."""
    cutoff = parse_rational(cutoff)
    n = len(q_matrix)
    return [
        q
        for q in itertools.product(range(-box, box + 1), repeat=n)
        if any(q) and quad_value(q_matrix, q) <= cutoff
    ]
