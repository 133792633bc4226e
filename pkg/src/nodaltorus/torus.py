"""Quadratic forms of flat tori.

A flat torus ``R^n / A Z^n`` is encoded by ``Q = (A^T A)^{-1}``; its Laplace
eigenvalues are ``4 pi^2 q^T Q q`` for integer ``q``.  The Conway-Sloane pair
``Q+`` / ``Q- = U^T Q+ U`` is kept symbolically as 4x4 matrices of
:class:`~nodaltorus.exact.LinearForm`.

Rational matrices are plain tuples of tuples of :class:`Fraction`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from typing import Sequence

from .exact import (
    LinearForm,
    RationalLike,
    format_linear_form,
    format_rational,
    lf_add,
    lf_eval,
    lf_scale,
    parse_linear_form,
    parse_rational,
)

RationalMatrix = tuple[tuple[Fraction, ...], ...]
LatticeVector = tuple[int, ...]


class SingularMatrixError(ValueError):
    pass


class NotPositiveDefiniteError(ValueError):
    pass


@dataclass(frozen=True)
class ParamTuple:
    """Strictly positive rational parameters ``(a, b, c, d)``."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self) -> None:
        for name in "abcd":
            value = parse_rational(getattr(self, name))
            if value <= 0:
                raise ValueError(f"parameter {name} must be positive, got {format_rational(value)}")
            object.__setattr__(self, name, value)

    @classmethod
    def of(cls, values: Sequence[RationalLike]) -> "ParamTuple":
        if len(values) != 4:
            raise ValueError(f"expected 4 parameters, got {len(values)}")
        return cls(*(parse_rational(v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "ParamTuple":
        """From ``"1,2,3,4"`` or ``"1/2,1,3/2,2"``."""
        return cls.of([part for part in text.split(",")])

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def all_distinct(self) -> bool:
        return len(set(self.as_tuple())) == 4

    def to_strings(self) -> list[str]:
        return [format_rational(v) for v in self.as_tuple()]

    def __iter__(self):
        return iter(self.as_tuple())

    def __str__(self) -> str:
        return ",".join(self.to_strings())


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric 4x4 matrix with linear-form entries."""

    entries: tuple[tuple[LinearForm, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise ValueError("matrix must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if self.entries[i][j] != self.entries[j][i]:
                    raise ValueError(f"matrix not symmetric at ({i + 1},{j + 1})")

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> LinearForm:
        i, j = ij
        return self.entries[i][j]

    def evaluate(self, p: ParamTuple | Sequence[RationalLike]) -> RationalMatrix:
        values = tuple(p)
        return tuple(tuple(lf_eval(e, values) for e in row) for row in self.entries)

    def to_json(self) -> list[list[str]]:
        return [[format_linear_form(e) for e in row] for row in self.entries]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str]]) -> "SymMatrix":
        return cls(tuple(tuple(parse_linear_form(s) for s in row) for row in data))


# -- rational matrix helpers -------------------------------------------------


def as_matrix(rows: Sequence[Sequence[RationalLike]]) -> RationalMatrix:
    out = tuple(tuple(parse_rational(x) for x in row) for row in rows)
    if any(len(row) != len(out) for row in out):
        raise ValueError("matrix must be square")
    return out


def identity(n: int) -> RationalMatrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def transpose(m: RationalMatrix) -> RationalMatrix:
    return tuple(zip(*m))


def matmul(x: RationalMatrix, y: RationalMatrix) -> RationalMatrix:
    cols = transpose(y)
    return tuple(tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols) for row in x)


def matvec(m: RationalMatrix, v: Sequence[RationalLike]) -> tuple[Fraction, ...]:
    return tuple(sum((a * Fraction(b) for a, b in zip(row, v)), Fraction(0)) for row in m)


def is_symmetric(m: RationalMatrix) -> bool:
    return all(m[i][j] == m[j][i] for i in range(len(m)) for j in range(i))


def determinant(m: RationalMatrix) -> Fraction:
    """Exact determinant by Bareiss elimination on the integer-scaled matrix."""
    n = len(m)
    if n == 0:
        return Fraction(1)
    scale, a = _integer_scaled(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return Fraction(sign * a[n - 1][n - 1], scale**n)


def leading_principal_minors(m: RationalMatrix) -> list[Fraction]:
    return [determinant(tuple(row[:k] for row in m[:k])) for k in range(1, len(m) + 1)]


def is_positive_definite(m: RationalMatrix) -> bool:
    """Sylvester's criterion on a symmetric rational matrix."""
    return is_symmetric(m) and all(x > 0 for x in leading_principal_minors(m))


def _integer_scaled(m: RationalMatrix) -> tuple[int, list[list[int]]]:
    scale = math.lcm(*(x.denominator for row in m for x in row))
    return scale, [[int(x * scale) for x in row] for row in m]


def inverse_exact(g: RationalMatrix) -> RationalMatrix:
    """Exact inverse by fraction-free Gauss-Jordan elimination.

    The matrix is scaled to integers and reduced alongside the identity;
    every intermediate division is exact.  Raises SingularMatrixError.
    """
    n = len(g)
    scale, a = _integer_scaled(g)
    for k, row in enumerate(a):
        row.extend(int(i == k) for i in range(n))
    prev = 1
    for k in range(n):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                raise SingularMatrixError("matrix is singular")
            a[k], a[swap] = a[swap], a[k]
        pivot = a[k][k]
        for i in range(n):
            if i == k:
                continue
            factor = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(2 * n):
                num = pivot * row_i[j] - factor * row_k[j]
                q, r = divmod(num, prev)
                assert r == 0, "fraction-free step lost exactness"
                row_i[j] = q
        prev = pivot
    # left block is now a multiple of the identity
    return tuple(tuple(Fraction(a[i][n + j] * scale, a[i][i]) for j in range(n)) for i in range(n))


def gram_from_generators(generators: RationalMatrix) -> RationalMatrix:
    """``G = A^T A`` for a generator matrix whose columns span the lattice."""
    if determinant(generators) == 0:
        raise SingularMatrixError("generator matrix is singular")
    return matmul(transpose(generators), generators)


def quadratic_matrix_from_generators(generators: RationalMatrix) -> RationalMatrix:
    """``Q = (A^T A)^{-1}``, the matrix whose form gives the spectrum."""
    return inverse_exact(gram_from_generators(generators))


# -- the Conway-Sloane family ------------------------------------------------

_Q_PLUS_ROWS = (
    ((9, 1, 1, 1), (3, -3, -1, 1), (3, 1, -3, -1), (3, -1, 1, -3)),
    ((3, -3, -1, 1), (1, 9, 1, 1), (1, -3, 3, -1), (1, 3, -1, -3)),
    ((3, 1, -3, -1), (1, -3, 3, -1), (1, 1, 9, 1), (1, -1, -3, 3)),
    ((3, -1, 1, -3), (1, 3, -1, -3), (1, -1, -3, 3), (1, 1, 1, 9)),
)

_U_ROWS = (
    (-1, 1, 1, 1),
    (-1, -1, -1, 1),
    (-1, 1, -1, -1),
    (-1, -1, 1, -1),
)


@cache
def make_Q_plus() -> SymMatrix:
    twelfth = Fraction(1, 12)
    return SymMatrix(
        tuple(tuple(LinearForm.of(*coeffs, scale=twelfth) for coeffs in row) for row in _Q_PLUS_ROWS)
    )


@cache
def make_U() -> RationalMatrix:
    return tuple(tuple(Fraction(x, 2) for x in row) for row in _U_ROWS)


def congruence(q: SymMatrix, u: RationalMatrix) -> SymMatrix:
    """``U^T Q U`` computed entrywise on linear forms."""
    n = q.size
    rows = []
    for r in range(n):
        row = []
        for s in range(n):
            acc = LinearForm.zero()
            for i in range(n):
                for j in range(n):
                    w = u[i][r] * u[j][s]
                    if w:
                        acc = lf_add(acc, lf_scale(w, q.entries[i][j]))
            row.append(acc)
        rows.append(tuple(row))
    return SymMatrix(tuple(rows))


@cache
def make_Q_minus() -> SymMatrix:
    return congruence(make_Q_plus(), make_U())


def make_Q(sign: str) -> SymMatrix:
    if sign == "+":
        return make_Q_plus()
    if sign == "-":
        return make_Q_minus()
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def quad_form(q_matrix: SymMatrix, q: Sequence[int]) -> LinearForm:
    """Symbolic ``q^T Q q`` (the eigenvalue over 4 pi^2)."""
    n = q_matrix.size
    if len(q) != n:
        raise ValueError(f"dimension mismatch: matrix is {n}x{n}, vector has {len(q)} entries")
    totals = [Fraction(0)] * 4
    for i in range(n):
        if not q[i]:
            continue
        for j in range(n):
            w = q[i] * q[j]
            if w:
                for k, c in enumerate(q_matrix.entries[i][j].coeffs):
                    totals[k] += w * c
    return LinearForm(tuple(totals))


def quad_value(m: RationalMatrix, q: Sequence[RationalLike]) -> Fraction:
    """Exact ``q^T M q`` for a rational matrix."""
    if len(q) != len(m):
        raise ValueError(f"dimension mismatch: matrix is {len(m)}x{len(m)}, vector has {len(q)} entries")
    return sum((Fraction(x) * y for x, y in zip(q, matvec(m, q))), Fraction(0))


# -- serialization -----------------------------------------------------------


def matrix_to_json(m: RationalMatrix) -> list[list[str]]:
    return [[format_rational(x) for x in row] for row in m]


def matrix_from_json(data: Sequence[Sequence[str]]) -> RationalMatrix:
    return as_matrix(data)


def dumps_matrix(m: RationalMatrix | SymMatrix) -> str:
    data = m.to_json() if isinstance(m, SymMatrix) else matrix_to_json(m)
    return json.dumps(data)
