"""Exact rational scalars and linear forms in the four torus parameters.

Scalars are :class:`fractions.Fraction`.  A :class:`LinearForm` stores the
coefficient tuple ``(c_a, c_b, c_c, c_d)`` of ``c_a*a + c_b*b + c_c*c + c_d*d``;
that tuple *is* the canonical form, so equality, hashing and ordering all act
on it directly.

Eigenvalues of a flat torus carry a global factor ``4*pi**2``.  It never
enters a computation: every form here is an eigenvalue divided by
:data:`SPECTRAL_PREFACTOR`, which preserves order and equality.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

#: Symbolic multiplier dropped from every eigenvalue (display only).
SPECTRAL_PREFACTOR = "4*pi^2"

VARIABLES = ("a", "b", "c", "d")

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")
_TERM_RE = re.compile(r"\s*([+-])?\s*(\d+(?:\s*/\s*\d+)?)?\s*\*?\s*([abcd])\s*")


def parse_rational(text: RationalLike) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; ints and Fractions pass through.

    Decimal and exponent notation are rejected: machine input is exact only.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise TypeError("bool is not a rational")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise TypeError(f"cannot parse {type(text).__name__} as a rational")
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational literal: {text!r}")
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return Fraction(int(m.group(1)), den)


def format_rational(r: Fraction) -> str:
    """Canonical text: ``"p/q"`` in lowest terms, or ``"p"`` for integers."""
    r = Fraction(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


@total_ordering
@dataclass(frozen=True)
class LinearForm:
    """``c_a*a + c_b*b + c_c*c + c_d*d`` with exact rational coefficients."""

    coeffs: tuple[Fraction, Fraction, Fraction, Fraction]

    def __post_init__(self) -> None:
        if len(self.coeffs) != 4:
            raise ValueError(f"a linear form needs 4 coefficients, got {len(self.coeffs)}")
        object.__setattr__(self, "coeffs", tuple(parse_rational(c) for c in self.coeffs))

    @classmethod
    def of(cls, *coeffs: RationalLike, scale: RationalLike = 1) -> "LinearForm":
        """``LinearForm.of(9, 1, 1, 1, scale=Fraction(1, 12))``."""
        s = parse_rational(scale)
        return cls(tuple(s * parse_rational(c) for c in coeffs))

    @classmethod
    def zero(cls) -> "LinearForm":
        return cls((Fraction(0),) * 4)

    @classmethod
    def variable(cls, name: str) -> "LinearForm":
        coeffs = [Fraction(0)] * 4
        coeffs[VARIABLES.index(name)] = Fraction(1)
        return cls(tuple(coeffs))

    def __add__(self, other: "LinearForm") -> "LinearForm":
        if not isinstance(other, LinearForm):
            return NotImplemented
        return lf_add(self, other)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        if not isinstance(other, LinearForm):
            return NotImplemented
        return lf_add(self, lf_scale(Fraction(-1), other))

    def __neg__(self) -> "LinearForm":
        return lf_scale(Fraction(-1), self)

    def __rmul__(self, r: RationalLike) -> "LinearForm":
        if isinstance(r, LinearForm):
            return NotImplemented
        return lf_scale(parse_rational(r), self)

    def __lt__(self, other: "LinearForm") -> bool:
        if not isinstance(other, LinearForm):
            return NotImplemented
        return lf_compare_total(self, other) < 0

    def __str__(self) -> str:
        return format_linear_form(self)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def coefficient_sum(self) -> Fraction:
        return sum(self.coeffs, Fraction(0))

    def content(self) -> Fraction:
        """Positive rational g with ``self = g * (primitive integer vector)``; 0 for the zero form."""
        if self.is_zero():
            return Fraction(0)
        num = math.gcd(*(c.numerator for c in self.coeffs))
        den = math.lcm(*(c.denominator for c in self.coeffs))
        return Fraction(num, den)

    def primitive(self) -> tuple[int, int, int, int]:
        """Integer coefficient vector obtained by dividing out :meth:`content`."""
        g = self.content()
        if g == 0:
            return (0, 0, 0, 0)
        out = tuple(c / g for c in self.coeffs)
        return tuple(int(c) for c in out)


def lf_add(x: LinearForm, y: LinearForm) -> LinearForm:
    return LinearForm(tuple(p + q for p, q in zip(x.coeffs, y.coeffs)))


def lf_scale(r: Fraction, x: LinearForm) -> LinearForm:
    r = parse_rational(r)
    return LinearForm(tuple(r * c for c in x.coeffs))


def lf_eval(x: LinearForm, p: Sequence[RationalLike]) -> Fraction:
    """Exact value of ``x`` at the parameter tuple ``p = (a, b, c, d)``.

    Raises ValueError unless all four entries are strictly positive.
    """
    values = tuple(parse_rational(v) for v in p)
    if len(values) != 4:
        raise ValueError(f"parameter tuple needs 4 entries, got {len(values)}")
    if any(v <= 0 for v in values):
        raise ValueError(f"parameters must be positive, got {tuple(map(format_rational, values))}")
    return sum((c * v for c, v in zip(x.coeffs, values)), Fraction(0))


def lf_compare_total(x: LinearForm, y: LinearForm) -> int:
    """Lexicographic comparison of coefficient tuples: -1, 0 or 1."""
    if x.coeffs == y.coeffs:
        return 0
    return -1 if x.coeffs < y.coeffs else 1


def format_linear_form(x: LinearForm) -> str:
    """Canonical string, e.g. ``"3/4*a - 1/12*b + 1*d"``; ``"0"`` for the zero form."""
    parts: list[str] = []
    for c, name in zip(x.coeffs, VARIABLES):
        if c == 0:
            continue
        mag = format_rational(abs(c))
        if not parts:
            parts.append(f"-{mag}*{name}" if c < 0 else f"{mag}*{name}")
        else:
            parts.append(f"{'-' if c < 0 else '+'} {mag}*{name}")
    return " ".join(parts) if parts else "0"


def parse_linear_form(text: str) -> LinearForm:
    """Inverse of :func:`format_linear_form`.

    Also accepts the implicit style ``"4a + 25b + c"`` and an optional
    parenthesised prefactor such as ``"(1/3)(4a + 25b + c)"``.
    """
    body = text.strip()
    scale = Fraction(1)
    m = re.match(r"^\(\s*([+-]?\d+(?:\s*/\s*\d+)?)\s*\)\s*\((.*)\)$", body)
    if m:
        scale = parse_rational(m.group(1).replace(" ", ""))
        body = m.group(2)
    elif body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    if body.strip() == "0":
        return LinearForm.zero()
    coeffs = [Fraction(0)] * 4
    pos = 0
    seen_term = False
    while pos < len(body):
        if not body[pos:].strip():
            break
        m = _TERM_RE.match(body, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse linear form {text!r} at offset {pos}")
        sign, mag, name = m.groups()
        if seen_term and sign is None:
            raise ValueError(f"missing operator before term {name!r} in {text!r}")
        value = parse_rational(mag.replace(" ", "")) if mag else Fraction(1)
        if sign == "-":
            value = -value
        coeffs[VARIABLES.index(name)] += value
        seen_term = True
        pos = m.end()
    if not seen_term:
        raise ValueError(f"empty linear form: {text!r}")
    return LinearForm(tuple(scale * c for c in coeffs))


def display_linear_form(x: LinearForm, prefactor: bool = False) -> str:
    """Human style with the content factored out: ``"(1/3)(4a + 25b + c)"``.

    With ``prefactor=True`` the dropped spectral constant is shown too,
    ``"(4pi^2/3)(4a + 25b + c)"``.
    """
    if x.is_zero():
        return "0"
    g = x.content()
    terms: list[str] = []
    for k, name in zip(x.primitive(), VARIABLES):
        if k == 0:
            continue
        mag = "" if abs(k) == 1 else str(abs(k))
        if not terms:
            terms.append(f"{'-' if k < 0 else ''}{mag}{name}")
        else:
            terms.append(f"{'-' if k < 0 else '+'} {mag}{name}")
    inner = " ".join(terms)
    if prefactor:
        if g.numerator == 1:
            lead = "4pi^2" if g.denominator == 1 else f"4pi^2/{g.denominator}"
        else:
            lead = f"4pi^2*{format_rational(g)}"
        return f"({lead})({inner})"
    if g == 1:
        return f"({inner})"
    return f"({format_rational(g)})({inner})"


def sorted_forms(forms: Iterable[LinearForm]) -> tuple[LinearForm, ...]:
    """Deduplicated forms in the canonical total order."""
    return tuple(sorted(set(forms)))
