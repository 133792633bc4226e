"""Independent nodal-domain counters for ``cos(2 pi q.y)`` and ``sin(2 pi q.y)``.

Both count in the open unit cube with no identification across its faces.

* :func:`slab_count` uses that the zero set is a family of parallel
  hyperplanes ``q.y = level``, so the domains are slabs.
* :func:`floodfill_count` samples the sign at cell centres of an ``N^n`` grid
  and counts face-connected components of equal sign.  Signs come from exact
  integer arithmetic on ``q.y``; no trigonometry is evaluated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numba
import numpy as np

from .exact import format_rational
from .spectral import PARTS, enumerate_V_m, l1_norm, nodal_count, worker_count, write_csv

# zero levels of q.y: sin vanishes at k/2, cos at 1/4 + k/2
_LEVEL_OFFSET = {"im": Fraction(0), "re": Fraction(1, 4)}
MAX_RESOLUTION_4D = 64


class GridDegeneracyError(ValueError):
    """A cell centre lies exactly on the zero set."""


def _check_q(q: Sequence[int], part: str) -> tuple[int, ...]:
    if part not in PARTS:
        raise ValueError(f"part must be 're' or 'im', got {part!r}")
    q = tuple(int(x) for x in q)
    if not any(q):
        raise ValueError("q must be nonzero")
    return q


def slab_count(q: Sequence[int], part: str) -> int:
    """Slabs cut from the open cube by the zero hyperplanes of the chosen part."""
    q = _check_q(q, part)
    lo = sum(min(x, 0) for x in q)
    hi = sum(max(x, 0) for x in q)
    off = _LEVEL_OFFSET[part]
    # levels off + k/2 with lo < level < hi
    k_min = math.floor(2 * (lo - off)) + 1
    k_max = math.ceil(2 * (hi - off)) - 1
    return max(0, k_max - k_min + 1) + 1


def drop_zero_coordinates(q: Sequence[int]) -> tuple[int, ...]:
    """Restrict to the nonzero coordinates; the function is constant along the others."""
    return tuple(int(x) for x in q if x)


@dataclass(frozen=True)
class GridSpec:
    """``resolution`` cells per axis; axis ``i`` samples at ``(k + offsets[i]) / resolution``."""

    n: int
    resolution: int
    offsets: tuple[Fraction, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        offsets = self.offsets or (Fraction(1, 2),) * self.n
        offsets = tuple(Fraction(o) for o in offsets)
        if len(offsets) != self.n:
            raise ValueError(f"need {self.n} offsets, got {len(offsets)}")
        if any(not 0 < o < 1 for o in offsets):
            raise ValueError("offsets must lie strictly between 0 and 1")
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def uniform(cls, n: int, resolution: int, offset: Fraction = Fraction(1, 2)) -> "GridSpec":
        return cls(n, resolution, (Fraction(offset),) * n)

    @classmethod
    def generic(cls, n: int, resolution: int, m: int) -> "GridSpec":
        """Per-axis offsets that keep every ``q`` with ``max |q_i| <= m`` off its zero set.

        Requires ``resolution`` divisible by 4 for the guarantee.  The shifts
        ``(2m+1)^i / (4(S+1))`` give ``0 < |sum q_i shift_i| < 1/4``.
        """
        base = 2 * m + 1
        span = (base**n - 1) // 2
        shifts = [Fraction(base**i, 4 * (span + 1)) for i in range(n)]
        return cls(n, resolution, tuple(Fraction(1, 2) + s for s in shifts))

    def describe(self) -> str:
        if len(set(self.offsets)) == 1:
            return format_rational(self.offsets[0])
        return "generic"

    @property
    def cells(self) -> int:
        return self.resolution**self.n


def default_resolution(m: int, n: int = 4) -> int:
    """``8 m`` clamped below at 16 (and above at 64 in four dimensions)."""
    res = max(16, 8 * m)
    if n >= 4 and res > MAX_RESOLUTION_4D:
        raise ValueError(f"|q|_1 = {m} needs N = {res} > {MAX_RESOLUTION_4D} in dimension {n}")
    return res


def sign_grid(q: Sequence[int], part: str, grid: GridSpec) -> np.ndarray:
    """Exact sign (-1, 0, 1) of the chosen part at every cell centre, shape ``(N,)*n``."""
    q = _check_q(q, part)
    if len(q) != grid.n:
        raise ValueError(f"q has {len(q)} coordinates, grid has dimension {grid.n}")
    N = grid.resolution
    den = math.lcm(*(o.denominator for o in grid.offsets))
    # T = 4*den*N*(q.y); one period of q.y is P units of T
    period = 4 * den * N
    const = sum(4 * den * x * o for x, o in zip(q, grid.offsets))
    assert const.denominator == 1
    total = np.full((1,) * grid.n, int(const), dtype=np.int64)
    k = np.arange(N, dtype=np.int64)
    for axis, x in enumerate(q):
        shape = [1] * grid.n
        shape[axis] = N
        total = total + (4 * den * x * k).reshape(shape)
    if part == "re":
        total = total + den * N
    r = np.mod(total, period)
    half = period // 2
    return np.where((r == 0) | (r == half), 0, np.where(r < half, 1, -1)).astype(np.int8)


@numba.njit(cache=False, nogil=True)
def _count_components(signs, shape, strides):
    total = signs.size
    visited = np.zeros(total, dtype=np.uint8)
    stack = np.empty(total, dtype=np.int64)
    ndim = shape.size
    count = 0
    for start in range(total):
        if visited[start]:
            continue
        count += 1
        value = signs[start]
        visited[start] = 1
        top = 0
        stack[top] = start
        top += 1
        while top > 0:
            top -= 1
            idx = stack[top]
            for d in range(ndim):
                coord = (idx // strides[d]) % shape[d]
                if coord > 0:
                    nb = idx - strides[d]
                    if not visited[nb] and signs[nb] == value:
                        visited[nb] = 1
                        stack[top] = nb
                        top += 1
                if coord < shape[d] - 1:
                    nb = idx + strides[d]
                    if not visited[nb] and signs[nb] == value:
                        visited[nb] = 1
                        stack[top] = nb
                        top += 1
    return count


def count_sign_components(signs: np.ndarray) -> int:
    """Face-connected components of equal nonzero value, no wrap-around."""
    if signs.size == 0:
        return 0
    flat = np.ascontiguousarray(signs, dtype=np.int8).ravel()
    shape = np.array(signs.shape, dtype=np.int64)
    strides = np.array([math.prod(signs.shape[d + 1:]) for d in range(signs.ndim)], dtype=np.int64)
    return int(_count_components(flat, shape, strides))


def floodfill_count(q: Sequence[int], part: str, grid: GridSpec) -> int:
    """Nodal domains found by flood fill on the sign grid.

    Raises GridDegeneracyError if a cell centre is a zero, and ValueError if
    the resolution is below ``8 * sum |q_i|``.
    """
    q = _check_q(q, part)
    if grid.resolution < 8 * l1_norm(q):
        raise ValueError(f"resolution {grid.resolution} below 8*|q|_1 = {8 * l1_norm(q)}")
    signs = sign_grid(q, part, grid)
    if not signs.all():
        raise GridDegeneracyError(f"a cell centre of {grid} lies on the zero set of q={q} ({part})")
    return count_sign_components(signs)


def candidate_grids(q: Sequence[int], resolution: int) -> list[GridSpec]:
    """Centred grid, then two small uniform shifts, then per-axis shifts."""
    n = len(q)
    shift = Fraction(1, 4 * resolution)
    return [
        GridSpec.uniform(n, resolution),
        GridSpec.uniform(n, resolution, Fraction(1, 2) + shift),
        GridSpec.uniform(n, resolution, Fraction(1, 2) - shift),
        GridSpec.generic(n, resolution, max(abs(int(x)) for x in q)),
    ]


def floodfill_count_auto(
    q: Sequence[int], part: str, resolution: Optional[int] = None
) -> tuple[int, GridSpec]:
    """Flood-fill count, retrying offsets until the grid avoids the zero set."""
    q = _check_q(q, part)
    N = resolution if resolution is not None else default_resolution(l1_norm(q), len(q))
    last: Optional[Exception] = None
    for grid in candidate_grids(q, N):
        try:
            return floodfill_count(q, part, grid), grid
        except GridDegeneracyError as exc:
            last = exc
    raise GridDegeneracyError(f"every candidate grid is degenerate for q={q}") from last


@dataclass(frozen=True)
class ValidationRow:
    q: tuple[int, ...]
    part: str
    formula: int
    slab: int
    floodfill: int
    resolution: int
    offset: str

    @property
    def ok(self) -> bool:
        return self.formula == self.slab == self.floodfill

    def to_dict(self) -> dict:
        return {
            "q": list(self.q),
            "part": self.part,
            "formula": self.formula,
            "slab": self.slab,
            "floodfill": self.floodfill,
            "resolution": self.resolution,
            "offset": self.offset,
            "verdict": "ok" if self.ok else "MISMATCH",
        }


@dataclass(frozen=True)
class FormulaValidation:
    max_m: int
    dimension: int
    rows: tuple[ValidationRow, ...]

    @property
    def mismatches(self) -> tuple[ValidationRow, ...]:
        return tuple(r for r in self.rows if not r.ok)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {
            "max_m": self.max_m,
            "dimension": self.dimension,
            "checked": len(self.rows),
            "mismatches": len(self.mismatches),
            "verdict": "PASS" if self.passed else "FAIL",
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_csv(self) -> str:
        fields = ["q", "part", "formula", "slab", "floodfill", "resolution", "offset", "verdict"]
        rows = []
        for r in self.rows:
            row = r.to_dict()
            row["q"] = " ".join(str(x) for x in r.q)
            rows.append(row)
        return write_csv(rows, fields)


def sign_representatives(max_m: int, n: int = 4) -> list[tuple[int, ...]]:
    """One of each pair ``{q, -q}`` (first nonzero entry positive) with ``1 <= |q|_1 <= max_m``."""
    reps = []
    for m in range(1, max_m + 1):
        for q in enumerate_V_m(m, n):
            if next(x for x in q if x) > 0:
                reps.append(q)
    return reps


def validate_formula(
    max_m: int,
    grid_policy: Callable[[int, int], int] = default_resolution,
    formula: Callable[[Sequence[int], str], int] = nodal_count,
    dimension: int = 4,
) -> FormulaValidation:
    """Compare ``formula`` with both counters for every ``q`` up to sign, both parts."""
    if max_m < 1:
        raise ValueError("max_m must be >= 1")
    jobs = [(q, part) for q in sign_representatives(max_m, dimension) for part in PARTS]

    def run(job):
        q, part = job
        N = grid_policy(l1_norm(q), dimension)
        flood, grid = floodfill_count_auto(q, part, N)
        return ValidationRow(q, part, formula(q, part), slab_count(q, part), flood, N, grid.describe())

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(job) for job in jobs]
    return FormulaValidation(max_m, dimension, tuple(rows))


def nodal_count_without_plus_one(q: Sequence[int], part: str) -> int:
    """Deliberately wrong formula (real part loses its ``+1``) for mutation checks."""
    value = nodal_count(q, part)
    return value - 1 if part == "re" else value
