import itertools
from collections import Counter
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from nodaltorus.torus import quad_value

ROOT = Path(__file__).resolve().parent.parent
SCHEMAS = ROOT / "schemas"
GOLDEN = Path(__file__).resolve().parent / "golden"

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def brute_force_spectrum(q_matrix, cutoff):
    """Eigenvalue -> Counter of |q|_1 over a box from the float smallest eigenvalue.

    Independent of the library's dual-diagonal bound; the float only sizes the
    box (with margin), every kept value is exact.
    """
    cutoff = Fraction(cutoff)
    lam_min = float(np.linalg.eigvalsh(np.array(q_matrix, dtype=float)).min())
    box = int((float(cutoff) / (lam_min * 0.99)) ** 0.5) + 1
    out = {}
    for q in itertools.product(range(-box, box + 1), repeat=len(q_matrix)):
        if not any(q):
            continue
        v = quad_value(q_matrix, q)
        if v <= cutoff:
            out.setdefault(v, Counter())[sum(map(abs, q))] += 1
    return out


@pytest.fixture
def brute_spectrum():
    return brute_force_spectrum
