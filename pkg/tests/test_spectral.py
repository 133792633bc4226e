import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nodaltorus.spectral import (
    IsospectralityError,
    NodalDegeneracyError,
    NodalSequence,
    SpectrumLine,
    brute_force_ball,
    build_spectrum,
    compare_sequences,
    coordinate_bounds,
    cutoff_for_lines,
    enumerate_V_m,
    enumerate_ball,
    first_nodal_difference,
    nodal_count,
    read_spectrum_csv,
    spectrum_of_matrix,
)
from nodaltorus.torus import NotPositiveDefiniteError, ParamTuple, as_matrix, identity, make_Q

F = Fraction
P1234 = ParamTuple.of((1, 2, 3, 4))


def test_nodal_count_examples():
    assert nodal_count((1, 0, 0, 0), "im") == 2
    assert nodal_count((1, -1, 2, 0), "re") == 9
    assert nodal_count((0, 0, 0, 0), "re") == 1
    with pytest.raises(NodalDegeneracyError):
        nodal_count((0, 0, 0, 0), "im")
    with pytest.raises(ValueError):
        nodal_count((1, 0, 0, 0), "both")


@given(st.tuples(*[st.integers(-20, 20)] * 4).filter(any))
def test_re_is_im_plus_one(q):
    assert nodal_count(q, "re") == nodal_count(q, "im") + 1


def test_V_m_examples():
    unit = sorted({tuple(s * (i == k) for i in range(4)) for k in range(4) for s in (1, -1)})
    assert enumerate_V_m(1) == unit
    assert len(enumerate_V_m(2)) == 32
    with pytest.raises(ValueError):
        enumerate_V_m(0)


@pytest.mark.parametrize("m", range(1, 7))
def test_V_m_matches_box_brute_force(m):
    box = [q for q in itertools.product(range(-m, m + 1), repeat=4) if sum(map(abs, q)) == m]
    got = enumerate_V_m(m)
    assert got == box  # itertools.product is already lexicographic
    assert len(set(got)) == len(got)


def test_V_4_count():
    # brute force over [-4, 4]^4 gives 192 (closed form: sum_k 2^k C(4,k) C(3,k-1))
    assert len(enumerate_V_m(4)) == 192


def test_ball_examples():
    I4 = identity(4)
    assert sorted(enumerate_ball(I4, 1)) == enumerate_V_m(1)
    two = enumerate_ball(I4, 2)
    assert len(two) == 32
    assert sorted(two) == sorted(brute_force_ball(I4, 2, 1))
    assert two == sorted(two)
    with pytest.raises(NotPositiveDefiniteError):
        enumerate_ball(as_matrix([[1, 2], [2, 1]]), 3)
    with pytest.raises(ValueError):
        enumerate_ball(I4, 0)


def gershgorin_pd(rng, n):
    """Random symmetric diagonally dominant rational matrix and its Gershgorin lower bound."""
    off = [[F(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            off[i][j] = off[j][i] = F(rng.randint(-4, 4), rng.randint(1, 4))
    rows = []
    for i in range(n):
        radius = sum(abs(x) for x in off[i])
        margin = F(rng.randint(1, 6), rng.randint(1, 3))
        rows.append([radius + margin if j == i else off[i][j] for j in range(n)])
    Q = as_matrix(rows)
    bound = min(Q[i][i] - sum(abs(Q[i][j]) for j in range(n) if j != i) for i in range(n))
    return Q, bound


def test_ball_equals_gershgorin_box_on_random_forms():
    rng = random.Random(2024)
    for _ in range(50):
        n = rng.choice([2, 3, 4])
        Q, lam = gershgorin_pd(rng, n)
        cutoff = F(rng.randint(1, 12), rng.randint(1, 2))
        # |q_i| <= |q|_2 <= sqrt(cutoff / lambda_min)
        box = 0
        while F(box + 1) ** 2 <= cutoff / lam:
            box += 1
        got = enumerate_ball(Q, cutoff)
        assert set(got) == set(brute_force_ball(Q, cutoff, box))
        assert len(got) == len(set(got))


def test_coordinate_bounds_are_tight_for_identity():
    assert coordinate_bounds(identity(4), F(9)) == [3, 3, 3, 3]
    assert coordinate_bounds(identity(2), F(8)) == [3, 3]


def test_ball_postcondition_rechecked():
    from nodaltorus.torus import quad_value

    Q = make_Q("-").evaluate(P1234)
    for q in enumerate_ball(Q, 7):
        assert 0 < quad_value(Q, q) <= 7


def test_first_line_at_equal_parameters():
    seq = build_spectrum("+", ParamTuple.of((1, 1, 1, 1)), 3)
    # Q+(1,1,1,1) is the identity, so brute force over the unit box settles line 1
    brute = Counter(sum(x * x for x in q) for q in itertools.product(range(-1, 2), repeat=4) if any(q))
    assert seq.lines[0].eigenvalue == 1
    assert seq.lines[0].degeneracy == brute[1] == 8
    assert set(seq.lines[0].reps) == set(enumerate_V_m(1))


def test_spectrum_matches_brute_force(brute_spectrum):
    for sign in "+-":
        seq = build_spectrum(sign, P1234, 8)
        brute = brute_spectrum(make_Q(sign).evaluate(P1234), 8)
        assert seq.eigenvalues() == sorted(brute)
        for line in seq.lines:
            assert Counter(im // 2 for im, _ in line.nodal_pairs) == brute[line.eigenvalue]


@pytest.mark.parametrize("p", [(1, 2, 3, 4), (2, 3, 5, 7), (F(1, 3), 5, F(7, 2), 1)])
def test_line_invariants_and_completeness(p):
    p = ParamTuple.of(p)
    seq = build_spectrum("+", p, 9)
    for line in seq.lines:
        line.check()
        assert Counter(line.nodal_pairs) == Counter(
            (nodal_count(q, "im"), nodal_count(q, "re")) for q in line.reps
        )
    assert seq.total_vectors() == len(enumerate_ball(make_Q("+").evaluate(p), 9))
    values = seq.eigenvalues()
    assert values == sorted(set(values)) and values[0] > 0


def test_isospectral_at_distinct_parameters():
    plus = build_spectrum("+", P1234, F(40, 3))
    minus = build_spectrum("-", P1234, F(40, 3))
    assert Counter(plus.degeneracy_profile()) == Counter(minus.degeneracy_profile())


def test_first_difference_matches_brute_force(brute_spectrum):
    for params in [(1, 2, 3, 4), (2, 3, 5, 7)]:
        p = ParamTuple.of(params)
        cutoff = 23
        plus = brute_spectrum(make_Q("+").evaluate(p), cutoff)
        minus = brute_spectrum(make_Q("-").evaluate(p), cutoff)
        assert sorted(plus) == sorted(minus)
        expected = next(
            (i + 1, lam) for i, lam in enumerate(sorted(plus)) if plus[lam] != minus[lam]
        )
        diff = first_nodal_difference(p, cutoff)
        assert (diff.index, diff.eigenvalue) == expected


def test_first_difference_frozen_values():
    # frozen from test_first_difference_matches_brute_force
    d = first_nodal_difference(P1234, 12)
    assert (d.index, d.eigenvalue) == (37, 12)
    assert d.pair_counts() == {"plus": {"8/9": 14, "12/13": 4}, "minus": {"8/9": 16, "12/13": 2}}


def test_first_difference_absent_cases():
    assert first_nodal_difference(P1234, 1) is None  # below the first eigenvalue 3/2
    assert first_nodal_difference(P1234, F(23, 2)) is None
    assert first_nodal_difference(ParamTuple.of((1, 1, 2, 3)), 30) is None


def test_isospectrality_violation_is_raised():
    p = P1234
    plus = build_spectrum("+", p, 6)
    other = build_spectrum("+", ParamTuple.of((1, 2, 3, 5)), 6)
    fake = NodalSequence(other.lines, p, "-", plus.cutoff)
    with pytest.raises(IsospectralityError):
        compare_sequences(plus, fake)


@pytest.mark.parametrize(
    "params", [(1, 2, 3, 4), (2, 3, 5, 7), (F(1, 2), 1, F(3, 2), 2), (1, 1, 2, 3), (2, 3, 3, 5)]
)
def test_pair_and_flat_readings_agree(params):
    p = ParamTuple.of(params)
    plus = build_spectrum("+", p, 25)
    minus = build_spectrum("-", p, 25)
    by_pairs = compare_sequences(plus, minus)
    by_flat = next(
        (i for i, (x, y) in enumerate(zip(plus.flat_counts(), minus.flat_counts()), start=1) if x != y), None
    )
    assert (by_pairs.index if by_pairs else None) == by_flat


def test_cutoff_for_lines():
    cutoff = cutoff_for_lines(P1234, 30)
    assert len(build_spectrum("+", P1234, cutoff).lines) == 30
    assert len(build_spectrum("+", P1234, cutoff - F(1, 1000)).lines) == 29


def test_serialization_round_trips():
    seq = build_spectrum("-", P1234, 5)
    assert NodalSequence.from_dict(seq.to_dict()) == seq
    rows = read_spectrum_csv(seq.to_csv())
    assert len(rows) == seq.total_vectors()
    assert [(lam, q) for lam, q, _, _ in rows] == [(l.eigenvalue, q) for l in seq.lines for q in l.reps]
    with pytest.raises(ValueError):
        read_spectrum_csv("eigenvalue,q1\n1,2\n")


def test_output_is_deterministic_under_threads(monkeypatch):
    monkeypatch.setenv("NODALTORUS_THREADS", "1")
    single = build_spectrum("+", P1234, 15)
    monkeypatch.setenv("NODALTORUS_THREADS", "4")
    assert build_spectrum("+", P1234, 15) == single


def test_spectrum_of_generic_matrix():
    lines = spectrum_of_matrix(as_matrix([[1, 0], [0, 2]]), 3)
    assert [(l.eigenvalue, l.degeneracy) for l in lines] == [(1, 2), (2, 2), (3, 4)]
