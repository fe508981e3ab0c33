import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import freiman_quadruples
from sumprod.dist import Dist, entropy_of, shannon
from sumprod.errors import BudgetError, DomainError, PreconditionError, UsageError
from sumprod.field import FieldSpec
from sumprod.progressions import (CosetProgression, FreimanBoxMap, GapSpec, enumerate_progression,
                                  freiman_box_map, is_freiman_isomorphism, is_proper, is_t_proper,
                                  productset, sumset, symmetrize, vector_add)

Q, F3, F5, F7, F11, F13, F101, F4099 = (FieldSpec.rationals(),
                                         *(FieldSpec(p) for p in (3, 5, 7, 11, 13, 101, 4099)))


def test_sumset_examples():
    assert sumset(F5, {0, 1}, {0, 1}) == {0, 1, 2}
    assert sumset(Q, {0, 1, 3}, {0, 1, 3}) == {0, 1, 2, 3, 4, 6}
    A = {Fraction(1, 2), 3, 7}
    assert productset(Q, A, {1}) == A


def test_enumerate_examples():
    s, n = enumerate_progression(GapSpec(F7, 0, (1,), (5,)))
    assert s == {0, 1, 2, 3, 4} and n == 5
    s, n = enumerate_progression(GapSpec(F7, 0, (3,), (5,)))
    assert s == {0, 3, 6, 2, 5} and n == 5


def test_improper_example_by_brute_force():
    # 2n mod 5 for n in 0..4 visits all five residues, so this one is proper
    P = GapSpec(F5, 0, (2,), (5,))
    assert len({(2 * n) % 5 for n in range(5)}) == 5
    assert is_proper(P)
    assert not is_proper(GapSpec(F5, 0, (2,), (6,)))
    assert not is_proper(GapSpec(F7, 0, (1, 2), (3, 2)))


def test_t_proper_examples():
    P = lambda f: GapSpec(f, 0, (1,), (2,), symmetric=True)
    assert is_t_proper(P(Q), 3)
    assert is_t_proper(P(F13), 3)
    assert not is_t_proper(P(F11), 3)
    assert is_t_proper(P(F11), 2)


def test_symmetrize_examples():
    res = symmetrize(GapSpec(Q, 0, (1,), (5,)))
    assert res.shift == 2 and res.progression.symmetric
    assert res.progression.rank <= 2
    out, _ = enumerate_progression(res.progression)
    assert set(range(5)) <= out
    assert res.ratio <= 3

    sym = GapSpec(F101, 0, (1, 10), (2, 1), symmetric=True)
    r2 = symmetrize(sym)
    assert r2.progression.rank <= 3
    assert enumerate_progression(sym)[0] <= enumerate_progression(r2.progression)[0]

    r3 = symmetrize(GapSpec(Q, 3, (2,), (4,)))
    assert r3.padded.N == (5,)
    assert {3, 5, 7, 9} <= enumerate_progression(r3.progression)[0]


def test_box_map_examples():
    q = GapSpec(F13, 0, (1,), (2,), symmetric=True)
    assert freiman_box_map(q, 11) == (-2,)
    assert freiman_box_map(q, 0) == (0,)
    q2 = GapSpec(F101, 0, (1, 10), (1, 1), symmetric=True)
    assert freiman_box_map(q2, 11) == (1, 1)
    with pytest.raises(DomainError):
        freiman_box_map(q, 5)
    with pytest.raises(PreconditionError):
        FreimanBoxMap(GapSpec(F11, 0, (1,), (2,), symmetric=True))


def test_box_map_round_trip():
    q = GapSpec(F4099, 0, (1, 20), (2, 1), symmetric=True)
    m = FreimanBoxMap(q)
    for x in enumerate_progression(q)[0]:
        assert m.inverse(m(x)) == x
    phi = m.as_dict()
    assert is_freiman_isomorphism(phi, F4099, None)
    assert freiman_quadruples(phi, F4099.add, vector_add)


def test_freiman_examples():
    A = [Fraction(0), Fraction(1), Fraction(5), Fraction(-2)]
    assert is_freiman_isomorphism({a: a for a in A}, Q, Q)
    affine = {a: 2 * a + 1 for a in A}
    assert is_freiman_isomorphism(affine, Q, Q)
    lift = {0: Fraction(0), 1: Fraction(1), 2: Fraction(2)}
    assert not is_freiman_isomorphism(lift, F3, Q)
    assert not freiman_quadruples(lift, F3.add, Q.add)


def test_freiman_budget():
    with pytest.raises(BudgetError):
        is_freiman_isomorphism({i: i for i in range(50)}, Q, Q, budget=100)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 12), min_size=1, max_size=6, unique=True),
       st.lists(st.integers(0, 12), min_size=1, max_size=6), st.integers(1, 12), st.integers(0, 12))
def test_freiman_check_matches_quadruple_oracle(src, images, scale, shift):
    phi = {a: (images[i % len(images)] * scale + shift) % 13 for i, a in enumerate(src)}
    if len(set(phi.values())) != len(phi):
        return
    assert is_freiman_isomorphism(phi, F13, F13) == freiman_quadruples(phi, F13.add, F13.add)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-1, 1), min_size=1, max_size=3, unique=True),
       st.lists(st.integers(1, 9), min_size=9, max_size=9))
def test_entropy_preserved_by_freiman_isomorphism(points, ws):
    q = GapSpec(F4099, 0, (1, 10), (1, 1), symmetric=True)
    m = FreimanBoxMap(q)
    xs = sorted({F4099.coerce(a + 10 * b) for a, b in itertools.product(points, repeat=2)})
    ws = ws[:len(xs)]
    X = Dist.from_weights(F4099, xs, ws)
    h_src = entropy_of("X1+X2", {"X1": X, "X2": X}).bits
    image = {m(x): w for x, w in zip(xs, ws)}
    # the same sum computed in Z^2 with the coordinates
    pairs = {}
    for (u, a), (v, b) in itertools.product(image.items(), repeat=2):
        k = vector_add(u, v)
        pairs[k] = pairs.get(k, 0) + a * b
    Y = Dist.from_weights(None, list(pairs), list(pairs.values()))
    assert h_src == pytest.approx(shannon(Y).bits, abs=1e-9)
    A = set(xs)
    assert len(sumset(F4099, A, A)) == len({vector_add(m(a), m(b)) for a in A for b in A})


def test_cauchy_davenport_exhaustive_f7():
    elems = range(7)
    subsets = [frozenset(c) for r in range(1, 8) for c in itertools.combinations(elems, r)]
    for A in subsets:
        for B in subsets:
            assert len(sumset(F7, A, B)) >= min(7, len(A) + len(B) - 1)


def test_coset_progression_rules():
    P = GapSpec(F7, 0, (1,), (2,))
    assert len(enumerate_progression(CosetProgression(P, frozenset(range(7))))[0]) == 7
    with pytest.raises(UsageError):
        CosetProgression(P, frozenset({0, 1}))
    with pytest.raises(UsageError):
        CosetProgression(GapSpec(Q, 0, (1,), (2,)), frozenset({0, 1, -1}))


def test_json_round_trip():
    cp = CosetProgression(GapSpec(Q, Fraction(1, 2), (3, Fraction(-1, 3)), (2, 4), True))
    again = CosetProgression.from_json(cp.to_json(), Q)
    assert again == cp
