import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import sumprod.search as search_mod
from oracles import central_difference
from sumprod.dist import Dist, entropy_of, shannon
from sumprod.errors import PreconditionError, UsageError
from sumprod.field import FieldSpec
from sumprod.search import (Objective, SearchDiverged, audit, component_gradient, entropy_terms,
                            gradient, objective_value, project, rationalize, search,
                            support_search)

Q, F5, F101 = FieldSpec.rationals(), FieldSpec(5), FieldSpec(101)


def test_objective_examples():
    full = Objective("additive", F5, tuple(range(5)))
    assert objective_value(full, np.full(5, 0.2)) == pytest.approx(0, abs=1e-12)
    two = Objective("AdditiveDoubling", F5, (0, 1))
    assert objective_value(two, np.array([0.5, 0.5])) == pytest.approx(0.5, abs=1e-12)
    mul = Objective("multiplicative", Q, (1, 2, 3))
    near_point = project(np.array([1.0, 0.0, 0.0]), floor=1e-12)
    assert objective_value(mul, near_point) == pytest.approx(0, abs=1e-9)


def test_objective_rejects_zero_for_products():
    with pytest.raises(PreconditionError):
        Objective("max", F5, (0, 1))
    with pytest.raises(UsageError):
        Objective("nonsense", F5, (1,))


def test_terms_match_exact_entropies():
    o = Objective("max", F101, (1, 3, 7, 50))
    w = [3, 1, 4, 2]
    p = np.array(w, dtype=float) / sum(w)
    t = entropy_terms(o, p)
    d = Dist.from_weights(F101, o.support, w)
    b = {"X": d, "Y": d}
    assert t["H"] == pytest.approx(shannon(d).bits, abs=1e-12)
    assert t["H_add"] == pytest.approx(entropy_of("X+Y", b).bits, abs=1e-12)
    assert t["H_mul"] == pytest.approx(entropy_of("X*Y", b).bits, abs=1e-12)
    gap = Objective("gap", F101, o.support, Fraction(1, 3))
    assert objective_value(gap, p) == pytest.approx(max(t["H_add"], t["H_mul"]) - (4 / 3) * t["H"], abs=1e-12)


def test_two_atom_entropy_gradient_closed_form():
    o = Objective("additive", Q, (1, 2))
    p = np.array([0.3, 0.7])
    expected = -np.log2(p) - 1 / math.log(2)
    assert component_gradient(o, p, "H") == pytest.approx(expected, abs=1e-12)


def test_full_support_gradient_is_constant():
    o = Objective("additive", F5, tuple(range(5)))
    g = gradient(o, np.full(5, 0.2))
    assert np.ptp(g) < 1e-12


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    worst = 0.0
    for i in range(100):
        k = int(rng.integers(2, 11))
        sup = tuple(int(v) for v in rng.choice(np.arange(1, 101), size=k, replace=False))
        kind = ("additive", "multiplicative", "max", "gap")[i % 4]
        o = Objective(kind, F101, sup, Fraction(1, 3))
        p = rng.dirichlet(np.ones(k)) * 0.9 + 0.1 / k
        fd = central_difference(lambda q: objective_value(o, q), p)
        worst = max(worst, float(np.max(np.abs(fd - gradient(o, p)))))
    assert worst <= 1e-5


def test_max_branch_tie_goes_to_additive():
    # on {1, 2} in F_5 both X+X' and XX' have masses (1/4, 1/2, 1/4)
    o = Objective("max", F5, (1, 2))
    p = np.array([0.5, 0.5])
    t = entropy_terms(o, p)
    assert t["H_add"] == t["H_mul"] == pytest.approx(1.5)
    expected = component_gradient(o, p, "H_add") - component_gradient(o, p, "H")
    assert gradient(o, p) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=200)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=12))
def test_projection_invariants(v):
    out = project(np.array(v))
    assert abs(math.fsum(out.tolist()) - 1) <= 1e-12
    assert out.min() >= 1e-9 * (1 - 1e-9)


@settings(max_examples=100)
@given(st.lists(st.floats(1e-6, 1), min_size=1, max_size=40))
def test_rationalize(v):
    p = np.array(v) / sum(v)
    w = rationalize(p)
    assert sum(w) == 2**20 and min(w) >= 1


def test_additive_search_on_progression():
    o = Objective("additive", Q, tuple(range(32)))
    res = search(o, "pg", iters=300, seed=0)
    assert res.value < 0.6
    assert abs(res.value - res.audit) <= 1e-6
    assert all(b >= a for a, b in zip(res.best_trace[1:], res.best_trace))


def test_maxdoubling_on_geometric_support():
    o = Objective("maxdoubling", Q, (1, 2, 4, 8, 16))
    res = search(o, "pg", iters=200, seed=1)
    assert abs(res.value - res.audit) <= 1e-6
    # products of a geometric progression add exponents: XX' here has the
    # law of X+X' on the progression 0..4 with the same masses
    p = np.array(res.weights, dtype=float) / 2**20
    t = entropy_terms(o, p)
    ap = entropy_terms(Objective("additive", Q, tuple(range(5))), p)
    assert t["H_mul"] - t["H"] == pytest.approx(ap["H_add"] - ap["H"], abs=1e-9)
    # sums of distinct powers of two rarely collide, so the additive branch is the larger
    assert t["H_add"] >= t["H_mul"] - 1e-9


def test_anneal_search_audits():
    o = Objective("gap", F101, (1, 2, 5, 11, 40), Fraction(1, 3))
    res = search(o, "anneal", iters=300, seed=2)
    assert abs(res.value - res.audit) <= 1e-6
    assert res.to_json()["method"] == "anneal"


def test_search_is_seeded():
    o = Objective("max", F101, (1, 2, 5, 11))
    a = search(o, "anneal", iters=100, seed=3).to_json()
    assert a == search(o, "anneal", iters=100, seed=3).to_json()


def test_support_search_runs():
    res = support_search(F101, 8, "gap", Fraction(1, 3), iters=10, inner_iters=10, seed=0)
    assert len(res.objective.support) == 8 and 0 not in res.objective.support
    assert abs(res.value - audit(res.objective, res.weights)) <= 1e-6


def test_divergence_guard(monkeypatch):
    o = Objective("additive", Q, (0, 1, 2))
    monkeypatch.setattr(search_mod, "objective_value", lambda o, p: float("nan"))
    with pytest.raises(SearchDiverged) as e:
        search(o, "pg", iters=5)
    assert isinstance(e.value.trace, list)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=2, max_size=6, unique=True),
       st.lists(st.integers(1, 9), min_size=6, max_size=6),
       st.fractions(min_value=Fraction(-7), max_value=Fraction(7)).filter(lambda c: c != 0))
def test_doublings_are_scale_invariant(sup, ws, c):
    mass = dict(zip(sup, ws))
    a = Objective("max", Q, tuple(sup))
    b = Objective("max", Q, tuple(c * s for s in sup))
    pa = np.array([mass[s] for s in a.support], dtype=float)
    pb = np.array([mass[s / c] for s in b.support], dtype=float)
    ta, tb = entropy_terms(a, pa / pa.sum()), entropy_terms(b, pb / pb.sum())
    assert ta["H_add"] - ta["H"] == pytest.approx(tb["H_add"] - tb["H"], abs=1e-9)
    assert ta["H_mul"] - ta["H"] == pytest.approx(tb["H_mul"] - tb["H"], abs=1e-9)
