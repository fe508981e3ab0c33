import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sumprod.dist import Dist, shannon
from sumprod.errors import PreconditionError
from sumprod.field import FieldSpec
from sumprod.flat import (FlatMixture, decompose_flat, floor_min_entropy, mixture_lower_bound_check,
                          validate_mixture)

Q, F5, F4099 = FieldSpec.rationals(), FieldSpec(5), FieldSpec(4099)


def test_worked_example():
    x = Dist(Q, {0: Fraction(1, 2), 1: Fraction(1, 4), 2: Fraction(1, 4)})
    mix = decompose_flat(x, 1)
    assert sorted((w, set(a)) for w, a in mix.parts) == sorted([(Fraction(1, 2), {0, 1}), (Fraction(1, 2), {0, 2})])
    assert validate_mixture(mix, x) == []


def test_uniform_four_atoms():
    u = Dist.uniform(Q, range(4))
    one = decompose_flat(u, 2)
    assert len(one.parts) == 1 and one.parts[0][0] == 1
    assert validate_mixture(decompose_flat(u, 1), u) == []
    hand = FlatMixture(Q, 1, ((Fraction(1, 2), (0, 1)), (Fraction(1, 2), (2, 3))))
    assert validate_mixture(hand, u) == []


def test_validator_rejects_bad_mixtures():
    u = Dist.uniform(Q, range(4))
    assert validate_mixture(FlatMixture(Q, 1, ((Fraction(1, 2), (0, 1)), (Fraction(1, 2), (0, 3)))), u)
    assert validate_mixture(FlatMixture(Q, 1, ((Fraction(1), (0, 1, 2)),)), u)
    assert validate_mixture(FlatMixture(Q, 1, ((Fraction(1, 2), (0, 1)),)), u)
    assert validate_mixture(FlatMixture(Q, 1, ((Fraction(1, 2), (0, 1)), (Fraction(1, 2), (2, 9)))), u)


def test_precondition():
    x = Dist(Q, {0: Fraction(3, 4), 1: Fraction(1, 4)})
    with pytest.raises(PreconditionError):
        decompose_flat(x, 1)
    assert floor_min_entropy(x) == 0


def test_default_m_is_floor_of_min_entropy():
    x = Dist.from_weights(Q, range(7), [3, 1, 1, 1, 1, 1, 1])
    assert floor_min_entropy(x) == 1
    assert decompose_flat(x).m == 1
    assert floor_min_entropy(Dist.uniform(Q, range(8))) == 3


def test_json_round_trip():
    x = Dist.from_weights(Q, [Fraction(1, 3), 2, 5, 9], [2, 1, 1, 2])
    mix = decompose_flat(x, 1)
    again = FlatMixture.from_json(mix.to_json(), Q)
    assert again == mix


def test_lower_bound_examples():
    u = Dist.uniform(F5, [1, 2])
    row = mixture_lower_bound_check(u, u, u, m=1, margin=0.0)
    assert row["H"] == pytest.approx(1.905639, abs=1e-6)
    assert row["deficit"] <= 0 and row["chain_ok"]
    # with the default two-bit margin, F_5 is too small for m = 1
    with pytest.raises(PreconditionError):
        mixture_lower_bound_check(u, u, u, m=1)
    pt = Dist.point(Q, 3)
    row = mixture_lower_bound_check(pt, pt, pt, m=0)
    assert row["H"] == 0 and row["chain_ok"]


def test_lower_bound_random_sources():
    import numpy as np
    rng = np.random.default_rng(7)
    srcs = []
    for _ in range(3):
        keys = rng.choice(np.arange(1, 4099), size=32, replace=False).tolist()
        srcs.append(Dist.from_weights(F4099, keys, rng.integers(1, 4, size=32).tolist()))
    row = mixture_lower_bound_check(*srcs, m=4, max_part_triples=10**6)
    assert math.isfinite(row["deficit"])
    assert row["conditional"] <= row["H"] + 1e-9
    assert row["chain_ok"]


@st.composite
def dists(draw):
    n = draw(st.integers(1, 12))
    ws = draw(st.lists(st.integers(1, 12), min_size=n, max_size=n))
    return Dist.from_weights(Q, range(n), ws)


@settings(max_examples=200, deadline=None)
@given(dists(), st.data())
def test_decomposition_is_valid(x, data):
    top = floor_min_entropy(x)
    m = data.draw(st.integers(0, top))
    mix = decompose_flat(x, m)
    assert validate_mixture(mix, x) == []
    assert len(mix.parts) <= 4 * len(x) * 2**m
    assert shannon(x).bits >= m - 1e-9
