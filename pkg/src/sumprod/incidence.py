"""Point-plane incidences and the energies behind the X(Y+Z) and (X+Y)(Z+W) bounds.

Counts of the form ``#{(t, t') : f(t) = f(t')}`` are computed as
``sum_u m(u)^2`` from one pass that buckets ``f`` by value.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np

from .dist import EntropyValue, _log2_fraction, _shannon_from_weights
from .errors import BudgetError, PreconditionError, UsageError
from .field import FieldSpec

DEFAULT_BUDGET = 10**7


def _check_budget(size, budget, what):
    if size > budget:
        raise BudgetError(f"{what}: {size} exceeds budget {budget}", size=size, budget=budget)


def canonical_plane(field: FieldSpec, alpha, beta, gamma, delta) -> tuple:
    """Plane ``alpha x + beta y + gamma z = delta`` scaled so its first nonzero coefficient is 1."""
    coeffs = [field.coerce(c) for c in (alpha, beta, gamma, delta)]
    lead = next((c for c in coeffs[:3] if c != 0), None)
    if lead is None:
        raise UsageError("plane needs a nonzero normal vector")
    s = field.inv(lead)
    return tuple(field.mul(s, c) for c in coeffs)


def point_set(field: FieldSpec, points) -> frozenset:
    return frozenset(tuple(field.coerce(c) for c in pt) for pt in points)


def plane_set(field: FieldSpec, planes) -> frozenset:
    return frozenset(canonical_plane(field, *h) for h in planes)


def on_plane(field: FieldSpec, point, plane) -> bool:
    a, b, c, d = plane
    x, y, z = point
    lhs = field.add(field.add(field.mul(a, x), field.mul(b, y)), field.mul(c, z))
    return lhs == d


def count_incidences(field: FieldSpec, points, planes, budget=DEFAULT_BUDGET) -> int:
    """Exact ``I(P, Q)`` by testing every point against every plane."""
    pts, pls = list(points), list(planes)
    _check_budget(len(pts) * len(pls), budget, "point-plane pairs")
    return sum(1 for h in pls for x in pts if on_plane(field, x, h))


def koh_construction(field: FieldSpec, A, B, C):
    """Points ``(a, b', ac)`` and planes ``b x - a' y + z = a' c'``.

    Incidences correspond to solutions of ``a(b+c) = a'(b'+c')``.  Both
    parametrisations are injective only when ``0`` is not in ``A``.
    """
    A = [field.coerce(a) for a in A]
    if field.zero() in A:
        raise PreconditionError("0 in A collapses distinct triples onto one point")
    B = [field.coerce(b) for b in B]
    C = [field.coerce(c) for c in C]
    points = {(a, b, field.mul(a, c)) for a in A for b in B for c in C}
    planes = {canonical_plane(field, b, field.neg(a), 1, field.mul(a, c))
              for a in A for b in B for c in C}
    return frozenset(points), frozenset(planes)


def _values_abc(field, A, B, C):
    """All ``a(b+c)`` over ``A x B x C`` as a flat list or array."""
    A = [field.coerce(a) for a in A]
    B = [field.coerce(b) for b in B]
    C = [field.coerce(c) for c in C]
    if field.p is not None and field.p < 2**31:
        a = np.array(A, dtype=np.int64)[:, None, None]
        s = (np.array(B, dtype=np.int64)[None, :, None] + np.array(C, dtype=np.int64)[None, None, :]) % field.p
        return (a * s % field.p).ravel()
    return [field.mul(a, field.add(b, c)) for a in A for b in B for c in C]


def product_sum_multiplicities(field: FieldSpec, A, B, C, budget=DEFAULT_BUDGET) -> Counter:
    """``m(u) = #{(a, b, c) : a(b+c) = u}``."""
    _check_budget(len(A) * len(B) * len(C), budget, "triple count")
    vals = _values_abc(field, A, B, C)
    if isinstance(vals, np.ndarray):
        u, cnt = np.unique(vals, return_counts=True)
        return Counter(dict(zip(u.tolist(), cnt.tolist())))
    return Counter(vals)


def energy_product_sum(field: FieldSpec, A, B, C, budget=DEFAULT_BUDGET) -> int:
    """``N = #{(a,b,c,a',b',c') : a(b+c) = a'(b'+c')}`` as ``sum_u m(u)^2``."""
    return sum(m * m for m in product_sum_multiplicities(field, A, B, C, budget).values())


def expander_size(field: FieldSpec, A, B, C, budget=DEFAULT_BUDGET) -> int:
    return len(product_sum_multiplicities(field, A, B, C, budget))


def collision_entropy_abc(field: FieldSpec, A, B, C, budget=DEFAULT_BUDGET) -> EntropyValue:
    """``H_2(U_A (U_B + U_C)) = -log(N / (|A||B||C|)^2)``, exact collision probability kept."""
    n = energy_product_sum(field, A, B, C, budget)
    q = Fraction(n, (len(A) * len(B) * len(C)) ** 2)
    return EntropyValue(max(0.0, -_log2_fraction(q)), q)


def shannon_abc(field: FieldSpec, A, B, C, budget=DEFAULT_BUDGET) -> float:
    """Shannon entropy of ``U_A (U_B + U_C)`` from the value multiplicities."""
    m = product_sum_multiplicities(field, A, B, C, budget)
    counts = [m[k] for k in sorted(m)]
    return _shannon_from_weights(counts, sum(counts))


def rnr_multiplicities(field: FieldSpec, points, budget=DEFAULT_BUDGET) -> Counter:
    """``m(u) = #{((a,c),(b,d)) in P^2 : (a-b)(c-d) = u}``."""
    pts = [(field.coerce(a), field.coerce(c)) for a, c in points]
    _check_budget(len(pts) ** 2, budget, "ordered pair count")
    m = Counter()
    for (a, c), (b, d) in itertools.product(pts, repeat=2):
        m[field.mul(field.sub(a, b), field.sub(c, d))] += 1
    return m


def energy_rnr(field: FieldSpec, points, budget=DEFAULT_BUDGET) -> int:
    """Ordered solutions of ``(a-b)(c-d) = (a'-b')(c'-d') != 0`` over ``P^4``."""
    m = rnr_multiplicities(field, points, budget)
    zero = field.zero()
    return sum(v * v for u, v in m.items() if u != zero)


def dezeeuw_constant(n_energy: int, k: int) -> float:
    """Empirical constant ``N / k^{9/2}``."""
    return n_energy / k**4.5


def rnr_constant(energy: int, npts: int) -> float:
    """Empirical constant in ``P(...) << log|P| / |P|``: ``energy/|P|^4 * |P| / log|P|``."""
    if npts < 2:
        return 0.0
    return energy / npts**4 * npts / math.log2(npts)
