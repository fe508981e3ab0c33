"""Decomposition of a min-entropy-m source into flat parts of size 2^m.

The construction peels flats greedily.  With ``K = 2**m`` and remaining
(unnormalised) masses ``r_1 >= r_2 >= ...`` summing to ``T``, the invariant
is ``r_1 <= T/K``.  Taking the top K atoms and lowering each by

    w = min(r_K, T/K - r_{K+1})

keeps every mass non-negative and preserves the invariant; each step
either empties an atom or raises one more atom to the cap ``T/K``, so at
most ``2 |support|`` steps are needed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .dist import Dist, entropy_of, min_entropy, shannon, TOL
from .errors import PreconditionError
from .field import FieldSpec
from .incidence import collision_entropy_abc, shannon_abc


@dataclass(frozen=True)
class FlatMixture:
    field: FieldSpec
    m: int
    parts: tuple  # ((weight: Fraction, atoms: tuple), ...)

    @property
    def size(self) -> int:
        return 2**self.m

    def law(self) -> dict:
        """Mixture law ``sum_i w_i U_{A_i}`` as an atom -> mass dict."""
        out = {}
        for w, atoms in self.parts:
            for a in atoms:
                out[a] = out.get(a, Fraction(0)) + w / len(atoms)
        return out

    def to_json(self) -> dict:
        f = self.field
        return {"m": self.m,
                "parts": [{"w": f"{w.numerator}/{w.denominator}",
                           "atoms": [f.format_scalar(a) for a in atoms]}
                          for w, atoms in self.parts]}

    @classmethod
    def from_json(cls, obj, field: FieldSpec) -> "FlatMixture":
        parts = tuple((Fraction(p["w"]), tuple(field.parse_scalar(str(a)) for a in p["atoms"]))
                      for p in obj["parts"])
        return cls(field, int(obj["m"]), parts)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def floor_min_entropy(x: Dist) -> int:
    """Largest integer m with ``p_max <= 2**-m``, decided on exact rationals."""
    pm = x.p_max
    m = 0
    while pm * 2 ** (m + 1) <= 1:
        m += 1
    return m


def decompose_flat(x: Dist, m: int | None = None) -> FlatMixture:
    if m is None:
        m = floor_min_entropy(x)
    if m < 0:
        raise PreconditionError("m must be non-negative")
    K = 2**m
    if x.p_max * K > 1:
        raise PreconditionError(f"min-entropy {min_entropy(x).bits:.6f} is below m = {m}")
    keys = list(x.support)
    rem = dict(zip(keys, x.masses))
    total = Fraction(1)
    parts = []
    cap = 4 * len(keys) * K
    rank = {k: i for i, k in enumerate(keys)}
    for _ in range(cap):
        if total == 0:
            break
        live = sorted((k for k in keys if rem[k] > 0), key=lambda k: (-rem[k], rank[k]))
        top = live[:K]
        nxt = rem[live[K]] if len(live) > K else Fraction(0)
        w = min(rem[top[-1]], total / K - nxt)
        if w <= 0:
            raise AssertionError("flat peeling stalled")
        for k in top:
            rem[k] -= w
        total -= K * w
        parts.append((K * w, tuple(top)))
    else:
        if total != 0:
            raise RuntimeError(f"flat peeling did not terminate within {cap} steps")
    return FlatMixture(x.field, m, tuple(parts))


def validate_mixture(mix: FlatMixture, x: Dist) -> list:
    """Problems found when checking ``mix`` against the type invariants and ``x``.

    Knows nothing of how the mixture was built; an empty list means valid.
    """
    problems = []
    if sum((w for w, _ in mix.parts), Fraction(0)) != 1:
        problems.append("weights do not sum to 1")
    for i, (w, atoms) in enumerate(mix.parts):
        if not w > 0:
            problems.append(f"part {i} has non-positive weight {w}")
        if len(atoms) != 2**mix.m or len(set(atoms)) != len(atoms):
            problems.append(f"part {i} is not {2**mix.m} distinct atoms")
        if any(a not in x for a in atoms):
            problems.append(f"part {i} leaves the support")
    law = {}
    for w, atoms in mix.parts:
        for a in atoms:
            law[a] = law.get(a, Fraction(0)) + w * Fraction(1, 2**mix.m)
    for a, p in x.items():
        if law.get(a, Fraction(0)) != p:
            problems.append(f"mass at {a!r} is {law.get(a, 0)}, expected {p}")
    return problems


def mixture_lower_bound_check(x: Dist, y: Dist, z: Dist, m: int | None = None,
                              margin: float = 2.0, max_part_triples: int = 200_000) -> dict:
    """Evaluate H(X(Y+Z)) against (3/2)m through the flat decompositions.

    Returns a report row: the entropy, the deficit ``1.5 m - H``, the
    conditional average ``E H(U_i(U_j + U_k))`` over part triples (which must
    not exceed H) and the average collision entropy of the parts.
    """
    if m is None:
        m = min(floor_min_entropy(d) for d in (x, y, z))
    for name, d in zip("XYZ", (x, y, z)):
        if d.p_max * 2**m > 1:
            raise PreconditionError(f"H_min({name}) < m = {m}")
    f = x.field
    if f.p is not None and m > (2 / 3) * math.log2(f.p) - margin:
        raise PreconditionError(f"m = {m} exceeds (2/3) log p - {margin}")
    h = entropy_of("X*(Y+Z)", {"X": x, "Y": y, "Z": z}).bits
    row = {"m": m, "margin": margin, "H": h, "deficit": 1.5 * m - h,
           "bound": 1.5 * m}
    mx, my, mz = (decompose_flat(d, m) for d in (x, y, z))
    row["parts"] = [len(mx.parts), len(my.parts), len(mz.parts)]
    ntrip = len(mx.parts) * len(my.parts) * len(mz.parts)
    if ntrip > max_part_triples:
        row["conditional"] = None
        row["chain_ok"] = None
        row["note"] = f"{ntrip} part triples exceed max_part_triples"
        return row
    cond, coll = [], []
    for wi, Ai in mx.parts:
        for wj, Bj in my.parts:
            for wk, Ck in mz.parts:
                w = float(wi * wj * wk)
                cond.append(w * shannon_abc(f, Ai, Bj, Ck))
                coll.append(w * collision_entropy_abc(f, Ai, Bj, Ck).bits)
    row["conditional"] = math.fsum(cond)
    row["collision_parts"] = math.fsum(coll)
    row["chain_ok"] = row["conditional"] <= h + TOL and row["collision_parts"] <= row["conditional"] + TOL
    return row
