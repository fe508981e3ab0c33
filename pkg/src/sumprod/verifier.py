"""Harness that runs the entropy inequalities over seeded corpora.

Each check returns a trial record::

    {"check": name, "inputs_digest": hex, "values": {...}, "slack": float | None,
     "pass": bool | None}

``pass`` is a boolean only for inequalities whose constants are fully
explicit; those are asserted with tolerance ``TOL``.  Statements that hide
an unspecified constant are recorded with ``pass: None`` and a ``deficit``
or ``constant`` entry that the suite summary aggregates.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import __version__
from .dist import (TOL, Dist, H, binomial_law, collision_entropy, conditional_entropy,
                   entropy_of, h2, min_entropy, pushforward, ruzsa_distance, shannon)
from .errors import PreconditionError, UsageError
from .extractor import condense_exact
from .field import FieldSpec
from .flat import decompose_flat, floor_min_entropy, validate_mixture
from .incidence import (count_incidences, energy_product_sum, energy_rnr, expander_size,
                        collision_entropy_abc, koh_construction)
from .progressions import (FreimanBoxMap, GapSpec, enumerate_progression, is_freiman_isomorphism,
                           is_t_proper, vector_add)
from .rng import substream
from .search import Objective, component_gradient, entropy_terms

DEFAULT_FIELDS = ("p=13", "p=101", "p=4099", "Q")
EPI_WINDOW = (2.0, 3.0)  # H(X) in (lo, log p - hi)
EPS_GRID = (0.05, 0.1, 0.2)
EXPANDER_GUARD = Fraction(1, 4)  # |A(B+C)| >= k^{3/2} / 4, a regression guard


def digest(*dists) -> str:
    h = hashlib.sha256()
    for d in dists:
        h.update(repr((str(d.field), d.support, tuple(str(m) for m in d.masses))).encode())
    return h.hexdigest()[:16]


def _rec(check, inputs, values, slack=None, passed=None, skip=None) -> dict:
    r = {"check": check, "inputs_digest": digest(*inputs), "values": values,
         "slack": slack, "pass": passed}
    if skip is not None:
        r["skip"] = skip
    return r


def _exact(check, inputs, values, slacks: dict) -> dict:
    """Record for explicit-constant inequalities: every slack must be >= -TOL."""
    values = dict(values)
    values.update({f"slack_{k}": v for k, v in slacks.items()})
    s = min(slacks.values())
    return _rec(check, inputs, values, s, s >= -TOL)


def _p_nonzero(d: Dist) -> Fraction:
    return 1 - d.prob(d.field.zero())


# exact-constant checks


def _mo_rhs(x, y, z):
    b = {"X": x, "Y": y, "Z": z}
    return H("X*Y, X*Z", b) + H("X, Y+Z", b) - H("X, Y, Z", b)


def check_mo_upper(x: Dist, y: Dist, z: Dist) -> dict:
    """H(X(Y+Z)) against H(XY, XZ) + H(X, Y+Z) - H(X, Y, Z) + 1.

    The stated form is asserted when P(X = 0) = 0.  With an atom at 0 it can
    fail (X = 0 a.s. turns the right side into H(Y+Z) - H(Y) - H(Z) + 1), so
    it is recorded as ``stated_slack`` and the form the submodularity
    argument actually yields is asserted instead:
        H(X(Y+Z)) <= P(X != 0) * R(X | X != 0, Y, Z) + h2(P(X != 0)).
    """
    lhs = H("X*(Y+Z)", {"X": x, "Y": y, "Z": z})
    pnz = _p_nonzero(x)
    rhs = _mo_rhs(x, y, z) + 1
    vals = {"lhs": lhs, "rhs": rhs, "stated_slack": rhs - lhs, "p_x_zero": str(1 - pnz)}
    if pnz == 1:
        slacks = {"general": rhs - lhs}
    else:
        cond = 0.0
        if pnz > 0:
            cond = float(pnz) * _mo_rhs(x.condition(lambda v: v != x.field.zero()), y, z)
        rhs_c = cond + h2(float(pnz))
        vals["rhs_conditioned"] = rhs_c
        slacks = {"conditioned": rhs_c - lhs}
    if x == y == z:
        b2 = {"X": x, "Y": x}
        rhs2 = 2 * H("X*Y", b2) + H("X+Y", b2) - 2 * shannon(x).bits + 1
        vals["rhs_iid"] = rhs2
        slacks["iid"] = rhs2 - lhs
    return _exact("mo_upper", (x, y, z), vals, slacks)


def check_pohoata_upper(x: Dist, y: Dist, z: Dist, w: Dist) -> dict:
    b = {"X": x, "Y": y, "Z": z, "W": w}
    pxz0 = pushforward("X*Z", {"X": x, "Z": z}).prob(x.field.zero())
    if pxz0 != 0:
        return _rec("pohoata_upper", (x, y, z, w), {"p_xz_zero": str(pxz0)},
                    skip="P(XZ=0) > 0")
    lhs = H("(X+Y)*(Z+W)", b)
    rhs = H("X+Y, Z+W", b) + H("X*Z, X*W, Y*Z", b) - H("X, Y, Z, W", b) + 1
    vals = {"lhs": lhs, "rhs": rhs}
    slacks = {"general": rhs - lhs}
    if x == y == z == w:
        b2 = {"X": x, "Y": x}
        rhs2 = 2 * H("X+Y", b2) + 3 * H("X*Y", b2) - 4 * shannon(x).bits + 1
        vals["rhs_iid"] = rhs2
        slacks["iid"] = rhs2 - lhs
    return _exact("pohoata_upper", (x, y, z, w), vals, slacks)


def check_maxprob(x: Dist) -> dict:
    hx = shannon(x).bits
    if hx <= 0:
        return _rec("maxprob", (x,), {"H": hx}, skip="H(X) = 0")
    doubling = H("X+Y", {"X": x, "Y": x}) - hx
    pmax = float(x.p_max)
    bound = (doubling + 1.5) / hx
    # contrapositive: p_max >= (3/2 + C)/H  forces doubling >= C
    implied_c = pmax * hx - 1.5
    return _exact("maxprob", (x,), {"p_max": pmax, "bound": bound, "doubling": doubling,
                                    "implied_C": implied_c},
                  {"bound": bound - pmax, "contrapositive": doubling - implied_c})


def check_entropy_order(d: Dist) -> dict:
    hmin, h2v, h = min_entropy(d).bits, collision_entropy(d).bits, shannon(d).bits
    return _exact("entropy_order", (d,), {"Hmin": hmin, "H2": h2v, "H": h},
                  {"min_le_2": h2v - hmin, "2_le_H": h - h2v, "H_le_log": math.log2(len(d)) - h})


def check_chain_rule(x: Dist, y: Dist) -> dict:
    """H(S, P) = H(S) + H(P | S) for S = X+Y, P = XY."""
    joint = pushforward("X+Y, X*Y", {"X": x, "Y": y})
    hj = shannon(joint).bits
    hs = shannon(joint.marginal(0)).bits
    hc = conditional_entropy(joint, given=0).bits
    slack = -abs(hj - hs - hc)
    return _exact("chain_rule", (x, y), {"H_joint": hj, "H_marginal": hs, "H_cond": hc},
                  {"identity": slack})


def check_ruzsa(x: Dist, y: Dist, z: Dist) -> dict:
    dxy, dyz, dxz = (ruzsa_distance(a, b).bits for a, b in ((x, y), (y, z), (x, z)))
    dxny = ruzsa_distance(x, y.neg()).bits
    return _exact("ruzsa", (x, y, z), {"d_xy": dxy, "d_yz": dyz, "d_xz": dxz, "d_x_negy": dxny},
                  {"triangle": dxy + dyz - dxz, "sum_difference": 3 * dxy - dxny})


def _in_window(f: FieldSpec, hx, window=EPI_WINDOW):
    if f.p is None:
        return True
    return window[0] < hx < math.log2(f.p) - window[1]


def check_noniid(x: Dist, y: Dist, window=EPI_WINDOW) -> dict:
    """Exact chain d(X,-X) <= d(X,Y) + d(X,-Y) <= 4 d(X,Y), plus the 1/8 deficit."""
    dxy = ruzsa_distance(x, y).bits
    dxny = ruzsa_distance(x, y.neg()).bits
    dxnx = ruzsa_distance(x, x.neg()).bits
    hx, hy = shannon(x).bits, shannon(y).bits
    vals = {"d_xy": dxy, "d_x_negy": dxny, "d_x_negx": dxnx, "H_x": hx, "H_y": hy}
    if _in_window(x.field, hx, window) and _in_window(x.field, hy, window):
        vals["deficit"] = 0.5 * hx + 0.5 * hy + 0.125 - H("X+Y", {"X": x, "Y": y})
    else:
        vals["window"] = "outside"
    return _exact("noniid", (x, y), vals,
                  {"first": dxy + dxny - dxnx, "second": 4 * dxy - dxy - dxny})


def check_zsupport_lemma(u: Dist, z: Dist, delta) -> dict:
    """X = U + Z with the threshold set A = {t : P(Z = t) >= delta}.

    Asserted exactly: the covering bound P(Z not in A) <= H(Z)/log(1/delta)
    and the decomposition inequality
        H(X1+X2) >= H(X | 1_A) + (H(X1'+X2') - H(X')) P(Z in A)^2.
    Both closed-form claims are asserted whenever C/log(1/delta) <= 1 and
    h2(P(Z not in A)) <= C loglog(1/delta)/log(1/delta), the two facts their
    derivation uses; otherwise their slacks are recorded only.
    """
    delta = Fraction(delta)
    inputs = (u, z)
    if delta > z.p_max:
        return _rec("zsupport", inputs, {"delta": str(delta)}, skip="A is empty")
    if not 0 < delta < Fraction(1, 2):
        return _rec("zsupport", inputs, {"delta": str(delta)}, skip="delta outside (0, 1/2)")
    hz = shannon(z).bits
    C = max(1, math.ceil(hz - TOL))
    L = -math.log2(delta)
    A = {t for t, m in z.items() if m >= delta}
    pA = z.mass_of(A)
    x = pushforward("U+Z", {"U": u, "Z": z})
    xa = pushforward("U+Z", {"U": u, "Z": z.condition(A)})
    hx, hxa = shannon(x).bits, shannon(xa).bits
    if pA < 1:
        hxc = H("U+Z", {"U": u, "Z": z.condition(lambda t: t not in A)})
    else:
        hxc = 0.0
    h_given = float(pA) * hxa + float(1 - pA) * hxc
    sum_x = H("X+Y", {"X": x, "Y": x})
    sum_xa = H("X+Y", {"X": xa, "Y": xa})
    dbl, dbl_a = sum_x - hx, sum_xa - hxa
    loglog = math.log2(L) if L > 1 else 0.0
    err = C * loglog / L
    first_rhs = dbl_a * (1 - C / L) ** 2 - err
    slacks = {"cover": C / L - float(1 - pA) if (1 - pA) else C / L,
              "cover_hz": hz / L - float(1 - pA),
              "decomposition": sum_x - (h_given + dbl_a * float(pA) ** 2),
              "conditioning": h_given - (hx - h2(float(1 - pA)))}
    regime = C / L <= 1 and h2(float(1 - pA)) <= err + TOL
    if regime:
        slacks["first_claim"] = dbl - first_rhs
    vals = {"delta": str(delta), "C": C, "H_Z": hz, "P_A": str(pA), "doubling": dbl,
            "doubling_conditioned": dbl_a, "first_claim_rhs": first_rhs,
            "first_claim_slack": dbl - first_rhs, "regime": "asserted" if regime else "outside delta_0 regime"}
    pnz = float(_p_nonzero(x))
    if pnz > 0:
        mul_x = H("X*Y", {"X": x, "Y": x})
        mul_xa = H("X*Y", {"X": xa, "Y": xa})
        second_rhs = (mul_xa - hxa) * float(pA) ** 2 / pnz - err
        vals["second_claim_slack"] = mul_x / pnz - hx - second_rhs
        if regime:
            slacks["second_claim"] = vals["second_claim_slack"]
    return _exact("zsupport", inputs, vals, slacks)


def cauchy_davenport_exhaustive(p: int = 7) -> dict:
    """|A+B| >= min(p, |A|+|B|-1) over all nonempty A, B in F_p, as bitmasks."""
    full = (1 << p) - 1
    rot = [[((m << s) | (m >> (p - s))) & full for s in range(p)] for m in range(1 << p)]
    worst, viol, pairs = None, 0, 0
    for a in range(1, 1 << p):
        elems = [s for s in range(p) if a >> s & 1]
        na = len(elems)
        for b in range(1, 1 << p):
            s = 0
            for e in elems:
                s |= rot[b][e]
            slack = bin(s).count("1") - min(p, na + bin(b).count("1") - 1)
            pairs += 1
            if slack < 0:
                viol += 1
            worst = slack if worst is None else min(worst, slack)
    return {"p": p, "pairs": pairs, "violations": viol, "min_slack": worst}


# deficit records


def _hmin_gate(x: Dist, margin) -> str | None:
    f = x.field
    if f.p is not None and min_entropy(x).bits > (2 / 3) * math.log2(f.p) - margin:
        return "H_min(X) > (2/3) log p - margin"
    return None


def check_minentropy_sumproduct(x: Dist, margin: float = 1.0) -> dict:
    hx, hm = shannon(x).bits, min_entropy(x).bits
    if hx == 0:
        return _rec("minentropy_sumproduct", (x,), {"H": 0.0}, skip="point mass")
    gate = _hmin_gate(x, margin)
    if gate:
        return _rec("minentropy_sumproduct", (x,), {"H": hx, "Hmin": hm}, skip=gate)
    b = {"X": x, "Y": x}
    top = max(H("X+Y", b), H("X*Y", b))
    d6 = top - (4 * hx + 3 * hm) / 6
    vals = {"H": hx, "Hmin": hm, "max_doubling": top, "D6": d6, "deficit": -d6, "constant": -d6}
    if x.field.p is None:
        if x.prob(0) == 0:
            d5 = top - (4 * hx + 2 * hm) / 5
            vals["D5"] = d5
            if hm > 1:
                vals["constant_5"] = -d5 / math.log2(hm)
        else:
            vals["D5"] = None
    return _rec("minentropy_sumproduct", (x,), vals)


def check_epi_fp(x: Dist, window=EPI_WINDOW) -> dict:
    hx = shannon(x).bits
    if not _in_window(x.field, hx, window):
        return _rec("epi_fp", (x,), {"H": hx}, skip="entropy outside window")
    dbl = H("X+Y", {"X": x, "Y": x}) - hx
    return _rec("epi_fp", (x,), {"H": hx, "doubling": dbl, "deficit": 0.5 - dbl})


def check_weak_sumproduct(x: Dist, C=1, margin: float = 1.0) -> dict:
    hx = shannon(x).bits
    if hx == 0:
        return _rec("weak_sumproduct", (x,), {"H": 0.0}, skip="point mass")
    gate = _hmin_gate(x, margin)
    if gate:
        return _rec("weak_sumproduct", (x,), {"H": hx}, skip=gate)
    b = {"X": x, "Y": x}
    dbl = H("X+Y", b) - hx
    if dbl > float(C) + TOL:
        return _rec("weak_sumproduct", (x,), {"H": hx, "doubling": dbl}, skip="additive filter")
    ratio = H("X*Y", b) / hx
    return _rec("weak_sumproduct", (x,), {"H": hx, "doubling": dbl, "ratio": ratio,
                                          "deficit": 7 / 6 - ratio})


def check_entropic_cd(x: Dist, y: Dist) -> dict:
    """Candidate H(X+Y) >= min(log p, log((2^H(X) + 2^H(Y) - 1)/sqrt 2)); data only."""
    hs = H("X+Y", {"X": x, "Y": y})
    hx, hy = shannon(x).bits, shannon(y).bits
    cap = math.log2(x.field.p) if x.field.p is not None else math.inf
    bound = min(cap, math.log2((2**hx + 2**hy - 1) / math.sqrt(2)))
    return _rec("entropic_cd", (x, y), {"H_sum": hs, "bound": bound, "holds": hs >= bound - TOL},
                slack=hs - bound)


# corpora


@dataclass
class Corpus:
    structure: str = "random"  # random | uniform-set | GAP-uniform | U-plus-Z
    fields: tuple = DEFAULT_FIELDS
    trials: int = 100
    seed: int = 0
    max_support: int = 12
    denom_bits: int = 10
    q_bits: int = 6

    def to_json(self) -> dict:
        d = asdict(self)
        d["fields"] = list(self.fields)
        return d


def _support_pool(f: FieldSpec, q_bits, avoid_zero):
    if f.p is None:
        return 1, 2**q_bits + 1
    return (1 if avoid_zero else 0), f.p


def random_support(rng, f: FieldSpec, k, q_bits=6, avoid_zero=False) -> list:
    lo, hi = _support_pool(f, q_bits, avoid_zero)
    k = min(k, hi - lo)
    return sorted(int(v) for v in rng.choice(np.arange(lo, hi), size=k, replace=False))


def random_dist(rng, f: FieldSpec, max_support=12, denom_bits=10, q_bits=6,
                avoid_zero=False) -> Dist:
    """Support uniform in the field (or [1, 2^q_bits] in Q), masses random integers <= 2^denom_bits."""
    k = int(rng.integers(1, max_support + 1))
    sup = random_support(rng, f, k, q_bits, avoid_zero)
    ws = rng.integers(1, 2**denom_bits + 1, size=len(sup)).tolist()
    return Dist.from_weights(f, sup, ws)


def uniform_set(rng, f, max_support=12, q_bits=6, avoid_zero=False) -> Dist:
    k = int(rng.integers(2, max_support + 1))
    return Dist.uniform(f, random_support(rng, f, k, q_bits, avoid_zero))


def gap_uniform(rng, f, max_support=12, q_bits=6) -> Dist:
    """Uniform on a random rank-1 or rank-2 progression of size <= max_support, 0 avoided."""
    hi = f.p if f.p is not None else 2**q_bits
    for _ in range(100):
        rank = int(rng.integers(1, 3))
        a = int(rng.integers(1, hi))
        r = tuple(int(rng.integers(1, hi)) for _ in range(rank))
        if rank == 1:
            N = (int(rng.integers(2, max_support + 1)),)
        else:
            n1 = int(rng.integers(2, max(3, max_support // 2) + 1))
            N = (n1, int(rng.integers(2, max(2, max_support // n1) + 1)))
        pts, _ = enumerate_progression(GapSpec(f, a, r, N))
        pts = [v for v in pts if v != f.zero()]
        if 2 <= len(pts) <= max_support:
            return Dist.uniform(f, pts)
    return Dist.uniform(f, [1, 2])


def u_plus_z(rng, f, ap_len=8, z_atoms=3, q_bits=6):
    """(U, Z): U uniform on an arithmetic progression, Z on a few random atoms."""
    hi = f.p if f.p is not None else 2**q_bits
    a, r = int(rng.integers(1, hi)), int(rng.integers(1, hi))
    u = Dist.uniform(f, [f.add(a, f.mul(n, r)) for n in range(ap_len)])
    zs = random_support(rng, f, z_atoms, q_bits + 4)
    z = Dist.from_weights(f, zs, rng.integers(1, 2**10 + 1, size=len(zs)).tolist())
    return u, z


def three_proper_gap(rng, f: FieldSpec, max_size=200, max_rank=2, tries=200) -> GapSpec:
    """A random symmetric 3-proper progression centred at 0 with |Q| <= max_size."""
    hi = f.p if f.p is not None else 10**4
    for _ in range(tries):
        rank = int(rng.integers(1, max_rank + 1))
        N = []
        size = 1
        for _ in range(rank):
            n = int(rng.integers(1, 6))
            while size * (2 * n + 1) > max_size and n > 1:
                n -= 1
            N.append(n)
            size *= 2 * n + 1
        r = tuple(int(rng.integers(1, hi)) for _ in range(rank))
        q = GapSpec(f, 0, r, tuple(N), True)
        if size <= max_size and is_t_proper(q, 3):
            return q
    raise RuntimeError("no 3-proper progression found")


# suites


def _summary(trials: list, extra=None) -> dict:
    viol = sum(1 for t in trials if t.get("pass") is False)
    deficits = [t["values"]["deficit"] for t in trials
                if isinstance(t.get("values"), dict) and t["values"].get("deficit") is not None]
    consts = [t["values"]["constant"] for t in trials
              if isinstance(t.get("values"), dict) and t["values"].get("constant") is not None]
    s = {"violations": viol, "trials": len(trials),
         "skipped": sum(1 for t in trials if "skip" in t),
         "deficit_min": min(deficits) if deficits else None,
         "deficit_max": max(deficits) if deficits else None,
         "deficit_mean": math.fsum(deficits) / len(deficits) if deficits else None,
         "empirical_constant": max(consts) if consts else None}
    table = {}
    for t in trials:
        v = t.get("values")
        if isinstance(v, dict) and v.get("deficit") is not None:
            table.setdefault(t["check"], []).append(v["deficit"])
    if table:
        s["deficit_table"] = {k: {"n": len(d), "min": min(d), "max": max(d), "mean": math.fsum(d) / len(d)}
                              for k, d in sorted(table.items())}
    if not trials:
        s["warning"] = "empty corpus"
    if extra:
        s.update(extra)
    return s


def _fields(spec):
    return [FieldSpec.parse(s) if isinstance(s, str) else s for s in spec]


def suite_exact_inequalities(corpus: Corpus) -> tuple:
    out = []
    for fs in corpus.fields:
        f = FieldSpec.parse(fs)
        for i in range(corpus.trials):
            rng = substream(corpus.seed, "exact-inequalities", str(f), i)
            avoid = bool(i % 2)
            x, y, z, w = (random_dist(rng, f, corpus.max_support, corpus.denom_bits,
                                      corpus.q_bits, avoid) for _ in range(4))
            recs = [check_mo_upper(x, y, z), check_mo_upper(x, x, x),
                    check_pohoata_upper(x, y, z, w), check_pohoata_upper(x, x, x, x),
                    check_maxprob(x), check_entropy_order(x),
                    check_entropy_order(pushforward("X+Y", {"X": x, "Y": y})),
                    check_chain_rule(x, y), check_ruzsa(x, y, z), check_noniid(x, y)]
            for r in recs:
                r["field"] = str(f)
                r["trial"] = i
            out.extend(recs)
    mo = [t for t in out if t["check"] == "mo_upper"]
    return out, {"mo_stated_counterexamples": sum(1 for t in mo if t["values"]["stated_slack"] < -TOL),
                 "mo_stated_counterexample_digests": sorted({t["inputs_digest"] for t in mo
                                                             if t["values"]["stated_slack"] < -TOL})}


def suite_deficits(corpus: Corpus) -> tuple:
    out = []
    gens = {"random": lambda rng, f: random_dist(rng, f, corpus.max_support, corpus.denom_bits,
                                                  corpus.q_bits, True),
            "uniform-set": lambda rng, f: uniform_set(rng, f, corpus.max_support, corpus.q_bits, True),
            "GAP-uniform": lambda rng, f: gap_uniform(rng, f, corpus.max_support, corpus.q_bits)}
    for fs in corpus.fields:
        f = FieldSpec.parse(fs)
        for i in range(corpus.trials):
            rng = substream(corpus.seed, "deficits", corpus.structure, str(f), i)
            if corpus.structure == "U-plus-Z":
                u, z = u_plus_z(rng, f, q_bits=corpus.q_bits)
                x = pushforward("U+Z", {"U": u, "Z": z})
                recs = [check_zsupport_lemma(u, z, Fraction(1, 2**8)),
                        check_zsupport_lemma(u, z, Fraction(1, 2**3))]
            else:
                x = gens[corpus.structure](rng, f)
                recs = []
            y = gens["random" if corpus.structure == "U-plus-Z" else corpus.structure](rng, f)
            recs += [check_minentropy_sumproduct(x), check_weak_sumproduct(x), check_noniid(x, y)]
            if f.p is not None:
                recs.append(check_epi_fp(x))
            for r in recs:
                r["field"] = str(f)
                r["trial"] = i
            out.extend(recs)
    epi = [t["values"]["doubling"] for t in out if t["check"] == "epi_fp" and "skip" not in t]
    extra = {"epi_min_doubling": min(epi) if epi else None,
             "epi_fraction_below": {str(e): (sum(1 for d in epi if d < 0.5 - e) / len(epi) if epi else None)
                                    for e in EPS_GRID}}
    ratios = [t["values"]["ratio"] for t in out if t["check"] == "weak_sumproduct" and "skip" not in t]
    extra["weak_min_ratio"] = min(ratios) if ratios else None
    if not ratios:
        extra["weak_insufficient_data"] = True
    return out, extra


def suite_cauchy_davenport(corpus: Corpus, p: int = 7) -> tuple:
    res = cauchy_davenport_exhaustive(p)
    out = [{"check": "cauchy_davenport", "inputs_digest": f"F{p}-exhaustive", "values": res,
            "slack": res["min_slack"], "pass": res["violations"] == 0}]
    f = FieldSpec.prime(p)
    cand = []
    for i in range(corpus.trials):
        rng = substream(corpus.seed, "entropic-cd", i)
        r = check_entropic_cd(random_dist(rng, f, p), random_dist(rng, f, p))
        r["trial"] = i
        cand.append(r)
    out.extend(cand)
    return out, {"candidate_violations": sum(1 for r in cand if not r["values"]["holds"])}


def binomial_gap(n: int) -> float:
    return shannon(binomial_law(n)).bits - 0.5 * math.log2(math.pi * math.e * n / 2)


def suite_binomial(corpus: Corpus, exps=range(6, 13), n_doubling: int = 1024) -> tuple:
    out = []
    gaps = []
    for e in exps:
        n = 2**e
        g = binomial_gap(n)
        gaps.append(abs(g))
        out.append(_rec("binomial_gap", (), {"n": n, "gap": g}))
    mono = all(b <= a for a, b in zip(gaps, gaps[1:]))
    out.append({"check": "binomial_gap_monotone", "inputs_digest": "binomial", "values": {"abs_gaps": gaps},
                "slack": 0.02 - gaps[-1], "pass": mono and gaps[-1] <= 0.02})
    dbl = shannon(binomial_law(2 * n_doubling)).bits - shannon(binomial_law(n_doubling)).bits
    out.append({"check": "binomial_doubling", "inputs_digest": "binomial",
                "values": {"n": n_doubling, "doubling": dbl},
                "slack": min(dbl - 0.48, 0.52 - dbl), "pass": 0.48 <= dbl <= 0.52})
    # X_{2n} is the law of X_n + X_n'; checked exactly at a size the engine handles quickly
    small = 64
    ok = pushforward("X+Y", {"X": binomial_law(small), "Y": binomial_law(small)}) == binomial_law(2 * small)
    out.append({"check": "binomial_convolution", "inputs_digest": "binomial", "values": {"n": small},
                "slack": None, "pass": ok})
    return out, {}


def suite_flat(corpus: Corpus) -> tuple:
    out = []
    ex = Dist(FieldSpec.rationals(), {0: Fraction(1, 2), 1: Fraction(1, 4), 2: Fraction(1, 4)})
    mix = decompose_flat(ex)
    probs = validate_mixture(mix, ex)
    out.append({"check": "flat_example", "inputs_digest": digest(ex),
                "values": {"parts": len(mix.parts), "mixture": mix.to_json(), "problems": probs},
                "slack": None, "pass": not probs and len(mix.parts) == 2})
    fields = _fields(corpus.fields)
    for i in range(corpus.trials):
        f = fields[i % len(fields)]
        rng = substream(corpus.seed, "flat", i)
        x = random_dist(rng, f, corpus.max_support, corpus.denom_bits, corpus.q_bits)
        m = floor_min_entropy(x)
        mix = decompose_flat(x, m)
        probs = validate_mixture(mix, x)
        out.append({"check": "flat", "inputs_digest": digest(x), "field": str(f), "trial": i,
                    "values": {"m": m, "parts": len(mix.parts), "problems": probs},
                    "slack": None, "pass": not probs})
    return out, {}


def naive_energy(field: FieldSpec, A, B, C) -> int:
    """Sextuple loop oracle for #{a(b+c) = a'(b'+c')}."""
    n = 0
    for a in A:
        for b in B:
            for c in C:
                u = field.mul(a, field.add(b, c))
                for a2 in A:
                    for b2 in B:
                        for c2 in C:
                            if field.mul(a2, field.add(b2, c2)) == u:
                                n += 1
    return n


def naive_rnr(field: FieldSpec, pts) -> int:
    n = 0
    prods = [field.mul(field.sub(a, b), field.sub(c, d)) for (a, c) in pts for (b, d) in pts]
    z = field.zero()
    for u in prods:
        if u == z:
            continue
        for v in prods:
            if u == v:
                n += 1
    return n


def suite_energy(corpus: Corpus, max_size: int = 6) -> tuple:
    out = []
    fields = [FieldSpec.prime(7), FieldSpec.rationals()]
    for i in range(corpus.trials):
        f = fields[i % 2]
        rng = substream(corpus.seed, "energy", i)

        def rset():
            k = int(rng.integers(1, max_size + 1))
            return random_support(rng, f, k, 4, avoid_zero=True)

        A, B, C = rset(), rset(), rset()
        n = energy_product_sum(f, A, B, C)
        n0 = naive_energy(f, A, B, C)
        P, Qp = koh_construction(f, A, B, C)
        inc = count_incidences(f, P, Qp)
        pts = [(a, c) for a, c in zip(rset(), rset())]
        e, e0 = energy_rnr(f, pts), naive_rnr(f, pts)
        ok = n == n0 == inc and e == e0
        out.append({"check": "energy", "inputs_digest": hashlib.sha256(repr((str(f), A, B, C, pts)).encode()).hexdigest()[:16],
                    "field": str(f), "trial": i,
                    "values": {"sizes": [len(A), len(B), len(C)], "N": n, "N_naive": n0, "incidences": inc,
                               "rnr": e, "rnr_naive": e0},
                    "slack": None, "pass": ok})
    return out, {}


def suite_collision_growth(corpus: Corpus, ks=(8, 16, 32, 64), p: int = 4099) -> tuple:
    f = FieldSpec.prime(p)
    out = []
    for k in ks:
        for i in range(corpus.trials):
            rng = substream(corpus.seed, "collision-growth", k, i)
            A = random_support(rng, f, k, avoid_zero=True)
            h2v = collision_entropy_abc(f, A, A, A).bits
            size = expander_size(f, A, A, A)
            guard = float(EXPANDER_GUARD) * k**1.5
            out.append({"check": "collision_growth", "inputs_digest": hashlib.sha256(repr(A).encode()).hexdigest()[:16],
                        "trial": i, "values": {"k": k, "H2": h2v, "deficit": 1.5 * math.log2(k) - h2v,
                                               "expander": size, "guard": guard},
                        "slack": size - guard, "pass": size >= guard})
    return out, {"guard_constant": str(EXPANDER_GUARD)}


def suite_extractor(corpus: Corpus, p: int = 257, rounds: int = 2, set_size: int = 8) -> tuple:
    out = []
    f5 = FieldSpec.prime(5)
    tr = condense_exact(Dist.uniform(f5, [1, 2]), 1)
    want = Dist(f5, {1: Fraction(1, 4), 2: Fraction(1, 8), 3: Fraction(3, 8), 4: Fraction(1, 4)})
    out.append({"check": "extractor_example", "inputs_digest": digest(tr.laws[0]),
                "values": {"levels": tr.levels},
                "slack": None, "pass": tr.laws[1] == want and min_entropy(tr.laws[1]).exact == Fraction(3, 8)})
    f = FieldSpec.prime(p)
    gains = []
    for i in range(corpus.trials):
        rng = substream(corpus.seed, "extractor", i)
        x = Dist.uniform(f, random_support(rng, f, set_size, avoid_zero=True))
        tr = condense_exact(x, rounds)
        direct = pushforward("X*(Y+Z)", {"X": x, "Y": x, "Z": x})
        hm = [lv["hmin"] for lv in tr.levels]
        floor_ok = []
        for a, b, law in zip(hm, hm[1:], tr.laws):
            pnz = float(_p_nonzero(law))
            floor_ok.append({"ok": b >= a - math.log2(1 / pnz) - TOL, "zero_free": pnz == 1})
        g = [b - a for a, b in zip(hm, hm[1:])]
        gains.extend(g)
        out.append({"check": "extractor_exact", "inputs_digest": digest(x), "trial": i,
                    "values": {"levels": tr.levels, "gains": g, "gain_ratio": [b / a if a else None for a, b in zip(hm, hm[1:])],
                               "gain_floor_ok": floor_ok},
                    "slack": None, "pass": tr.laws[1] == direct})
    return out, {"gain_min": min(gains) if gains else None, "gain_max": max(gains) if gains else None,
                 "gain_floor_failures_zero_free": _floor_failures(out, True),
                 "gain_floor_failures_with_zero": _floor_failures(out, False)}


def _floor_failures(trials, zero_free):
    return sum(1 for t in trials for r in t["values"].get("gain_floor_ok", [])
               if r["zero_free"] == zero_free and not r["ok"])


def suite_gradient(corpus: Corpus, h: float = 1e-6, tol: float = 1e-5, max_support: int = 10) -> tuple:
    out = []
    for fs in ("p=101", "Q"):
        f = FieldSpec.parse(fs)
        for i in range(corpus.trials):
            rng = substream(corpus.seed, "gradient", fs, i)
            k = int(rng.integers(2, max_support + 1))
            sup = random_support(rng, f, k, 6, avoid_zero=True)
            o = Objective("max", f, tuple(sup))
            p = rng.uniform(0.05, 1.0, size=len(sup))
            p = p / p.sum()
            dev = {}
            for which in ("H", "H_add", "H_mul"):
                g = component_gradient(o, p, which)
                fd = np.empty(len(p))
                for j in range(len(p)):
                    e = np.zeros(len(p))
                    e[j] = h
                    fd[j] = (entropy_terms(o, p + e)[which] - entropy_terms(o, p - e)[which]) / (2 * h)
                dev[which] = float(np.abs(g - fd).max())
            worst = max(dev.values())
            out.append({"check": "gradient", "inputs_digest": hashlib.sha256(p.tobytes() + repr(sup).encode()).hexdigest()[:16],
                        "field": fs, "trial": i, "values": dev, "slack": tol - worst, "pass": worst <= tol})
    return out, {}


def suite_freiman(corpus: Corpus, fields=("p=1009", "Q"), per_field: int = 5, dists: int = 50) -> tuple:
    out = []
    f11 = FieldSpec.prime(11)
    bad = GapSpec(f11, 0, (1,), (2,), True)
    try:
        FreimanBoxMap(bad)
        rejected = False
    except PreconditionError:
        rejected = True
    out.append({"check": "freiman_reject", "inputs_digest": "F11-[-2,2]", "values": {"rejected": rejected},
                "slack": None, "pass": rejected})
    for fs in fields:
        f = FieldSpec.parse(fs)
        for j in range(per_field):
            rng = substream(corpus.seed, "freiman", fs, j)
            q = three_proper_gap(rng, f)
            phi = FreimanBoxMap(q).as_dict()
            iso = is_freiman_isomorphism(phi, f, None)
            elems = sorted(phi)
            worst = 0.0
            for t in range(dists):
                k = int(rng.integers(1, min(12, len(elems)) + 1))
                sup = [elems[s] for s in rng.choice(len(elems), size=k, replace=False)]
                x = Dist.from_weights(f, sup, rng.integers(1, 2**10 + 1, size=k).tolist())
                h_src = H("X+Y", {"X": x, "Y": x})
                y = x.map(phi.__getitem__, field=None)
                h_dst = shannon(y.combine(y, vector_add, field=None)).bits
                worst = max(worst, abs(h_src - h_dst))
            out.append({"check": "freiman", "inputs_digest": hashlib.sha256(repr(q.to_json()).encode()).hexdigest()[:16],
                        "field": fs, "trial": j,
                        "values": {"progression": q.to_json(), "size": len(phi), "isomorphism": iso,
                                   "max_entropy_gap": worst},
                        "slack": TOL - worst, "pass": iso and worst <= TOL})
    return out, {}


SUITES = {
    "exact-inequalities": suite_exact_inequalities,
    "deficits": suite_deficits,
    "cauchy-davenport": suite_cauchy_davenport,
    "binomial": suite_binomial,
    "flat": suite_flat,
    "energy": suite_energy,
    "collision-growth": suite_collision_growth,
    "extractor": suite_extractor,
    "gradient": suite_gradient,
    "freiman": suite_freiman,
}


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def run_suite(name: str, corpus: Corpus | None = None, out_path=None) -> dict:
    if name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    corpus = corpus or Corpus()
    t0 = time.perf_counter()
    trials, extra = SUITES[name](corpus) if corpus.trials > 0 or name in ("cauchy-davenport", "binomial") \
        else ([], {})
    report = _clean({"suite": name, "corpus": corpus.to_json(), "seed": corpus.seed,
                     "trials": trials, "summary": _summary(trials, extra), "version": __version__})
    report["wall_time"] = time.perf_counter() - t0
    if out_path is not None:
        with open(out_path, "w") as fh:
            fh.write(dumps_report(report))
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


def report_digest(report: dict) -> str:
    """sha256 of the report with the wall-time field removed."""
    r = {k: v for k, v in report.items() if k != "wall_time"}
    return hashlib.sha256(dumps_report(r).encode()).hexdigest()
