"""Searching the simplex (and supports) for small entropic doubling.

Points are double-precision mass vectors on a fixed support.  The
functionals are written as plain formulas in the raw masses, so their
analytic gradients can be compared against finite differences without
any renormalisation in between.  Final points are rationalised and
re-evaluated exactly through the distributions module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dist import Dist, entropy_of, shannon
from .errors import PreconditionError, SumprodError, UsageError
from .field import FieldSpec
from .rng import substream

INV_LN2 = 1.0 / math.log(2)
DEFAULT_FLOOR = 1e-9
RATIONAL_BITS = 20
KINDS = ("additive", "multiplicative", "max", "gap")
_ALIASES = {"additivedoubling": "additive", "multiplicativedoubling": "multiplicative",
            "maxdoubling": "max", "conjecturegap": "gap"}


class SearchDiverged(SumprodError, RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def _pair_table(field: FieldSpec, support, op):
    """Index table ``t[i, j]`` of ``s_i op s_j`` among the distinct outcomes."""
    vals = [[op(a, b) for b in support] for a in support]
    index = {v: i for i, v in enumerate(sorted({v for row in vals for v in row}))}
    return np.array([[index[v] for v in row] for row in vals], dtype=np.int64), len(index)


@dataclass(frozen=True)
class Objective:
    kind: str
    field: FieldSpec
    support: tuple
    delta: Fraction = Fraction(0)

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in KINDS:
            raise UsageError(f"unknown objective {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        sup = tuple(sorted({self.field.coerce(s) for s in self.support}))
        if len(sup) != len(self.support):
            raise UsageError("support atoms must be distinct")
        if len(sup) < 1:
            raise UsageError("empty support")
        if kind != "additive" and self.field.zero() in sup:
            raise PreconditionError("multiplicative objectives need 0 outside the support")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "delta", Fraction(self.delta))
        add, nadd = _pair_table(self.field, sup, self.field.add)
        mul, nmul = _pair_table(self.field, sup, self.field.mul)
        object.__setattr__(self, "_add", (add, nadd))
        object.__setattr__(self, "_mul", (mul, nmul))

    @property
    def size(self) -> int:
        return len(self.support)


def _conv(table, p):
    idx, n = table
    return np.bincount(idx.ravel(), weights=np.outer(p, p).ravel(), minlength=n)


def _h(v) -> float:
    v = v[v > 0]
    return float(-(v * np.log2(v)).sum())


def entropy_terms(o: Objective, p) -> dict:
    """``H(X)``, ``H(X+X')`` and ``H(XX')`` as formulas in the raw masses ``p``."""
    p = np.asarray(p, dtype=np.float64)
    return {"H": _h(p), "H_add": _h(_conv(o._add, p)), "H_mul": _h(_conv(o._mul, p))}


def _grad_hx(p):
    return -np.log2(p) - INV_LN2


def _grad_hconv(table, p):
    idx, _ = table
    q = _conv(table, p)
    lq = np.log2(q) + INV_LN2
    return -2.0 * (lq[idx] * p[None, :]).sum(axis=1)


def _active(o, t):
    # ties go to the additive branch
    return "add" if t["H_add"] >= t["H_mul"] else "mul"


def objective_value(o: Objective, p) -> float:
    t = entropy_terms(o, p)
    if o.kind == "additive":
        return t["H_add"] - t["H"]
    if o.kind == "multiplicative":
        return t["H_mul"] - t["H"]
    top = max(t["H_add"], t["H_mul"])
    if o.kind == "max":
        return top - t["H"]
    return top - (1 + float(o.delta)) * t["H"]


def gradient(o: Objective, p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if (p <= 0).any():
        raise UsageError("gradient needs a strictly positive point")
    if o.kind == "additive":
        branch = "add"
    elif o.kind == "multiplicative":
        branch = "mul"
    else:
        branch = _active(o, entropy_terms(o, p))
    g = _grad_hconv(o._add if branch == "add" else o._mul, p)
    scale = 1 + float(o.delta) if o.kind == "gap" else 1.0
    return g - scale * _grad_hx(p)


def component_gradient(o: Objective, p, which: str) -> np.ndarray:
    """Gradient of one of ``"H"``, ``"H_add"``, ``"H_mul"``."""
    p = np.asarray(p, dtype=np.float64)
    if which == "H":
        return _grad_hx(p)
    return _grad_hconv(o._add if which == "H_add" else o._mul, p)


def project(v, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Euclidean projection onto ``{p : sum p = 1, p_i >= floor}``."""
    v = np.asarray(v, dtype=np.float64)
    n = len(v)
    if n * floor >= 1:
        raise UsageError("floor too large for the support size")
    radius = 1.0 - n * floor
    w = v - floor
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - radius
    k = np.nonzero(u - css / np.arange(1, n + 1) > 0)[0][-1]
    theta = css[k] / (k + 1)
    out = np.maximum(w - theta, 0.0) + floor
    return out / math.fsum(out.tolist())


def rationalize(p, bits: int = RATIONAL_BITS) -> list:
    """Integer weights >= 1 summing to exactly ``2**bits``."""
    total = 1 << bits
    w = [max(1, int(round(x * total))) for x in p]
    i = max(range(len(w)), key=lambda j: (w[j], -j))
    w[i] += total - sum(w)
    if w[i] < 1:
        raise UsageError("support too large to rationalise at this denominator")
    return w


def audit(o: Objective, weights) -> float:
    """Exact re-evaluation of the objective at integer ``weights``."""
    d = Dist.from_weights(o.field, o.support, weights)
    b = {"X": d, "Y": d}
    hx = shannon(d).bits
    hadd = entropy_of("X+Y", b).bits
    hmul = entropy_of("X*Y", b).bits
    if o.kind == "additive":
        return hadd - hx
    if o.kind == "multiplicative":
        return hmul - hx
    top = hadd if hadd >= hmul else hmul
    return top - (1 if o.kind == "max" else 1 + float(o.delta)) * hx


@dataclass
class SearchResult:
    objective: Objective
    weights: list  # over 2**RATIONAL_BITS
    value: float  # objective at the rationalised point
    audit: float
    iterations: int
    seed: int
    method: str
    best_trace: list  # best-so-far value at each iteration

    @property
    def point(self) -> tuple:
        total = sum(self.weights)
        return tuple(Fraction(w, total) for w in self.weights)

    def to_json(self) -> dict:
        f = self.objective.field
        return {"objective": self.objective.kind, "delta": str(self.objective.delta),
                "field": str(f), "support": [f.format_scalar(s) for s in self.objective.support],
                "point": [f"{w}/{sum(self.weights)}" for w in self.weights],
                "value": self.value, "audit": self.audit, "iterations": self.iterations,
                "seed": self.seed, "method": self.method}


def _guard(val, trace):
    if not math.isfinite(val):
        raise SearchDiverged(f"objective became {val}", trace)
    return val


def _pg(o, x, iters, step, floor, trace):
    f = _guard(objective_value(o, x), trace)
    t = step
    it = 0
    for it in range(1, iters + 1):
        g = gradient(o, x)
        if not np.isfinite(g).all():
            raise SearchDiverged("gradient is not finite", trace)
        moved = False
        for _ in range(40):
            y = project(x - t * g, floor)
            fy = _guard(objective_value(o, y), trace)
            if fy < f:
                x, f, moved = y, fy, True
                t *= 1.5
                break
            t *= 0.5
        trace.append(f)
        if not moved:
            break
    return x, f, it


def _anneal(o, x, iters, step, floor, rng, trace):
    f = _guard(objective_value(o, x), trace)
    best, fbest = x, f
    temp0 = 0.05
    for k in range(iters):
        temp = temp0 * (1 - k / iters) + 1e-6
        y = project(x * np.exp(step * rng.standard_normal(len(x))), floor)
        fy = _guard(objective_value(o, y), trace)
        if fy <= f or rng.random() < math.exp(-(fy - f) / temp):
            x, f = y, fy
            if f < fbest:
                best, fbest = x, f
        trace.append(fbest)
    return best, fbest, iters


def search(o: Objective, method: str = "pg", iters: int = 500, step: float = 0.05,
           floor: float = DEFAULT_FLOOR, seed: int = 0, init=None) -> SearchResult:
    rng = substream(seed, "search", method)
    if init is None:
        x = project(np.full(o.size, 1.0 / o.size) * np.exp(0.1 * rng.standard_normal(o.size)), floor)
    else:
        x = project(np.asarray(init, dtype=np.float64), floor)
    trace = []
    if method == "pg":
        x, _, it = _pg(o, x, iters, step, floor, trace)
    elif method in ("anneal", "sa", "simulated-annealing"):
        x, _, it = _anneal(o, x, iters, step, floor, rng, trace)
        method = "anneal"
    else:
        raise UsageError(f"unknown method {method!r}")
    w = rationalize(x)
    xr = np.array(w, dtype=np.float64) / (1 << RATIONAL_BITS)
    return SearchResult(o, w, objective_value(o, xr), audit(o, w), it, seed, method, trace)


def support_search(field: FieldSpec, k: int, kind: str = "gap", delta=Fraction(1, 3),
                   iters: int = 200, inner_iters: int = 30, seed: int = 0) -> SearchResult:
    """Annealing over k-subsets of F_p (0 excluded), each scored by a short inner search."""
    if field.p is None:
        raise UsageError("support search runs over F_p")
    if not 1 <= k < field.p:
        raise UsageError("need 1 <= k < p")
    rng = substream(seed, "support-search")
    pool = list(range(1, field.p))

    def score(sup):
        o = Objective(kind, field, tuple(sup), delta)
        return search(o, "pg", inner_iters, seed=seed)

    cur = sorted(rng.choice(pool, size=k, replace=False).tolist())
    res = score(cur)
    best = res
    for i in range(iters):
        out = rng.integers(0, k)
        cand_in = int(rng.choice([x for x in pool if x not in cur]))
        nxt = sorted(cur[:out] + cur[out + 1:] + [cand_in])
        r = score(nxt)
        temp = 0.05 * (1 - i / iters) + 1e-6
        if r.value <= res.value or rng.random() < math.exp(-(r.value - res.value) / temp):
            cur, res = nxt, r
            if res.value < best.value:
                best = res
    best.iterations = iters
    best.method = "support-anneal"
    return best
