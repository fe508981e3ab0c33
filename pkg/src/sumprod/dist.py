"""Finitely supported distributions with exact rational masses.

Every law is held as integer weights over a common denominator, which is
how the pushforward engine accumulates product measures without touching
``Fraction`` in the inner loop.  Shannon entropy is evaluated in double
precision from those exact weights, one term per atom in canonical key
order, and summed with :func:`math.fsum`, so the value is reproducible and
independent of enumeration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import comb, gcd
from typing import Mapping

import numpy as np

from . import expr as ex
from .errors import BudgetError, DomainError, FieldMismatchError, UsageError
from .field import FieldSpec

DEFAULT_BUDGET = 10**7
TOL = 1e-9

_I64_SAFE = 2**62


def _lcm(a, b):
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class EntropyValue:
    """Entropy in bits.  ``exact`` is 2**(-bits) when that is a single rational."""

    bits: float
    exact: Fraction | None = None

    def __float__(self):
        return self.bits


class Dist:
    """Immutable probability law on canonical keys (raw scalars or tuples)."""

    def __init__(self, field: FieldSpec | None, atoms: Mapping):
        if not atoms:
            raise UsageError("a distribution needs at least one atom")
        canon = {}
        for k, m in atoms.items():
            if field is not None:
                k = tuple(field.coerce(v) for v in k) if isinstance(k, tuple) else field.coerce(k)
            m = Fraction(m)
            if m <= 0:
                raise UsageError(f"mass of {k!r} must be positive, got {m}")
            if k in canon:
                raise UsageError(f"duplicate atom {k!r}")
            canon[k] = m
        if sum(canon.values()) != 1:
            raise UsageError(f"masses sum to {sum(canon.values())}, not 1")
        self.field = field
        self._keys = tuple(sorted(canon))
        self._masses = tuple(canon[k] for k in self._keys)

    @classmethod
    def _from_sorted_weights(cls, field, keys, weights, total):
        self = cls.__new__(cls)
        self.field = field
        self._keys = tuple(keys)
        g = reduce(gcd, weights, total)
        ws = [w // g for w in weights]
        t = total // g
        self._masses = tuple(Fraction(w, t) for w in ws)
        self.__dict__["weights"] = (ws, t)
        return self

    @classmethod
    def from_weights(cls, field, keys, weights) -> "Dist":
        """Law proportional to positive integer ``weights`` (duplicates merge)."""
        acc = {}
        for k, w in zip(keys, weights):
            if field is not None:
                k = tuple(field.coerce(v) for v in k) if isinstance(k, tuple) else field.coerce(k)
            w = int(w)
            if w <= 0:
                raise UsageError("weights must be positive")
            acc[k] = acc.get(k, 0) + w
        ks = sorted(acc)
        return cls._from_sorted_weights(field, ks, [acc[k] for k in ks], sum(acc.values()))

    @classmethod
    def uniform(cls, field, values) -> "Dist":
        vals = set(field.coerce(v) for v in values) if field is not None else set(values)
        return cls.from_weights(field, sorted(vals), [1] * len(vals))

    @classmethod
    def point(cls, field, value) -> "Dist":
        return cls.from_weights(field, [value], [1])

    # mapping protocol

    @property
    def support(self) -> tuple:
        return self._keys

    @property
    def masses(self) -> tuple:
        return self._masses

    def items(self):
        return zip(self._keys, self._masses)

    def as_dict(self) -> dict:
        return dict(self.items())

    def __len__(self):
        return len(self._keys)

    def __iter__(self):
        return iter(self._keys)

    def __contains__(self, key):
        return key in self._index

    def prob(self, key) -> Fraction:
        if self.field is not None and not isinstance(key, tuple):
            key = self.field.coerce(key)
        i = self._index.get(key)
        return self._masses[i] if i is not None else Fraction(0)

    def __eq__(self, other):
        return (isinstance(other, Dist) and self.field == other.field
                and self._keys == other._keys and self._masses == other._masses)

    def __hash__(self):
        return hash((self.field, self._keys, self._masses))

    def __repr__(self):
        body = ", ".join(f"{k}: {m}" for k, m in list(self.items())[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"Dist({self.field}, {{{body}{more}}})"

    @cached_property
    def _index(self):
        return {k: i for i, k in enumerate(self._keys)}

    @cached_property
    def weights(self):
        """``(weights, total)``: integer weights over the least common denominator."""
        total = reduce(_lcm, (m.denominator for m in self._masses), 1)
        return [m.numerator * (total // m.denominator) for m in self._masses], total

    @property
    def p_max(self) -> Fraction:
        return max(self._masses)

    @property
    def is_point_mass(self) -> bool:
        return len(self._keys) == 1

    # transformations

    def map(self, fn, field="same") -> "Dist":
        f = self.field if field == "same" else field
        ws, _ = self.weights
        return Dist.from_weights(f, [fn(k) for k in self._keys], ws)

    def neg(self) -> "Dist":
        return self.map(self.field.neg)

    def scale(self, c) -> "Dist":
        c = self.field.coerce(c)
        if c == 0:
            raise DomainError("scaling by zero is not a bijection")
        return self.map(lambda x: self.field.mul(c, x))

    def marginal(self, i: int) -> "Dist":
        return self.map(lambda k: k[i])

    def condition(self, keep) -> "Dist":
        """Law conditioned on the key lying in ``keep`` (a set or predicate)."""
        pred = keep if callable(keep) else keep.__contains__
        ws, _ = self.weights
        kept = [(k, w) for k, w in zip(self._keys, ws) if pred(k)]
        if not kept:
            raise DomainError("conditioning on an event of probability zero")
        return Dist._from_sorted_weights(self.field, [k for k, _ in kept], [w for _, w in kept],
                                         sum(w for _, w in kept))

    def mass_of(self, keep) -> Fraction:
        pred = keep if callable(keep) else keep.__contains__
        return sum((m for k, m in self.items() if pred(k)), Fraction(0))

    def combine(self, other: "Dist", op, field="same") -> "Dist":
        """Law of ``op(X, Y)`` for independent X ~ self, Y ~ other."""
        f = self.field if field == "same" else field
        wa, _ = self.weights
        wb, _ = other.weights
        keys, ws = [], []
        for ka, a in zip(self._keys, wa):
            for kb, b in zip(other._keys, wb):
                keys.append(op(ka, kb))
                ws.append(a * b)
        return Dist.from_weights(f, keys, ws)

    # numpy views used by the pushforward engine

    @cached_property
    def _np_weights(self):
        ws, total = self.weights
        if total < _I64_SAFE:
            return np.array(ws, dtype=np.int64)
        return np.array(ws, dtype=object)

    @cached_property
    def _int_values(self):
        """Keys as Python ints when every key is an integer, else None."""
        if self.field is None:
            return None
        if self.field.p is not None:
            return list(self._keys)
        if all(not isinstance(k, tuple) and k.denominator == 1 for k in self._keys):
            return [int(k) for k in self._keys]
        return None

    # file format

    def to_tsv(self) -> str:
        if self.field is None:
            raise UsageError("only field-valued laws have a TSV form")
        lines = [f"#field {self.field}"]
        for k, m in self.items():
            if isinstance(k, tuple):
                raise UsageError("tuple-valued laws have no TSV form")
            lines.append(f"{self.field.format_scalar(k)}\t{m.numerator}/{m.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str, field: FieldSpec | None = None) -> "Dist":
        header = None
        atoms = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("#field"):
                    header = FieldSpec.parse(line[len("#field"):].strip())
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) != 2:
                raise UsageError(f"line {lineno}: expected '<scalar>\\t<num>/<den>'")
            f = header or field
            if f is None:
                raise UsageError("missing '#field' header")
            key = f.parse_scalar(parts[0])
            if key in atoms:
                raise UsageError(f"line {lineno}: duplicate atom {parts[0]}")
            try:
                atoms[key] = Fraction(parts[1].strip())
            except (ValueError, ZeroDivisionError) as e:
                raise UsageError(f"line {lineno}: bad mass {parts[1]!r}") from e
        f = header or field
        if field is not None and header is not None and field != header:
            raise FieldMismatchError(f"file declares {header}, expected {field}")
        return cls(f, atoms)


# entropy functionals on weight vectors


def _shannon_from_weights(ws, total) -> float:
    if isinstance(ws, np.ndarray) and ws.dtype == np.int64 and total < 2**53:
        wf = ws.astype(np.float64)
        terms = (wf / total) * (math.log2(total) - np.log2(wf))
        return max(0.0, math.fsum(terms.tolist()))
    lt = math.log2(total)
    return max(0.0, math.fsum((w / total) * (lt - math.log2(w)) for w in ws))


def _sum_squares(ws) -> int:
    return sum(w * w for w in (ws.tolist() if isinstance(ws, np.ndarray) else ws))


def _max_weight(ws) -> int:
    return int(max(ws.tolist() if isinstance(ws, np.ndarray) else ws))


def _uniform_exact(ws, total):
    first = ws[0]
    same = bool((ws == first).all()) if isinstance(ws, np.ndarray) else all(w == first for w in ws)
    if same:
        return Fraction(int(first), int(total))
    return None


def _log2_fraction(q: Fraction) -> float:
    return math.log2(q.numerator) - math.log2(q.denominator)


def shannon(d: Dist) -> EntropyValue:
    ws, total = d.weights
    return EntropyValue(_shannon_from_weights(ws, total), _uniform_exact(ws, total))


def min_entropy(d: Dist) -> EntropyValue:
    pm = d.p_max
    return EntropyValue(max(0.0, -_log2_fraction(pm)), pm)


def collision_entropy(d: Dist) -> EntropyValue:
    ws, total = d.weights
    q = Fraction(_sum_squares(ws), total * total)
    return EntropyValue(max(0.0, -_log2_fraction(q)), q)


_FUNCTIONALS = {"shannon", "min", "collision"}


class _Law:
    """Grouped counts of a pushforward: sorted keys, integer counts, total."""

    def __init__(self, field, keys, counts, total, ncomp):
        self.field = field
        self._keys = keys  # a list, or a zero-argument decoder called on demand
        self.counts = counts
        self.total = total
        self.ncomp = ncomp

    @property
    def keys(self):
        if callable(self._keys):
            self._keys = self._keys()
        return self._keys

    def entropy(self, kind) -> EntropyValue:
        if kind == "shannon":
            return EntropyValue(_shannon_from_weights(self.counts, self.total),
                                _uniform_exact(self.counts, self.total))
        if kind == "collision":
            q = Fraction(_sum_squares(self.counts), self.total * self.total)
            return EntropyValue(max(0.0, -_log2_fraction(q)), q)
        if kind == "min":
            q = Fraction(_max_weight(self.counts), self.total)
            return EntropyValue(max(0.0, -_log2_fraction(q)), q)
        raise UsageError(f"unknown entropy kind {kind!r}")

    def to_dist(self) -> Dist:
        f = self.field
        if f.p is None:
            conv = lambda v: v if isinstance(v, Fraction) else Fraction(int(v))
        else:
            conv = int
        if self.ncomp == 1:
            keys = [conv(k) for k in self.keys]
        else:
            keys = [tuple(conv(v) for v in k) for k in self.keys]
        counts = self.counts.tolist() if isinstance(self.counts, np.ndarray) else list(self.counts)
        return Dist._from_sorted_weights(f, keys, [int(c) for c in counts], int(self.total))


def _as_components(q):
    if isinstance(q, ex.Query):
        return q.components
    if isinstance(q, str):
        text = q.strip()
        if "[" in text:
            return ex.parse_query(text).components
        return tuple(ex.parse_expr(part) for part in _split_top(text))
    if isinstance(q, (tuple, list)):
        return tuple(ex.parse_expr(c) if isinstance(c, str) else c for c in q)
    return (q,)


def _split_top(text):
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _resolve_field(bindings, names, field):
    fields = {bindings[n].field for n in names}
    if field is not None:
        fields.add(field)
    if len(fields) > 1:
        raise FieldMismatchError("bound distributions live in different fields: "
                                 + ", ".join(sorted(map(str, fields))))
    if not fields:
        raise UsageError("constant queries need an explicit field")
    f = fields.pop()
    if f is None:
        raise UsageError("expression queries need field-valued distributions")
    return f


def _bound(e, bounds):
    if isinstance(e, ex.Var):
        return bounds[e.name]
    if isinstance(e, ex.Const):
        return abs(e.value)
    if isinstance(e, ex.Neg):
        return _bound(e.operand, bounds)
    a, b = _bound(e.left, bounds), _bound(e.right, bounds)
    return a * b if isinstance(e, ex.Mul) else a + b


def _eval(e, env, field, mode):
    """Evaluate over broadcastable numpy arrays.  mode: 'mod', 'int' or 'object'."""
    p = field.p
    if isinstance(e, ex.Var):
        return env[e.name]
    if isinstance(e, ex.Const):
        if p is not None:
            return e.value % p
        return e.value if mode == "int" else Fraction(e.value)
    if isinstance(e, ex.Neg):
        v = -_eval(e.operand, env, field, mode)
        return v % p if p is not None else v
    a = _eval(e.left, env, field, mode)
    b = _eval(e.right, env, field, mode)
    if isinstance(e, ex.Add):
        v = a + b
    elif isinstance(e, ex.Sub):
        v = a - b
    else:
        v = a * b
    return v % p if p is not None else v


def _law(q, bindings, field=None, budget=DEFAULT_BUDGET) -> _Law:
    comps = _as_components(q)
    if not comps:
        raise UsageError("empty query")
    names = set()
    for c in comps:
        names |= ex.variables(c)
    missing = sorted(n for n in names if n not in bindings)
    if missing:
        raise UsageError(f"unbound variable(s): {', '.join(missing)}")
    names = sorted(names)
    f = _resolve_field(bindings, names, field)
    dists = [bindings[n] for n in names]
    size = math.prod(len(d) for d in dists)
    if size > budget:
        raise BudgetError(f"product support {size} exceeds enumeration budget {budget}",
                          size=size, budget=budget)
    total = math.prod(d.weights[1] for d in dists)

    int_vals = [d._int_values for d in dists]
    if f.p is not None:
        mode = "mod" if f.p < 2**31 else "object"
    elif all(v is not None for v in int_vals):
        bounds = {n: max(abs(x) for x in v) for n, v in zip(names, int_vals)}
        mode = "int" if all(_bound(c, bounds) < _I64_SAFE for c in comps) else "object"
    else:
        mode = "object"

    k = len(dists)
    env = {}
    for axis, (n, d) in enumerate(zip(names, dists)):
        shape = [1] * k
        shape[axis] = len(d)
        if mode in ("mod", "int"):
            arr = np.array(int_vals[axis], dtype=np.int64)
        elif f.p is not None:
            arr = np.array([int(x) for x in d.support], dtype=object)
        else:
            arr = np.empty(len(d), dtype=object)
            arr[:] = list(d.support)
        env[n] = arr.reshape(shape)
    full = tuple(len(d) for d in dists)

    if total < _I64_SAFE:
        w = np.ones((), dtype=np.int64)
    else:
        w = np.array(1, dtype=object)
    for axis, d in enumerate(dists):
        shape = [1] * k
        shape[axis] = len(d)
        dw = d._np_weights if total < _I64_SAFE else np.array(d.weights[0], dtype=object)
        w = w * dw.reshape(shape)
    w = np.broadcast_to(w, full).ravel()

    cols = []
    for c in comps:
        v = _eval(c, env, f, mode)
        if not isinstance(v, np.ndarray):
            v = np.array(v, dtype=np.int64 if mode != "object" else object)
        cols.append(np.broadcast_to(v, full).ravel())

    ncomp = len(cols)
    if mode != "object" and w.dtype == np.int64:
        keys, counts = _group_int64(cols, w)
    else:
        keys, counts = _group_python(cols, w)
    return _Law(f, keys, counts, total, ncomp)


def _group_int64(cols, w):
    offs = [int(c.min()) for c in cols]
    spans = [int(c.max()) - o + 1 for c, o in zip(cols, offs)]
    if math.prod(spans) < _I64_SAFE:
        key = np.zeros(cols[0].shape, dtype=np.int64)
        for c, o, s in zip(cols, offs, spans):
            key = key * s + (c - o)
        order = np.argsort(key, kind="stable")
        sk = key[order]
        starts = np.concatenate(([0], np.flatnonzero(np.diff(sk)) + 1))
        counts = np.add.reduceat(w[order], starts)
        uk = sk[starts]
        if len(cols) == 1:
            return (lambda: (uk + offs[0]).tolist()), counts

        def decode():
            digits = []
            rem = uk.copy()
            for s in reversed(spans):
                digits.append(rem % s)
                rem //= s
            digits.reverse()
            rows = np.stack([dg + o for dg, o in zip(digits, offs)], axis=1)
            return [tuple(r) for r in rows.tolist()]

        return decode, counts
    stacked = np.stack(cols, axis=1)
    uniq, inv = np.unique(stacked, axis=0, return_inverse=True)
    counts = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(counts, inv.ravel(), w)
    return [tuple(r) for r in uniq.tolist()], counts


def _group_python(cols, w):
    acc = {}
    ws = w.tolist()
    if len(cols) == 1:
        for key, x in zip(cols[0].tolist(), ws):
            acc[key] = acc.get(key, 0) + x
    else:
        for key, x in zip(zip(*(c.tolist() for c in cols)), ws):
            acc[key] = acc.get(key, 0) + x
    keys = sorted(acc)
    return keys, [int(acc[k]) for k in keys]


def pushforward(q, bindings: Mapping[str, Dist], field=None, budget=DEFAULT_BUDGET) -> Dist:
    """Exact law of an expression tuple under independent bindings.

    ``q`` may be a parsed :class:`~sumprod.expr.Query`, an expression, a
    tuple of expressions, or text such as ``"X*Y, X*Z"``.  A one-component
    query yields a law on scalars; longer queries yield a law on tuples.
    """
    return _law(q, bindings, field, budget).to_dist()


def entropy_of(q, bindings: Mapping[str, Dist], kind="shannon", field=None,
               budget=DEFAULT_BUDGET) -> EntropyValue:
    if isinstance(q, str) and "[" in q:
        q = ex.parse_query(q.strip())
    if isinstance(q, ex.Query):
        if q.kind == "ruzsa":
            if len(q.components) != 2:
                raise UsageError("dR takes exactly two expressions")
            a = pushforward(q.components[0], bindings, field, budget)
            b = pushforward(q.components[1], bindings, field, budget)
            return ruzsa_distance(a, b)
        kind = q.kind
    if kind not in _FUNCTIONALS:
        raise UsageError(f"unknown entropy kind {kind!r}")
    return _law(q, bindings, field, budget).entropy(kind)


def H(q, bindings, **kw) -> float:
    """Shannon entropy in bits of a query; shorthand used by the checks."""
    return entropy_of(q, bindings, "shannon", **kw).bits


def ruzsa_distance(x: Dist, y: Dist) -> EntropyValue:
    if x.field != y.field:
        raise FieldMismatchError(f"{x.field} vs {y.field}")
    diff = entropy_of("X-Y", {"X": x, "Y": y}).bits
    return EntropyValue(diff - 0.5 * shannon(x).bits - 0.5 * shannon(y).bits)


def conditional_entropy(joint: Dist, given: int = 0) -> EntropyValue:
    """Entropy of the other coordinate of a pair law, given coordinate ``given``.

    Evaluated from the definition as the average over the conditioning value
    of the entropy of the conditional law.
    """
    if given not in (0, 1):
        raise UsageError("given must be 0 or 1")
    if any(not isinstance(k, tuple) or len(k) != 2 for k in joint.support):
        raise UsageError("conditional entropy needs a law on pairs")
    other = 1 - given
    ws, total = joint.weights
    groups = {}
    for k, w in zip(joint.support, ws):
        groups.setdefault(k[given], {}).setdefault(k[other], 0)
        groups[k[given]][k[other]] += w
    terms = []
    for y in sorted(groups):
        cws = [groups[y][x] for x in sorted(groups[y])]
        sub = sum(cws)
        terms.append((sub / total) * _shannon_from_weights(cws, sub))
    return EntropyValue(max(0.0, math.fsum(terms)))


def threshold_condition(q, bindings: Mapping[str, Dist], delta, z: str = "Z",
                        budget=DEFAULT_BUDGET):
    """Law of ``q`` with ``z`` conditioned on ``A = {t : P(z = t) >= delta}``.

    Returns ``(law, P(z in A))``, both exact.
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise UsageError("threshold must lie strictly between 0 and 1")
    if z not in bindings:
        raise UsageError(f"unbound variable(s): {z}")
    zd = bindings[z]
    keep = {k for k, m in zd.items() if m >= delta}
    if not keep:
        raise DomainError(f"threshold {delta} exceeds the largest mass {zd.p_max}")
    new = dict(bindings)
    new[z] = zd.condition(keep)
    return pushforward(q, new, budget=budget), zd.mass_of(keep)


def binomial_law(n: int) -> Dist:
    """Binomial(n, 1/2) on the integers 0..n inside Q."""
    if n < 0:
        raise UsageError("n must be non-negative")
    q = FieldSpec.rationals()
    keys = [Fraction(k) for k in range(n + 1)]
    return Dist._from_sorted_weights(q, keys, [comb(n, k) for k in range(n + 1)], 2**n)


def h2(q: float) -> float:
    """Binary entropy function."""
    if q <= 0 or q >= 1:
        return 0.0
    return -q * math.log2(q) - (1 - q) * math.log2(1 - q)
