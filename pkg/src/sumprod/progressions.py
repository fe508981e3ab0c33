"""Sumsets, generalised arithmetic progressions and Freiman isomorphisms.

Everything here is decided by exhaustive enumeration; the sets involved are
desk-sized, so no algebraic shortcuts are taken.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import BudgetError, DomainError, PreconditionError, UsageError
from .field import FieldSpec

DEFAULT_BUDGET = 10**7


def _check_budget(size, budget, what):
    if size > budget:
        raise BudgetError(f"{what}: {size} exceeds budget {budget}", size=size, budget=budget)


def sumset(field: FieldSpec, a, b) -> frozenset:
    return frozenset(field.add(x, y) for x in a for y in b)


def productset(field: FieldSpec, a, b) -> frozenset:
    return frozenset(field.mul(x, y) for x in a for y in b)


def difference_set(field: FieldSpec, a, b) -> frozenset:
    return frozenset(field.sub(x, y) for x in a for y in b)


@dataclass(frozen=True)
class GapSpec:
    """``a + n_1 r_1 + ... + n_d r_d`` with ``n_i`` in ``[0, N_i)`` or ``[-N_i, N_i]``."""

    field: FieldSpec
    a: object
    r: tuple
    N: tuple
    symmetric: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", self.field.coerce(self.a))
        object.__setattr__(self, "r", tuple(self.field.coerce(x) for x in self.r))
        object.__setattr__(self, "N", tuple(int(n) for n in self.N))
        if len(self.r) != len(self.N):
            raise UsageError("one bound per generator")
        if any(n < 1 for n in self.N):
            raise UsageError("all N_i must be >= 1")

    @property
    def rank(self) -> int:
        return len(self.r)

    def ranges(self, t=1):
        """Index ranges, dilated by ``t``."""
        t = Fraction(t)
        if self.symmetric:
            return [range(-math.floor(t * n), math.floor(t * n) + 1) for n in self.N]
        return [range(0, math.ceil(t * n)) for n in self.N]

    def index_count(self, t=1) -> int:
        return math.prod(len(r) for r in self.ranges(t))

    def point(self, idx):
        f = self.field
        x = self.a
        for n, g in zip(idx, self.r):
            x = f.add(x, f.mul(f.coerce(n), g))
        return x

    def indices(self, t=1):
        return itertools.product(*self.ranges(t))

    def to_json(self, H=None) -> dict:
        f = self.field
        return {"a": f.format_scalar(self.a), "r": [f.format_scalar(x) for x in self.r],
                "N": list(self.N), "symmetric": self.symmetric,
                "H": [f.format_scalar(h) for h in sorted(H if H is not None else [f.zero()])]}


@dataclass(frozen=True)
class CosetProgression:
    """``H + P`` with H an explicit finite subgroup."""

    P: GapSpec
    H: frozenset = dc_field(default=None)

    def __post_init__(self):
        f = self.P.field
        H = frozenset([f.zero()]) if self.H is None else frozenset(f.coerce(h) for h in self.H)
        object.__setattr__(self, "H", H)
        if f.zero() not in H:
            raise UsageError("subgroup must contain 0")
        for x in H:
            if f.neg(x) not in H or any(f.add(x, y) not in H for y in H):
                raise UsageError("H is not closed under the group law")
        if f.p is not None and len(H) not in (1, f.p):
            raise UsageError("over F_p the only finite subgroups are {0} and F_p")
        if f.p is None and len(H) != 1:
            raise UsageError("Q has no nontrivial finite subgroup")

    @property
    def field(self):
        return self.P.field

    @property
    def rank(self):
        return self.P.rank

    @property
    def symmetric(self):
        return self.P.symmetric

    def to_json(self) -> dict:
        return self.P.to_json(self.H)

    @classmethod
    def from_json(cls, obj, field: FieldSpec) -> "CosetProgression":
        P = GapSpec(field, field.parse_scalar(str(obj["a"])),
                    tuple(field.parse_scalar(str(x)) for x in obj["r"]),
                    tuple(obj["N"]), bool(obj.get("symmetric", False)))
        H = [field.parse_scalar(str(h)) for h in obj.get("H", ["0"])]
        return cls(P, frozenset(H))

    @classmethod
    def loads(cls, text, field):
        return cls.from_json(json.loads(text), field)


def _as_cp(p) -> CosetProgression:
    return p if isinstance(p, CosetProgression) else CosetProgression(p)


def enumerate_progression(prog, t=1, budget=DEFAULT_BUDGET):
    """``(set H+P, number of index tuples)`` (with ``t``-dilated ranges)."""
    cp = _as_cp(prog)
    f = cp.field
    count = cp.P.index_count(t) * len(cp.H)
    _check_budget(count, budget, "progression index count")
    out = set()
    for idx in cp.P.indices(t):
        x = cp.P.point(idx)
        for h in cp.H:
            out.add(f.add(h, x))
    return frozenset(out), count


def is_proper(prog, budget=DEFAULT_BUDGET) -> bool:
    s, n = enumerate_progression(prog, 1, budget)
    return len(s) == n


def is_t_proper(prog, t, budget=DEFAULT_BUDGET) -> bool:
    """All ``h + a + sum n_i r_i`` over the dilated index box are distinct."""
    t = Fraction(t)
    if t <= 0:
        raise UsageError("t must be positive")
    s, n = enumerate_progression(prog, t, budget)
    return len(s) == n


@dataclass(frozen=True)
class SymmetrizeResult:
    progression: CosetProgression
    shift: object
    padded: GapSpec
    ratio: float  # |output set| / |input set after odd padding|


def symmetrize(prog, budget=DEFAULT_BUDGET) -> SymmetrizeResult:
    """Symmetric coset progression of rank <= d+1 containing ``prog``.

    Pads every length to an odd number, writes ``P = x + P'`` with ``P'``
    symmetric, and returns ``H + P' + {-x, 0, x}``.
    """
    cp = _as_cp(prog)
    P, f = cp.P, cp.field
    if P.symmetric:
        halves = P.N
        padded = P
        x = P.a
    else:
        lengths = tuple(n if n % 2 else n + 1 for n in P.N)
        padded = GapSpec(f, P.a, P.r, lengths, False)
        halves = tuple((n - 1) // 2 for n in lengths)
        x = P.a
        for h, g in zip(halves, P.r):
            x = f.add(x, f.mul(f.coerce(h), g))
    gens, bounds = [], []
    for h, g in zip(halves, P.r):
        if h >= 1:
            gens.append(g)
            bounds.append(h)
    if x != f.zero():
        gens.append(x)
        bounds.append(1)
    out = CosetProgression(GapSpec(f, f.zero(), tuple(gens), tuple(bounds), True), cp.H)
    orig, _ = enumerate_progression(cp, 1, budget)
    pad_set, _ = enumerate_progression(CosetProgression(padded, cp.H), 1, budget)
    new_set, _ = enumerate_progression(out, 1, budget)
    if not orig <= new_set:
        raise AssertionError("symmetrized progression does not contain the input")
    return SymmetrizeResult(out, x, padded, len(new_set) / len(pad_set))


class FreimanBoxMap:
    """Coordinates of a 3-proper symmetric GAP ``sum n_i r_i`` in its box."""

    def __init__(self, q: GapSpec, budget=DEFAULT_BUDGET):
        if isinstance(q, CosetProgression):
            if len(q.H) != 1:
                raise PreconditionError("box map needs a progression with trivial subgroup")
            q = q.P
        if not q.symmetric or q.a != q.field.zero():
            raise PreconditionError("box map needs a symmetric progression centred at 0")
        if not is_t_proper(q, 3, budget):
            raise PreconditionError("progression is not 3-proper")
        self.q = q
        self._coords = {q.point(idx): idx for idx in q.indices()}

    def __call__(self, x):
        x = self.q.field.coerce(x)
        try:
            return self._coords[x]
        except KeyError:
            raise DomainError(f"{self.q.field.format_scalar(x)} is not in the progression") from None

    def inverse(self, idx):
        idx = tuple(idx)
        if len(idx) != self.q.rank or any(abs(n) > b for n, b in zip(idx, self.q.N)):
            raise DomainError(f"{idx} is outside the box")
        return self.q.point(idx)

    @property
    def elements(self):
        return self._coords.keys()

    def as_dict(self) -> dict:
        return dict(self._coords)


def freiman_box_map(q: GapSpec, x):
    return FreimanBoxMap(q)(x)


def vector_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _adder(group):
    if group is None:
        return vector_add
    if isinstance(group, FieldSpec):
        return group.add
    return group


def is_freiman_isomorphism(phi, src=None, dst=None, budget=DEFAULT_BUDGET) -> bool:
    """Exhaustive check that ``a1+a2 = a1'+a2'  iff  phi(a1)+phi(a2) = phi(a1')+phi(a2')``.

    ``phi`` maps the source set onto the target set.  ``src``/``dst`` give the
    group law: a FieldSpec, a callable, or None for integer vectors.  The
    quadruple condition is decided by bucketing ordered pairs by their sum on
    each side and checking the two partitions coincide.
    """
    items = list(phi.items())
    n = len(items)
    if len(set(v for _, v in items)) != n:
        return False
    _check_budget(n * n, budget, "ordered pair count")
    add_s, add_d = _adder(src), _adder(dst)
    fwd, back = {}, {}
    for (a1, b1), (a2, b2) in itertools.product(items, repeat=2):
        s, t = add_s(a1, a2), add_d(b1, b2)
        if fwd.setdefault(s, t) != t or back.setdefault(t, s) != s:
            return False
    return True
