"""Exact arithmetic over F_p and Q.

Field elements travel through the library as *raw* canonical values: an
``int`` residue in ``[0, p)`` for F_p and a reduced ``Fraction`` for Q.  Raw
values are hashable and compare structurally, which is what the counting
code needs.  :class:`Scalar` wraps a raw value together with its field for
callers who want operator syntax and mismatch checking.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .errors import DomainError, FieldMismatchError, UsageError

# Bases that make Miller-Rabin deterministic below 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
MAX_PRIME = 2**63 - 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


_INT_RE = re.compile(r"^\s*([+-]?\d+)\s*$")
_FRAC_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")


@dataclass(frozen=True)
class FieldSpec:
    """Either the prime field F_p (``p`` set) or the rationals (``p=None``)."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None:
            if not isinstance(self.p, int) or isinstance(self.p, bool):
                raise UsageError(f"field characteristic must be an integer, got {self.p!r}")
            if not is_prime(self.p):
                raise UsageError(f"{self.p} is not prime")
            if self.p > MAX_PRIME:
                raise UsageError(f"p = {self.p} does not fit a machine word")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls(p)

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        """Accepts ``p=5``, ``5``, ``F5``, ``Q``."""
        t = text.strip()
        if t in ("Q", "q", "QQ", "rationals"):
            return cls.rationals()
        m = re.fullmatch(r"(?:p\s*=\s*|F_?)?(\d+)", t)
        if not m:
            raise UsageError(f"cannot parse field spec {text!r}")
        return cls.prime(int(m.group(1)))

    @property
    def is_prime_field(self) -> bool:
        return self.p is not None

    @property
    def characteristic(self) -> int:
        return self.p or 0

    def __str__(self):
        return f"p={self.p}" if self.p is not None else "Q"

    def __repr__(self):
        return f"FieldSpec({self})"

    # raw-value arithmetic

    def coerce(self, x):
        """Canonical raw value for an int, Fraction, or Scalar of this field."""
        if isinstance(x, Scalar):
            if x.field != self:
                raise FieldMismatchError(f"scalar over {x.field} used in {self}")
            return x.value
        if isinstance(x, bool):
            raise UsageError("booleans are not field elements")
        if self.p is None:
            if isinstance(x, Fraction):
                return x
            if isinstance(x, (int, Rational)):
                return Fraction(x)
            raise UsageError(f"not a rational: {x!r}")
        if isinstance(x, int):
            return x % self.p
        if isinstance(x, Rational):
            num, den = x.numerator, x.denominator
            if den % self.p == 0:
                raise DomainError(f"{x} has no image in F_{self.p}")
            return num * pow(den, -1, self.p) % self.p
        raise UsageError(f"not an F_{self.p} literal: {x!r}")

    def zero(self):
        return 0 if self.p is not None else Fraction(0)

    def one(self):
        return 1 if self.p is not None else Fraction(1)

    def add(self, a, b):
        return (a + b) % self.p if self.p is not None else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p is not None else a - b

    def mul(self, a, b):
        return a * b % self.p if self.p is not None else a * b

    def neg(self, a):
        return -a % self.p if self.p is not None else -a

    def inv(self, a):
        if a == 0:
            raise DomainError("inverse of zero")
        if self.p is not None:
            return pow(a, -1, self.p)
        return 1 / a

    def elements(self):
        if self.p is None:
            raise UsageError("Q has no finite element list")
        return range(self.p)

    # text form

    def parse_scalar(self, text: str):
        t = text.strip()
        m = _INT_RE.match(t)
        if m:
            return self.coerce(int(m.group(1)))
        m = _FRAC_RE.match(t)
        if m:
            num, den = int(m.group(1)), int(m.group(2))
            if den == 0:
                raise UsageError(f"zero denominator in {text!r}")
            return self.coerce(Fraction(num, den))
        raise UsageError(f"cannot parse scalar {text!r} over {self}")

    def format_scalar(self, x) -> str:
        if self.p is not None:
            return str(int(x))
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def scalar(self, x) -> "Scalar":
        return Scalar(self, self.coerce(x))


@dataclass(frozen=True)
class Scalar:
    field: FieldSpec
    value: object

    def _other(self, o):
        if isinstance(o, Scalar):
            if o.field != self.field:
                raise FieldMismatchError(f"cannot combine elements of {self.field} and {o.field}")
            return o.value
        return self.field.coerce(o)

    def __add__(self, o):
        return Scalar(self.field, self.field.add(self.value, self._other(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return Scalar(self.field, self.field.sub(self.value, self._other(o)))

    def __rsub__(self, o):
        return Scalar(self.field, self.field.sub(self._other(o), self.value))

    def __mul__(self, o):
        return Scalar(self.field, self.field.mul(self.value, self._other(o)))

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(self.field, self.field.neg(self.value))

    def inverse(self):
        return Scalar(self.field, self.field.inv(self.value))

    def __str__(self):
        return self.field.format_scalar(self.value)


def add(a: Scalar, b: Scalar) -> Scalar:
    return a + b


def mul(a: Scalar, b: Scalar) -> Scalar:
    return a * b


def neg(a: Scalar) -> Scalar:
    return -a


def inv(a: Scalar) -> Scalar:
    return a.inverse()
