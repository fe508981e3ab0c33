"""Entropy-query language.

Grammar::

    query  := kind '[' expr (',' expr)* ']'
    kind   := 'H' | 'Hmin' | 'H2' | 'dR'
    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := var | int-literal | '(' expr ')' | '-' factor
    var    := uppercase letter followed by optional digits

Parsing performs no algebraic simplification; integer literals stay as
plain integers until an evaluator embeds them in a field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import QuerySyntaxError

KINDS = {"H": "shannon", "Hmin": "min", "H2": "collision", "dR": "ruzsa"}
KIND_SYMBOL = {v: k for k, v in KINDS.items()}


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


Expr = Union[Var, Const, Add, Sub, Mul, Neg]


@dataclass(frozen=True)
class Query:
    kind: str  # one of KINDS.values()
    components: tuple

    @property
    def variables(self) -> frozenset:
        out = set()
        for c in self.components:
            out |= variables(c)
        return frozenset(out)

    def __str__(self):
        return print_query(self)


def variables(e) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Neg):
        return variables(e.operand)
    return variables(e.left) | variables(e.right)


# tokenizer / parser


def _tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        col = i + 1
        if ch.isupper():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("var", text[i:j], col))
            i = j
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", text[i:j], col))
            i = j
        elif ch in "+-*(),[]":
            toks.append((ch, ch, col))
            i += 1
        else:
            raise QuerySyntaxError(f"unexpected character {ch!r}", col)
    toks.append(("end", "", n + 1))
    return toks


class _Parser:
    def __init__(self, text, offset=0):
        self.toks = _tokenize(text)
        if offset:
            self.toks = [(k, v, c + offset) for k, v, c in self.toks]
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            self.fail(f"expected {kind!r}")
        self.i += 1
        return tok

    def fail(self, msg=None):
        kind, val, col = self.peek()
        what = "end of input" if kind == "end" else repr(val)
        raise QuerySyntaxError(msg or f"unexpected {what}", col)

    def expr(self):
        node = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "*":
            self.take()
            node = Mul(node, self.factor())
        return node

    def factor(self):
        kind, val, _ = self.peek()
        if kind == "var":
            self.take()
            return Var(val)
        if kind == "int":
            self.take()
            return Const(int(val))
        if kind == "(":
            self.take()
            node = self.expr()
            if self.peek()[0] != ")":
                self.fail("expected ')'")
            self.take()
            return node
        if kind == "-":
            self.take()
            return Neg(self.factor())
        self.fail()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    node = p.expr()
    if p.peek()[0] != "end":
        p.fail()
    return node


def parse_query(text: str) -> Query:
    """Parse ``H[X*(Y+Z)]`` style text.  Errors carry a 1-based column."""
    lead = len(text) - len(text.lstrip())
    bracket = text.find("[")
    if bracket < 0:
        raise QuerySyntaxError("expected '['", len(text) + 1)
    symbol = text[:bracket].strip()
    if symbol not in KINDS:
        raise QuerySyntaxError(f"unknown entropy kind {symbol!r}", lead + 1)
    p = _Parser(text[bracket + 1:], offset=bracket + 1)
    if p.peek()[0] == "]":
        p.fail("empty bracket")
    comps = [p.expr()]
    while p.peek()[0] == ",":
        p.take()
        comps.append(p.expr())
    if p.peek()[0] != "]":
        p.fail()
    p.take()
    if p.peek()[0] != "end":
        p.fail()
    return Query(KINDS[symbol], tuple(comps))


# printer

_PREC = {Add: 1, Sub: 1, Mul: 2, Neg: 3, Var: 4, Const: 4}


def print_expr(e) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Neg):
        inner = print_expr(e.operand)
        if _PREC[type(e.operand)] <= 3:
            inner = f"({inner})"
        return "-" + inner
    prec = _PREC[type(e)]
    op = {Add: "+", Sub: "-", Mul: "*"}[type(e)]
    left = print_expr(e.left)
    if _PREC[type(e.left)] < prec:
        left = f"({left})"
    right = print_expr(e.right)
    # left associativity: an equal-precedence right operand needs parentheses;
    # a negation on the right is parenthesized for readability
    if _PREC[type(e.right)] <= prec or isinstance(e.right, Neg):
        right = f"({right})"
    return f"{left}{op}{right}"


def print_query(q: Query) -> str:
    return f"{KIND_SYMBOL[q.kind]}[{', '.join(print_expr(c) for c in q.components)}]"
