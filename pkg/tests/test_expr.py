import pytest
from hypothesis import given, settings, strategies as st

from sumprod.errors import QuerySyntaxError
from sumprod.expr import (Add, Const, Mul, Neg, Query, Sub, Var, parse_expr, parse_query,
                          print_expr, print_query)

X, Y, Z = Var("X"), Var("Y"), Var("Z")


def test_examples():
    q = parse_query("H[X*(Y+Z)]")
    assert q.kind == "shannon" and q.components == (Mul(X, Add(Y, Z)),)
    assert len(parse_query("H[X*Y, X*Z]").components) == 2
    with pytest.raises(QuerySyntaxError) as e:
        parse_query("H[X+*Y]")
    assert e.value.column == 5


def test_printer_examples():
    assert print_query(Query("shannon", (Mul(X, Add(Y, Z)),))) == "H[X*(Y+Z)]"
    assert print_query(Query("ruzsa", (X, Neg(Y)))) == "dR[X, -Y]"
    assert print_query(Query("shannon", (Neg(Neg(X)),))) == "H[-(-X)]"


def test_precedence_and_associativity():
    assert parse_expr("X+Y*Z") == Add(X, Mul(Y, Z))
    assert parse_expr("X-Y-Z") == Sub(Sub(X, Y), Z)
    assert parse_expr("-X*Y") == Mul(Neg(X), Y)
    assert parse_expr("X-(Y-Z)") == Sub(X, Sub(Y, Z))


def test_kinds_and_errors():
    assert parse_query("Hmin[X]").kind == "min"
    assert parse_query("H2[X]").kind == "collision"
    for bad in ("H[]", "K[X]", "H[X", "H[x]", "H[X] Y", "H X"):
        with pytest.raises(QuerySyntaxError):
            parse_query(bad)


def test_variables():
    assert parse_query("H[X1*(Y+2), Z]").variables == {"X1", "Y", "Z"}


def trees(depth):
    leaf = st.one_of(st.sampled_from([X, Y, Z, Var("W2")]), st.integers(0, 20).map(Const))
    if depth == 0:
        return leaf
    sub = trees(depth - 1)
    return st.one_of(leaf, sub.map(Neg),
                     st.tuples(st.sampled_from([Add, Sub, Mul]), sub, sub).map(lambda t: t[0](t[1], t[2])))


@settings(max_examples=1000)
@given(trees(6))
def test_print_parse_round_trip(tree):
    assert parse_expr(print_expr(tree)) == tree
