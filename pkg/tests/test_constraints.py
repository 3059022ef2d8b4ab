from __future__ import annotations

import random
from fractions import Fraction

import pytest

from ltlfmt import constraints as cx
from ltlfmt.constraints import ConstraintError, Lit, Var, compile_expr, evaluate
from ltlfmt.logic import Sort

x = Var("q.x", Sort.INT)
y = Var("a.y", Sort.INT)
r = Var("q.r", Sort.REAL)
b = Var("q.b", Sort.BOOL)
SORTS = {"q.x": Sort.INT, "a.y": Sort.INT, "q.r": Sort.REAL, "q.b": Sort.BOOL}


def test_smart_constructors_simplify():
    assert cx.and_(cx.TRUE, b) is b
    assert cx.and_(b, cx.FALSE) == cx.FALSE
    assert cx.or_(cx.FALSE, b) is b
    assert cx.not_(cx.not_(b)) is b
    assert cx.ite(cx.TRUE, x, y) is x
    assert cx.ite(b, x, x) is x


def test_sort_errors():
    with pytest.raises(ConstraintError):
        cx.cmp("<", x, r)
    with pytest.raises(ConstraintError):
        cx.and_(x)


def test_literal_printing():
    assert cx.smt_literal(Fraction(5, 2), Sort.REAL) == "2.5"
    assert cx.smt_literal(Fraction(20), Sort.REAL) == "20.0"
    assert cx.smt_literal(Fraction(1, 3), Sort.REAL) == "(/ 1.0 3.0)"
    assert cx.smt_literal(-4, Sort.INT) == "(- 4)"
    assert cx.smt_literal(True, Sort.BOOL) == "true"


def test_symbol_quoting():
    assert cx.smt_symbol("q.x") == "q.x"
    assert cx.smt_symbol("l.q state") == "|l.q state|"


def random_expr(rng, depth=3):
    if depth == 0 or rng.random() < 0.2:
        return rng.choice([x, y, Lit(rng.randint(-3, 3), Sort.INT)])
    op = rng.choice(["+", "-", "*c", "ite"])
    if op == "*c":
        return cx.arith("*", Lit(rng.randint(-2, 2), Sort.INT), random_expr(rng, depth - 1))
    if op == "ite":
        return cx.ite(random_bool(rng, depth - 1), random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    return cx.arith(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))


def random_bool(rng, depth=3):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice([b, cx.cmp(rng.choice(["<", "<=", "=", "!=", ">", ">="]),
                                     random_expr(rng, 1), random_expr(rng, 1))])
    op = rng.choice(["and", "or", "not", "=>"])
    if op == "not":
        return cx.not_(random_bool(rng, depth - 1))
    if op == "=>":
        return cx.implies(random_bool(rng, depth - 1), random_bool(rng, depth - 1))
    fn = cx.and_ if op == "and" else cx.or_
    return fn(random_bool(rng, depth - 1), random_bool(rng, depth - 1))


@pytest.mark.parametrize("seed", range(5))
def test_smt_roundtrip_and_compile(seed):
    rng = random.Random(seed)
    for _ in range(60):
        e = random_bool(rng, 4)
        back = cx.parse_smt_expr(cx.to_smt(e), SORTS)
        fn = compile_expr(e)
        for _ in range(5):
            env = {"q.x": rng.randint(-3, 3), "a.y": rng.randint(-3, 3), "q.b": rng.random() < 0.5}
            assert evaluate(back, env) == evaluate(e, env) == fn(env)


def test_long_ite_chain_compiles_as_table():
    s = Var("q.state", Sort.INT)
    e = Lit(-1, Sort.INT)
    for k in range(5000):
        e = cx.ite(cx.eq(s, Lit(k, Sort.INT)), Lit(k * 2, Sort.INT), e)
    fn = compile_expr(e)
    assert fn({"q.state": 1234}) == 2468 and fn({"q.state": 9999}) == -1
    assert len(cx.to_smt(e)) > 5000


def test_real_literal_parsing():
    e = cx.parse_smt_expr("(= q.r (+ 1.5 (/ 1 2) 3))", SORTS)
    assert evaluate(e, {"q.r": Fraction(5)})


def test_parse_errors():
    with pytest.raises(ConstraintError):
        cx.parse_smt_expr("(< q.x", SORTS)
    with pytest.raises(ConstraintError):
        cx.parse_smt_expr("(< q.zz 1)", SORTS)
    with pytest.raises(ConstraintError):
        cx.parse_smt_expr("(let ((z 1)) (< q.x z))", SORTS)


def test_substitute_and_rename():
    e = cx.cmp("<", x, y)
    assert cx.to_smt(cx.substitute(e, {"q.x": Lit(0, Sort.INT)})) == "(< 0 a.y)"
    assert cx.to_smt(cx.rename_records(e, {"q": "s3", "a": "w3"})) == "(< s3.x w3.y)"
    assert list(cx.ordered_vars(e)) == ["q.x", "a.y"]
