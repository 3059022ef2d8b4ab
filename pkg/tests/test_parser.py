from __future__ import annotations

import random
from fractions import Fraction

import pytest

from ltlfmt.logic import (
    Apply,
    Atom,
    BoolField,
    Const,
    DataSignature,
    Next,
    Sort,
    WeakNext,
    eval_formula,
    eventually,
    globally,
)
from ltlfmt.parser import FormulaError, FormulaTypeError, infer_signature, parse_formula

from generators import INT_SIG, random_formula, random_word

X = DataSignature.of(x="int")
TEMP = DataSignature.of(heat="bool", temp="real", e="int", t="int")


def gt(n, c):
    return Atom(">", Next(0, "x"), Const(c, Sort.INT))


def test_gandf_tree():
    f = parse_formula("G(x > 3) && F(x < 2)", X)
    from ltlfmt.logic import And
    assert f == And(globally(gt(0, 3)), eventually(Atom("<", Next(0, "x"), Const(2, Sort.INT))))


def test_weak_next_atom():
    f = parse_formula("wnext^1(t) = t + 1", TEMP)
    assert f == Atom("=", WeakNext(1, "t"), Apply("+", (Next(0, "t"), Const(1, Sort.INT))))


def test_unknown_field():
    with pytest.raises(FormulaTypeError, match="unknown field 'y'"):
        parse_formula("G(y > 0)", X)


def test_sort_mismatch():
    with pytest.raises(FormulaTypeError):
        parse_formula("heat = e", TEMP)
    with pytest.raises(FormulaTypeError):
        parse_formula("temp = 1.5 && e > 0.5", TEMP)


def test_nonlinear_rejected():
    with pytest.raises(FormulaTypeError):
        parse_formula("x * x > 1", X)


def test_integer_literal_adopts_real_sort():
    f = parse_formula("temp = 20", TEMP)
    assert f == Atom("=", Next(0, "temp"), Const(Fraction(20), Sort.REAL))


def test_syntax_error_position():
    with pytest.raises(FormulaError) as info:
        parse_formula("x > 3 &&\n  (x <", X)
    assert info.value.line == 2


def test_boolean_fields_and_precedence():
    f = parse_formula("!heat && X heat -> WX^2 heat", TEMP)
    word = [{"heat": h, "temp": 0, "e": 0, "t": 0} for h in (False, True, True)]
    assert eval_formula(f, word)
    assert isinstance(parse_formula("heat", TEMP), BoolField)


def test_until_right_associative():
    a = parse_formula("x = 1 U x = 2 U x = 3", X)
    b = parse_formula("x = 1 U (x = 2 U x = 3)", X)
    assert a == b


def test_comments_and_constants():
    f = parse_formula("# a comment\ntrue && !false", X)
    assert eval_formula(f, [])


def test_infer_signature():
    sig = infer_signature("heat -> (next^1(e) = e + 1 && temp >= 1.5)")
    assert sig.sort_of("heat") is Sort.BOOL
    assert sig.sort_of("e") is Sort.INT
    assert sig.sort_of("temp") is Sort.REAL
    parse_formula("heat -> (next^1(e) = e + 1 && temp >= 1.5)")


@pytest.mark.parametrize("seed", range(10))
def test_print_parse_roundtrip(seed):
    rng = random.Random(seed)
    for _ in range(30):
        f = random_formula(rng, INT_SIG, 4)
        g = parse_formula(str(f), INT_SIG)
        for _ in range(5):
            word = random_word(rng, INT_SIG, 4)
            assert eval_formula(f, word) == eval_formula(g, word)
