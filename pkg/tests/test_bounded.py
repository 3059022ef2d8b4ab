from __future__ import annotations

import itertools

import pytest

from ltlfmt.bounded import bounded_models, unroll
from ltlfmt.constraints import evaluate
from ltlfmt.logic import DataSignature, eval_formula
from ltlfmt.parser import parse_formula

X = DataSignature.of(x="int")


@pytest.mark.parametrize("text", [
    "X(wnext^1(x) > next^2(x)) U (x = 1)",
    "G(x > 0) && F(next^1(x) = 2)",
    "!(WX^2 (x = 0)) || last",
])
def test_unroll_matches_semantics(text):
    f = parse_formula(text, X)
    for n in range(5):
        e = unroll(f, X, n)
        for vals in itertools.product([0, 1, 2], repeat=n):
            env = {f"w{j}.x": v for j, v in enumerate(vals)}
            assert evaluate(e, env) == eval_formula(f, [{"x": v} for v in vals])


@pytest.mark.solver
def test_bounded_models():
    f = parse_formula("x = 0 && X(x = 1)", X)
    g = parse_formula("G(x > 3) && F(x < 2)", X)
    res = bounded_models([(f, X, 1), (f, X, 2), (g, X, 3)])
    assert res[0] is None and res[2] is None
    assert eval_formula(f, res[1]) and len(res[1]) == 2
