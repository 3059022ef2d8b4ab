from __future__ import annotations

import itertools
import random
from fractions import Fraction
from pathlib import Path

import pytest

from ltlfmt import constraints as cx
from ltlfmt.bench import RULES, TEMP_SIGNATURE
from ltlfmt.logic import DataSignature, DataWord, Sort, eval_formula
from ltlfmt.parser import parse_formula
from ltlfmt.sdwa import (
    STATE_FIELD,
    Sdwa,
    SdwaError,
    UnsupportedSimulation,
    buffer_field,
    check_buffer,
    check_determinism,
    compile_formula,
    dump_model,
    empty,
    intersect,
    load_model,
    run,
    simulate,
    union,
    universal,
)

from generators import INT_SIG, corpus, random_word

X = DataSignature.of(x="int")
DATA = Path(__file__).parent / "data"


def w(*xs):
    return [{"x": v} for v in xs]


def grid_words(values, max_len=4):
    for n in range(max_len + 1):
        for vals in itertools.product(values, repeat=n):
            yield w(*vals)


@pytest.fixture(scope="module")
def gandf():
    f = parse_formula("G(x > 3) && F(x < 2)", X)
    return f, compile_formula(f, X)


@pytest.fixture(scope="module")
def counter_formula():
    f = parse_formula("x = 0 && G(wnext^1(x) = x + 1)", X)
    return f, compile_formula(f, X)


@pytest.fixture(scope="module")
def rules():
    f = parse_formula(RULES, TEMP_SIGNATURE)
    return f, compile_formula(f, TEMP_SIGNATURE)


def heat_trace():
    heat = [True, True, True, True, False, False, False]
    temp, e, out = Fraction(20), 0, []
    for t, h in enumerate(heat):
        out.append({"heat": h, "temp": temp, "e": e, "t": t})
        temp, e = (temp + Fraction(3, 2), e + 1) if h else (temp - 1, e)
    return out


class TestLifting:
    def test_gandf_layout(self, gandf):
        _, m = gandf
        assert m.buffer == 0 and m.state.names == (STATE_FIELD,)
        for word in grid_words([1, 4]):
            assert not simulate(m, word)

    def test_gandf_oracle(self, gandf):
        f, m = gandf
        for word in grid_words([1, 4]):
            assert simulate(m, word) == eval_formula(f, word)

    def test_one_symbol_buffer(self, counter_formula):
        f, m = counter_formula
        assert m.buffer == 1
        assert m.state.names == (STATE_FIELD, buffer_field(1, "x"))
        assert simulate(m, w(0)) and simulate(m, w(0, 1)) and not simulate(m, w(0, 5))
        for word in grid_words([0, 1, 2]):
            assert simulate(m, word) == eval_formula(f, word)

    def test_empty_word(self, gandf, counter_formula):
        for f, m in (gandf, counter_formula):
            assert simulate(m, []) == eval_formula(f, [])
        g = parse_formula("G(x > 0)", X)
        assert simulate(compile_formula(g, X), []) and eval_formula(g, [])

    def test_heating_trace(self, rules):
        f, m = rules
        trace = heat_trace()
        assert trace[4]["temp"] == 26 and trace[6]["temp"] == 24 and trace[6]["e"] == 4
        assert eval_formula(f, trace) and simulate(m, trace)
        bad = [dict(s) for s in trace]
        bad[5]["heat"] = True   # off for only one hour
        assert eval_formula(f, bad) == simulate(m, bad) is False

    def test_determinism(self, gandf, counter_formula, rules):
        for _, m in (gandf, counter_formula, rules):
            assert check_determinism(m, 1000)

    def test_buffer_discipline(self, counter_formula, rules):
        _, m = counter_formula
        for word in grid_words([0, 1], 5):
            assert check_buffer(m, DataWord.of(X, word))
        _, m = rules
        assert check_buffer(m, DataWord.of(TEMP_SIGNATURE, heat_trace()))

    def test_lookahead_two(self):
        f = parse_formula("G(next^2(x) = x + 2 || last) && x = 1", X)
        m = compile_formula(f, X)
        assert m.buffer == 2
        for word in grid_words([1, 2, 3], 4):
            assert simulate(m, word) == eval_formula(f, word)
            assert check_buffer(m, DataWord.of(X, word))

    def test_corpus_sample(self):
        rng = random.Random(21)
        for f in corpus(9, 60):
            m = compile_formula(f, INT_SIG)
            for _ in range(10):
                word = random_word(rng, INT_SIG, 5)
                assert simulate(m, word) == eval_formula(f, word)


class TestProducts:
    def test_intersect_union(self):
        a = compile_formula(parse_formula("G(x > 3)", X), X)
        b = compile_formula(parse_formula("F(x < 2)", X), X)
        i, u = intersect(a, b), union(a, b)
        assert i.state.names[0].startswith("l.") and i.state.names[-1].startswith("r.")
        for word in grid_words([1, 4]):
            sa, sb = simulate(a, word), simulate(b, word)
            assert simulate(i, word) == (sa and sb)
            assert simulate(u, word) == (sa or sb)
        assert check_determinism(i, 1000) and check_determinism(u, 1000)

    def test_identities(self, counter_formula):
        _, m = counter_formula
        for word in grid_words([0, 1, 2], 3):
            assert simulate(intersect(m, universal(X)), word) == simulate(m, word)
            assert simulate(union(m, empty(X)), word) == simulate(m, word)

    def test_alphabet_mismatch(self, counter_formula):
        _, m = counter_formula
        with pytest.raises(SdwaError, match="alphabet"):
            intersect(m, universal(DataSignature.of(y="int")))


class TestPlainAutomata:
    def test_counter_model_file(self):
        m = load_model((DATA / "counter.json").read_text())
        assert simulate(m, []) and simulate(m, w(0, 1, 2)) and not simulate(m, w(1))
        assert load_model(dump_model(m)) == m
        # partial: a wrong symbol has no successor, so the total check fails
        assert not check_determinism(m, 50)

    def test_nondeterministic_simulation(self):
        # guess a Boolean bit per step; accept when the last guess matches x > 0
        m = Sdwa(X, DataSignature.of(g="bool"), cx.TRUE, cx.TRUE,
                 cx.Var("q.g", Sort.BOOL))
        res = run(m, w(1, 2))
        assert res.accepted and len(res.states) == 2

    def test_unsupported_simulation(self):
        qp = cx.Var("qp.v", Sort.INT)
        trans = cx.cmp(">", qp, cx.Var("a.x", Sort.INT))
        m = Sdwa(X, DataSignature.of(v="int"), cx.TRUE, trans, cx.TRUE)
        with pytest.raises(UnsupportedSimulation):
            simulate(m, w(1))

    def test_undeclared_variable(self):
        with pytest.raises(SdwaError, match="undeclared"):
            Sdwa(X, DataSignature.of(v="int"), cx.TRUE,
                 cx.cmp("=", cx.Var("qp.zz", Sort.INT), cx.Var("a.x", Sort.INT)), cx.TRUE)

    def test_bad_model_file(self):
        with pytest.raises(SdwaError, match="missing key"):
            load_model('{"alphabet": {"fields": []}}')
        with pytest.raises(SdwaError, match="line"):
            load_model("{")
