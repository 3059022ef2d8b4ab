from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltlfmt.logic import (
    TRUE,
    And,
    Apply,
    Atom,
    Const,
    DataSignature,
    DataWord,
    Next,
    Not,
    Or,
    Sort,
    WeakNext,
    eval_formula,
    eventually,
    has_weak_next,
    nonempty,
    tomorrow_n,
)
from ltlfmt.normal_forms import (
    abstract,
    abstract_word,
    fold_constant_atoms,
    ltlf_eval,
    reduce_lookahead,
    remove_weak_next,
)
from ltlfmt.parser import parse_formula

from generators import INT_SIG, corpus, random_formula, random_word

X = DataSignature.of(x="int")
T = DataSignature.of(t="int")


def w(*xs, field="x"):
    return [{field: v} for v in xs]


class TestWeakNextRemoval:
    atom = Atom("=", WeakNext(1, "t"), Apply("+", (Next(0, "t"), Const(1, Sort.INT))))
    strong = Atom("=", Next(1, "t"), Apply("+", (Next(0, "t"), Const(1, Sort.INT))))

    def test_template_under_temporal_operator(self):
        out = remove_weak_next(eventually(self.atom))
        assert out == eventually(Or(self.strong, Not(tomorrow_n(TRUE, 1))))

    def test_top_level_needs_nonempty_word(self):
        # at top level the empty word must falsify the ``X^0 true`` conjunct
        out = remove_weak_next(self.atom)
        assert out == And(Or(self.strong, Not(tomorrow_n(TRUE, 1))), nonempty())
        assert not eval_formula(out, []) and not eval_formula(self.atom, [])

    def test_identity_on_weak_free_input(self):
        f = parse_formula("G(x > 3) && F(x < 2)", X)
        assert remove_weak_next(f) == f

    def test_pointwise_on_corpus(self):
        rng = random.Random(11)
        for f in corpus(3, 200):
            g = remove_weak_next(f)
            assert not has_weak_next(g)
            for _ in range(10):
                word = random_word(rng, INT_SIG, 5)
                assert eval_formula(f, word) == eval_formula(g, word)


class TestLookaheadReduction:
    def test_small_lookahead_unchanged(self):
        f = parse_formula("G(next^1(x) = x + 1)", X)
        g, sig = reduce_lookahead(f, X)
        assert g is f and sig is X

    def test_lookahead_two(self):
        f = Atom("=", Next(2, "x"), Const(0, Sort.INT))
        g, sig = reduce_lookahead(f, X)
        assert sig.names == ("x_0", "x_1", "x_2")
        # every data read is at lookahead 0 or 1
        from ltlfmt.logic import atoms_of, atom_reads
        assert all(r.n <= 1 for a in atoms_of(g) for r in atom_reads(a))

    def test_projection_of_models(self):
        f = Atom("=", Next(2, "x"), Const(0, Sort.INT))
        g, sig = reduce_lookahead(f, X)
        # shifted copies of a model of ``f`` form a model of ``g``
        for vals in itertools.product([0, 1], repeat=4):
            word = w(*vals)
            wide = [{f"x_{k}": (vals[i + k] if i + k < len(vals) else 0) for k in range(3)}
                    for i in range(len(vals))]
            if eval_formula(f, word):
                assert eval_formula(g, wide)
            if eval_formula(g, wide):
                assert eval_formula(f, [{"x": s["x_0"]} for s in wide])

    def test_rejects_weak_next(self):
        with pytest.raises(ValueError):
            reduce_lookahead(parse_formula("wnext^2(x) = 0", X), X)


class TestAbstraction:
    def test_gandf(self):
        ar = abstract(parse_formula("G(x > 3) && F(x < 2)", X))
        assert ar.props == ("b1", "b2")
        assert [str(c.atom) for c in ar.constraints] == ["x > 3", "x < 2"]
        assert [c.lookahead for c in ar.constraints] == [0, 0]
        assert ar.max_lookahead == 0
        assert str(ar.ltlf) == str(parse_formula("G b1 && F b2", DataSignature.of(b1="bool", b2="bool")))

    def test_delayed_proposition(self):
        ar = abstract(parse_formula("next^1(x) = x + 1", X))
        assert len(ar.constraints) == 1 and ar.constraints[0].lookahead == 1
        assert ar.ltlf == tomorrow_n(parse_formula("b1", DataSignature.of(b1="bool")), 1)

    def test_no_atoms(self):
        ar = abstract(parse_formula("true && !false", X))
        assert ar.constraints == () and ar.max_lookahead == 0

    def test_constant_atoms_fold(self):
        f = parse_formula("G(1 < 2) && x = x", X)
        g = fold_constant_atoms(f)
        assert eval_formula(g, []) == eval_formula(f, [])
        assert len(abstract(g).constraints) == 1

    def test_abstract_word_gandf(self):
        ar = abstract(parse_formula("G(x > 3) && F(x < 2)", X))
        assert abstract_word(ar, DataWord.of(X, w(4, 1))) == (frozenset({"b1"}), frozenset({"b2"}))
        assert abstract_word(ar, DataWord.of(X, [])) == ()

    def test_abstract_word_default_prefix(self):
        ar = abstract(parse_formula("next^1(x) = x + 1", X))
        letters = abstract_word(ar, DataWord.of(X, w(0, 1)))
        # position 1 is decided on [0, 0, 1], position 2 on [0, 1]
        assert letters == (frozenset(), frozenset({"b1"}))

    def test_correspondence_on_corpus(self):
        rng = random.Random(13)
        for f in corpus(4, 200):
            g = remove_weak_next(f)
            ar = abstract(g)
            for _ in range(10):
                word = random_word(rng, INT_SIG, 5)
                letters = abstract_word(ar, DataWord.of(INT_SIG, word))
                assert eval_formula(f, word) == ltlf_eval(ar.ltlf, letters, ar.props)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10 ** 9))
def test_rewrites_preserve_semantics(seed):
    rng = random.Random(seed)
    f = random_formula(rng, INT_SIG, 4)
    g = remove_weak_next(f)
    ar = abstract(g)
    for _ in range(5):
        word = random_word(rng, INT_SIG, 5)
        expect = eval_formula(f, word)
        assert eval_formula(g, word) == expect
        assert ltlf_eval(ar.ltlf, abstract_word(ar, DataWord.of(INT_SIG, word)), ar.props) == expect
