from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

from ltlfmt.chc import (
    ChcError,
    ChcSystem,
    ChcVerdict,
    Clause,
    PredApp,
    Predicate,
    SolverError,
    emit_chcs,
    find_witness,
    parse_chc,
    serialize,
    solve,
)
from ltlfmt import constraints as cx
from ltlfmt.logic import DataSignature, Sort, eval_formula
from ltlfmt.parser import parse_formula
from ltlfmt.sdwa import compile_formula, load_model

from generators import INT_SIG, corpus

X = DataSignature.of(x="int")
DATA = Path(__file__).parent / "data"
GANDF = "G(x > 3) && F(x < 2)"


@pytest.fixture(scope="module")
def gandf():
    return compile_formula(parse_formula(GANDF, X), X)


def test_monolithic_has_three_clauses(gandf):
    assert len(emit_chcs(gandf, "monolithic")) == 3
    m = compile_formula(parse_formula("x = 0 && G(wnext^1(x) = x + 1)", X), X)
    assert len(emit_chcs(m, "monolithic")) == 3


def test_per_state_count(gandf):
    system = emit_chcs(gandf, "per-state")
    d = gandf.dfa
    assert len(system) == 1 + len(d.edges()) + len(d.accepting)
    system.check()


def test_per_state_requires_lifted_automaton():
    m = load_model((DATA / "counter.json").read_text())
    assert len(emit_chcs(m, "monolithic")) == 3
    with pytest.raises(ChcError):
        emit_chcs(m, "per-state")


def test_golden_snapshots(gandf):
    assert serialize(emit_chcs(gandf, "monolithic")) == (DATA / "gandf_monolithic.smt2").read_text()
    assert serialize(emit_chcs(gandf, "per-state")) == (DATA / "gandf_per_state.smt2").read_text()


def test_serialization_is_deterministic():
    a = compile_formula(parse_formula(GANDF, X), X)
    b = compile_formula(parse_formula(GANDF, X), X)
    for enc in ("monolithic", "per-state"):
        assert serialize(emit_chcs(a, enc)) == serialize(emit_chcs(b, enc))


def test_empty_system():
    assert serialize(ChcSystem((), ())) == "(set-logic HORN)\n(check-sat)\n"


@pytest.mark.parametrize("seed", range(3))
def test_roundtrip(seed):
    for f in corpus(30 + seed, 15):
        m = compile_formula(f, INT_SIG)
        for enc in ("monolithic", "per-state"):
            system = emit_chcs(m, enc)
            assert parse_chc(serialize(system)) == system


def test_ill_formed_system():
    p = Predicate("p", (Sort.INT,))
    bad = Clause(PredApp(p, (cx.Var("v", Sort.BOOL),)), cx.TRUE, ())
    with pytest.raises(ChcError):
        ChcSystem((p,), (bad,)).check()


def test_spawn_error(gandf):
    with pytest.raises(SolverError, match="cannot run solver"):
        solve(emit_chcs(gandf), "/nonexistent/solver {input}")


def test_unparsable_output_keeps_raw_text(gandf):
    cmd = f"{sys.executable} -c \"print('garbage')\""
    with pytest.raises(SolverError) as info:
        solve(emit_chcs(gandf), cmd)
    assert "garbage" in info.value.raw_output


def test_timeout_verdict(gandf):
    cmd = f"{sys.executable} -c \"import time; time.sleep(10)\""
    res = solve(emit_chcs(gandf), cmd, timeout=0.5)
    assert res.verdict is ChcVerdict.TIMEOUT and res.language_empty is None


@pytest.mark.solver
class TestSolver:
    def test_gandf_language_empty(self, gandf):
        for enc in ("monolithic", "per-state"):
            res = solve(emit_chcs(gandf, enc))
            assert res.verdict is ChcVerdict.SYSTEM_SAT and res.language_empty

    def test_satisfiable_formula(self):
        m = compile_formula(parse_formula("x = 0 && X(x = 1)", X), X)
        for enc in ("monolithic", "per-state"):
            assert solve(emit_chcs(m, enc)).verdict is ChcVerdict.SYSTEM_UNSAT

    def test_witness(self):
        f = parse_formula("x = 0 && X(x = 1)", X)
        w = find_witness(compile_formula(f, X), 3)
        assert w is not None and list(w.symbols) == [{"x": 0}, {"x": 1}]
        assert eval_formula(f, w)

    def test_no_witness_for_gandf(self, gandf):
        assert find_witness(gandf, 6) is None

    def test_empty_witness(self):
        w = find_witness(compile_formula(parse_formula("true", X), X), 0)
        assert w is not None and len(w) == 0

    def test_witness_for_model_file(self):
        m = load_model((DATA / "counter.json").read_text())
        w = find_witness(m, 3, min_len=3)
        assert [s["x"] for s in w.symbols] == [0, 1, 2]

    def test_random_witnesses_satisfy(self):
        rng = random.Random(4)
        fs = rng.sample(corpus(40, 80), 20)
        for f in fs:
            m = compile_formula(f, INT_SIG)
            w = find_witness(m, 4)
            if w is not None:
                assert eval_formula(f, w)
