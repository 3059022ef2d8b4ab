from __future__ import annotations

import itertools
import random
import warnings

import pytest

from ltlfmt.dfa import DfaConstructionError, DfaImportError, export_hoa, import_dfa, ltlf_to_dfa
from ltlfmt.logic import DataSignature
from ltlfmt.normal_forms import ltlf_eval
from ltlfmt.parser import parse_formula

from generators import random_formula

AP1 = ["b1"]
SIG1 = DataSignature.of(b1="bool")
SIG3 = DataSignature.of(b1="bool", b2="bool", b3="bool")


def words(props, max_len=4):
    letters = [frozenset(c) for r in range(len(props) + 1) for c in itertools.combinations(props, r)]
    for n in range(max_len + 1):
        yield from itertools.product(letters, repeat=n)


def same_language(d, f, props, max_len=4):
    return all(d.accepts(u) == ltlf_eval(f, u, props) for u in words(props, max_len))


def g_b1():
    return parse_formula("G b1", SIG1)


def test_false_is_single_sink():
    d = ltlf_to_dfa(parse_formula("false", SIG1), AP1)
    assert d.n_states == 1 and not d.accepting and d.is_empty()


def test_globally():
    d = ltlf_to_dfa(g_b1(), AP1)
    assert d.accepts([]) and d.accepts([{"b1"}] * 3) and not d.accepts([{"b1"}, set()])
    assert same_language(d, g_b1(), AP1)


def test_tomorrow():
    f = parse_formula("X b1", SIG1)
    d = ltlf_to_dfa(f, AP1)
    assert not d.accepts([]) and not d.accepts([{"b1"}])
    assert d.accepts([set(), {"b1"}])
    assert same_language(d, f, AP1)


@pytest.mark.parametrize("seed", range(8))
def test_random_formulas_exhaustive(seed):
    rng = random.Random(seed)
    for _ in range(25):
        f = random_formula(rng, SIG3, 4, max_look=0, weak=False)
        props = list(SIG3.names)
        d = ltlf_to_dfa(f, props)
        assert same_language(d, f, props, 4)
        # totality: every state has a successor on every letter
        letters = [u[0] for u in words(props, 1) if u]
        assert all(d.step(q, a) in d.states for q in d.states for a in letters)


def test_state_budget():
    f = parse_formula("F b1 && F b2 && F b3", SIG3)
    with pytest.raises(DfaConstructionError, match="budget"):
        ltlf_to_dfa(f, list(SIG3.names), max_states=2)


def test_prop_limit():
    with pytest.raises(DfaConstructionError, match="limit"):
        ltlf_to_dfa(parse_formula("G b1", SIG1), AP1 + [f"c{i}" for i in range(25)])


def test_complement_and_emptiness():
    d = ltlf_to_dfa(g_b1(), AP1)
    c = d.complement()
    for u in words(AP1):
        assert c.accepts(u) == any("b1" not in letter for letter in u)
    assert not d.is_empty() and not c.is_empty()
    assert ltlf_to_dfa(parse_formula("false", SIG1), AP1).is_empty()
    t = ltlf_to_dfa(parse_formula("true", SIG1), AP1)
    assert t.complement().is_empty()


HAND_GB1 = """\
HOA: v1
States: 2
Start: 0
AP: 1 "b1"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0 {0}
[0] 0
[!0] 1
State: 1
[t] 1
--END--
"""


def test_handwritten_import():
    d = import_dfa(HAND_GB1, AP1)
    assert same_language(d, g_b1(), AP1)


def test_positional_mapping_of_foreign_names():
    d = import_dfa(HAND_GB1.replace('"b1"', '"p"'), AP1)
    assert same_language(d, g_b1(), AP1)


def test_unknown_proposition():
    text = HAND_GB1.replace('AP: 1 "b1"', 'AP: 2 "b1" "zz"')
    with pytest.raises(DfaImportError, match="unknown proposition"):
        import_dfa(text, AP1)


def test_missing_transition_completed():
    text = HAND_GB1.replace("[!0] 1\n", "")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        d = import_dfa(text, AP1)
    assert any("sink" in str(c.message) for c in caught)
    assert same_language(d, g_b1(), AP1)


def test_two_initial_states():
    with pytest.raises(DfaImportError, match="exactly one initial"):
        import_dfa(HAND_GB1.replace("Start: 0\n", "Start: 0\nStart: 1\n"), AP1)


def test_nondeterministic_edges():
    with pytest.raises(DfaImportError, match="nondeterministic"):
        import_dfa(HAND_GB1.replace("[!0] 1", "[t] 1"), AP1)


@pytest.mark.parametrize("seed", range(4))
def test_hoa_roundtrip(seed):
    rng = random.Random(100 + seed)
    props = list(SIG3.names)
    for _ in range(10):
        d = ltlf_to_dfa(random_formula(rng, SIG3, 4, max_look=0, weak=False), props)
        e = import_dfa(export_hoa(d, "x"), props)
        assert all(d.accepts(u) == e.accepts(u) for u in words(props, 3))


def test_readme_sample_is_exported_verbatim():
    from pathlib import Path

    from ltlfmt.sdwa import compile_formula

    data = Path(__file__).parent / "data"
    sig = DataSignature.of(x="int")
    m = compile_formula(parse_formula(data.joinpath("gandf.ltlfmt").read_text(), sig), sig)
    sample = data.joinpath("gandf.hoa").read_text()
    assert export_hoa(m.dfa, str(m.abstraction.ltlf)) == sample
    assert sample in (Path(__file__).parents[1] / "README.md").read_text()
