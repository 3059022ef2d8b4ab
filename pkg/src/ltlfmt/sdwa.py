"""Symbolic data-word automata.

An automaton has an alphabet signature, a state signature and three
constraints: ``init`` over ``q.*``, ``trans`` over ``q.*``, ``a.*`` and
``qp.*`` (the successor), and ``final`` over ``q.*``.  A word is accepted when
some run starts in a state satisfying ``init``, takes steps satisfying
``trans`` and ends in a state satisfying ``final``.

``build_sdwa`` lifts a DFA for the abstraction of a formula into an automaton
whose state holds the DFA state and ``N`` copies of the data signature, the
last ``N`` symbols read.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence

from . import constraints as cx
from .constraints import App, Expr, Lit, Var
from .dfa import Dfa
from .logic import (
    Apply,
    Atom,
    BoolField,
    Const,
    DataSignature,
    DataWord,
    Field,
    LtlfmtError,
    Next,
    Sort,
    WeakNext,
    SignatureError,
    parse_signature,
)
from .normal_forms import AbstractionResult


class SdwaError(LtlfmtError):
    pass


class UnsupportedSimulation(SdwaError):
    pass


REC_STATE, REC_LETTER, REC_SUCC = "q", "a", "qp"
STATE_FIELD = "state"


def buffer_field(i: int, name: str) -> str:
    return f"data{i}.{name}"


@dataclass(frozen=True)
class Sdwa:
    alphabet: DataSignature
    state: DataSignature
    init: Expr
    trans: Expr
    final: Expr
    deterministic: bool = False
    # inclusive integer ranges of finite-domain state fields
    bounds: tuple[tuple[str, int, int], ...] = ()

    def __post_init__(self):
        allowed_q = {f"{REC_STATE}.{n}" for n in self.state.names}
        allowed_t = (allowed_q | {f"{REC_LETTER}.{n}" for n in self.alphabet.names}
                     | {f"{REC_SUCC}.{n}" for n in self.state.names})
        for label, e, allowed in (("init", self.init, allowed_q), ("final", self.final, allowed_q),
                                  ("trans", self.trans, allowed_t)):
            if e.sort is not Sort.BOOL:
                raise SdwaError(f"{label} constraint is not Boolean")
            for name, sort in cx.free_vars(e).items():
                if name not in allowed:
                    raise SdwaError(f"{label} constraint mentions undeclared variable {name}")
                if sort is not self._sort_of(name):
                    raise SdwaError(f"{label} constraint uses {name} at the wrong sort")

    def _sort_of(self, var: str) -> Sort:
        rec, _, name = var.partition(".")
        sig = self.alphabet if rec == REC_LETTER else self.state
        return sig.sort_of(name)

    def q(self, name: str, rec: str = REC_STATE) -> Var:
        return Var(f"{rec}.{name}", self.state.sort_of(name))

    def range_constraint(self, rec: str = REC_STATE) -> Expr:
        parts = []
        for name, lo, hi in self.bounds:
            v = Var(f"{rec}.{name}", Sort.INT)
            parts += [cx.cmp(">=", v, Lit(lo, Sort.INT)), cx.cmp("<=", v, Lit(hi, Sort.INT))]
        return cx.and_(*parts)


@dataclass(frozen=True)
class LiftedSdwa:
    base: Sdwa
    dfa: Dfa
    abstraction: AbstractionResult
    signature: DataSignature
    buffer: int
    guards: tuple[Expr, ...] = field(compare=False, default=())

    # convenience pass-throughs
    @property
    def alphabet(self):
        return self.base.alphabet

    @property
    def state(self):
        return self.base.state

    @property
    def init(self):
        return self.base.init

    @property
    def trans(self):
        return self.base.trans

    @property
    def final(self):
        return self.base.final

    def initial_record(self) -> dict:
        """The unique state satisfying ``init``, obtained from its equalities."""
        rec = _solve_definitions(self.base.init, REC_STATE, self.base.state, {})
        if rec is None:
            raise SdwaError("init does not determine a unique state")
        return rec


def as_sdwa(m) -> Sdwa:
    return m.base if isinstance(m, LiftedSdwa) else m


# ---------------------------------------------------------------------------
# formula lifting


def compile_atom(atom, n: int, sig: DataSignature, letter: str = REC_LETTER,
                 state: str = REC_STATE) -> Expr:
    """Compile a data atom with lookahead ``n`` over the buffer and the letter.

    ``Next(n, id)`` reads the incoming letter and ``Next(k, id)`` for ``k < n``
    reads buffer copy ``n - k``, the symbol read ``n - k`` steps earlier.
    """

    def term(t):
        if isinstance(t, Next):
            if t.n > n:
                raise SdwaError(f"lookahead {t.n} exceeds the buffer bound {n}")
            sort = sig.sort_of(t.field)
            if t.n == n:
                return Var(f"{letter}.{t.field}", sort)
            return Var(f"{state}.{buffer_field(n - t.n, t.field)}", sort)
        if isinstance(t, WeakNext):
            raise SdwaError("weak reads must be removed before lifting")
        if isinstance(t, Const):
            return Lit(t.value, t.sort)
        if isinstance(t, Apply):
            args = [term(a) for a in t.args]
            return cx.arith("neg" if t.op == "neg" else t.op, *args)
        raise SdwaError(f"not a term: {t!r}")

    if isinstance(atom, BoolField):
        e = term(atom.term)
        if e.sort is not Sort.BOOL:
            raise SdwaError(f"not a Boolean term: {atom}")
        return e
    if isinstance(atom, Atom):
        return cx.cmp(atom.pred, term(atom.lhs), term(atom.rhs))
    raise SdwaError(f"not a data atom: {atom!r}")


def state_signature(sig: DataSignature, n: int) -> DataSignature:
    fields = [Field(STATE_FIELD, Sort.INT, 0)]
    for i in range(1, n + 1):
        fields += [Field(buffer_field(i, f.name), f.sort, f.default) for f in sig.fields]
    return DataSignature(tuple(fields))


def buffer_shift(sig: DataSignature, n: int, state: str = REC_STATE, letter: str = REC_LETTER,
                 succ: str = REC_SUCC) -> list[Expr]:
    """Equalities moving the letter into copy 1 and copy i into copy i + 1."""
    out = []
    if n >= 1:
        for f in sig.fields:
            out.append(cx.eq(Var(f"{succ}.{buffer_field(1, f.name)}", f.sort),
                             Var(f"{letter}.{f.name}", f.sort)))
    for i in range(1, n):
        for f in sig.fields:
            out.append(cx.eq(Var(f"{succ}.{buffer_field(i + 1, f.name)}", f.sort),
                             Var(f"{state}.{buffer_field(i, f.name)}", f.sort)))
    return out


def _tree_expr(tree, guards: Sequence[Expr], memo: dict) -> Expr:
    """Decision tree to nested ``ite``; shared subtrees stay shared."""
    if isinstance(tree, int):
        lit = memo.get(("leaf", tree))
        if lit is None:
            lit = memo[("leaf", tree)] = Lit(tree, Sort.INT)
        return lit
    hit = memo.get(id(tree))
    if hit is None:
        v, lo, hi = tree
        hit = cx.ite(guards[v], _tree_expr(hi, guards, memo), _tree_expr(lo, guards, memo))
        memo[id(tree)] = hit
    return hit


def _step(d: Dfa, guards, sig: DataSignature, n: int, sources: Sequence[int], memo=None) -> Expr:
    """Transition constraint for DFA states ``sources``; the last source is the
    fall-through case of the dispatch chain."""
    memo = {} if memo is None else memo
    q = Var(f"{REC_STATE}.{STATE_FIELD}", Sort.INT)
    sources = list(sources)
    chain = _tree_expr(d.trees[sources[-1]], guards, memo)
    for s in reversed(sources[:-1]):
        chain = cx.ite(cx.eq(q, Lit(s, Sort.INT)), _tree_expr(d.trees[s], guards, memo), chain)
    return cx.and_(*buffer_shift(sig, n), cx.eq(Var(f"{REC_SUCC}.{STATE_FIELD}", Sort.INT), chain))


def restricted_step(m: "LiftedSdwa", sources: Sequence[int], memo=None) -> Expr:
    """``m.trans`` under the assumption that the DFA state lies in ``sources``."""
    return _step(m.dfa, m.guards, m.signature, m.buffer, sorted(sources), memo)


def build_sdwa(ar: AbstractionResult, d: Dfa, sig: DataSignature,
               initial_data: Mapping[str, object] | None = None) -> LiftedSdwa:
    """Lift ``d`` (a DFA for ``ar.ltlf`` over ``ar.props``) to a deterministic automaton.

    ``initial_data`` optionally fixes the buffer of the initial state (keys
    are buffer field names such as ``data1.x``); by default every buffer field
    starts at its signature default.
    """
    if tuple(d.props) != ar.props:
        raise SdwaError(f"DFA propositions {d.props} do not match the abstraction {ar.props}")
    n = ar.max_lookahead
    ssig = state_signature(sig, n)
    by_prop = {c.prop: c for c in ar.constraints}
    guards = tuple(compile_atom(by_prop[p].atom, by_prop[p].lookahead, sig) for p in d.props)

    def q(name, rec=REC_STATE):
        return Var(f"{rec}.{name}", ssig.sort_of(name))

    data = dict(ssig.defaults())
    del data[STATE_FIELD]
    if initial_data:
        for k, v in initial_data.items():
            if k not in data:
                raise SdwaError(f"unknown buffer field {k!r}")
            data[k] = ssig.sort_of(k).coerce(v)
    init = cx.and_(cx.eq(q(STATE_FIELD), Lit(d.initial, Sort.INT)),
                   *(cx.eq(q(k), Lit(v, ssig.sort_of(k))) for k, v in data.items()))

    trans = _step(d, guards, sig, n, d.states)
    final = cx.or_(*(cx.eq(q(STATE_FIELD), Lit(s, Sort.INT)) for s in sorted(d.accepting)))
    base = Sdwa(sig, ssig, init, trans, final, deterministic=True,
                bounds=((STATE_FIELD, 0, d.n_states - 1),))
    return LiftedSdwa(base, d, ar, sig, n, guards)


def compile_formula(f, sig: DataSignature, **dfa_options) -> LiftedSdwa:
    """Full pipeline: weak-next removal, abstraction, DFA, lifting."""
    from .dfa import ltlf_to_dfa
    from .normal_forms import abstract, remove_weak_next

    ar = abstract(remove_weak_next(f))
    d = ltlf_to_dfa(ar.ltlf, ar.props, **dfa_options)
    return build_sdwa(ar, d, sig)


def reroot(m: LiftedSdwa, record: Mapping[str, object], complement: bool = False) -> LiftedSdwa:
    """The automaton started from the concrete state ``record``; with
    ``complement`` the accepting DFA states are swapped."""
    d = m.dfa.with_initial(int(record[STATE_FIELD]))
    if complement:
        d = d.complement()
    data = {k: v for k, v in record.items() if k != STATE_FIELD}
    return build_sdwa(m.abstraction, d, m.signature, initial_data=data)


# ---------------------------------------------------------------------------
# simulation


class _Alt:
    """One disjunct of a transition: definitional equalities for successor fields."""

    __slots__ = ("defs",)

    def __init__(self, defs):
        self.defs = defs


def _alternatives(e: Expr, target: str, limit: int = 256):
    """Split ``e`` into alternatives, each mapping successor fields to defining
    expressions (over non-target variables).  Constraints that do not define
    a field are left to the final check."""
    prefix = target + "."

    def targets_in(x):
        return any(n.startswith(prefix) for n in cx.free_vars(x))

    def go(x):
        if isinstance(x, App):
            if x.op == "and":
                alts = [{}]
                for a in x.args:
                    nxt = []
                    for left in alts:
                        for right in go(a):
                            merged = dict(left)
                            merged.update(right)
                            nxt.append(merged)
                    if len(nxt) > limit:
                        raise UnsupportedSimulation("too many transition alternatives")
                    alts = nxt
                return alts
            if x.op == "or":
                out = []
                for a in x.args:
                    out.extend(go(a))
                if len(out) > limit:
                    raise UnsupportedSimulation("too many transition alternatives")
                return out
            if x.op == "=":
                lhs, rhs = x.args
                for u, v in ((lhs, rhs), (rhs, lhs)):
                    if isinstance(u, Var) and u.name.startswith(prefix) and not targets_in(v):
                        return [{u.name[len(prefix):]: v}]
        if isinstance(x, Var) and x.name.startswith(prefix) and x.sort is Sort.BOOL:
            return [{x.name[len(prefix):]: cx.TRUE}]
        if (isinstance(x, App) and x.op == "not" and isinstance(x.args[0], Var)
                and x.args[0].name.startswith(prefix)):
            return [{x.args[0].name[len(prefix):]: cx.FALSE}]
        return [{}]

    return go(e)


class _Stepper:
    """Successor computation for one automaton, with compiled expressions."""

    def __init__(self, m: Sdwa, max_states: int = 4096):
        self.m = m
        self.max_states = max_states
        self.trans_fn = cx.compile_expr(m.trans)
        self.init_fn = cx.compile_expr(m.init)
        self.final_fn = cx.compile_expr(m.final)
        self.trans_alts = self._prepare(m.trans, REC_SUCC)
        self.init_alts = self._prepare(m.init, REC_STATE)

    def _prepare(self, e, target):
        out = []
        for alt in _alternatives(e, target):
            missing = [n for n in self.m.state.names if n not in alt]
            for n in missing:
                if self.m.state.sort_of(n) is not Sort.BOOL:
                    raise UnsupportedSimulation(
                        f"successor field {n!r} is not determined by an equality")
            out.append((tuple((n, cx.compile_expr(v)) for n, v in alt.items()), tuple(missing)))
        return out

    def _candidates(self, alts, env):
        seen = []
        for defs, missing in alts:
            base = {}
            try:
                for n, fn in defs:
                    base[n] = self.m.state.sort_of(n).coerce(fn(env))
            except cx.ConstraintError:
                continue
            except TypeError:
                continue
            for bits in iproduct((False, True), repeat=len(missing)):
                rec = dict(base)
                rec.update(zip(missing, bits))
                if rec not in seen:
                    seen.append(rec)
        return seen

    @staticmethod
    def env(rec, prefix, env=None):
        env = {} if env is None else env
        for k, v in rec.items():
            env[f"{prefix}.{k}"] = v
        return env

    def initial(self) -> list[dict]:
        out = []
        for rec in self._candidates(self.init_alts, {}):
            if self.init_fn(self.env(rec, REC_STATE)):
                out.append(rec)
        return out

    def successors(self, rec: Mapping, sym: Mapping) -> list[dict]:
        env = self.env(rec, REC_STATE)
        self.env(sym, REC_LETTER, env)
        out = []
        for succ in self._candidates(self.trans_alts, env):
            full = dict(env)
            self.env(succ, REC_SUCC, full)
            if self.trans_fn(full):
                out.append(succ)
        return out

    def is_final(self, rec: Mapping) -> bool:
        return bool(self.final_fn(self.env(rec, REC_STATE)))


_STEPPERS: dict[int, tuple[Sdwa, _Stepper]] = {}


def stepper(m) -> _Stepper:
    m = as_sdwa(m)
    hit = _STEPPERS.get(id(m))
    if hit is not None and hit[0] is m:
        return hit[1]
    s = _Stepper(m)
    if len(_STEPPERS) > 256:
        _STEPPERS.clear()
    _STEPPERS[id(m)] = (m, s)
    return s


@dataclass
class SimulationResult:
    accepted: bool
    states: list[dict]            # final set of reachable states
    trace: list[dict] | None = None  # state sequence, for deterministic automata

    @property
    def final_state(self) -> dict | None:
        return self.states[0] if len(self.states) == 1 else None


def run(m, w: DataWord | Iterable[Mapping]) -> SimulationResult:
    """Simulate ``m`` on ``w``, tracking the set of reachable states."""
    st = stepper(m)
    symbols = w.symbols if isinstance(w, DataWord) else list(w)
    current = st.initial()
    trace = [current[0]] if len(current) == 1 else None
    for sym in symbols:
        nxt: list[dict] = []
        for rec in current:
            for succ in st.successors(rec, sym):
                if succ not in nxt:
                    nxt.append(succ)
        if len(nxt) > st.max_states:
            raise UnsupportedSimulation("state set exceeds the simulation bound")
        current = nxt
        if trace is not None:
            trace = trace + [current[0]] if len(current) == 1 else None
    accepted = any(st.is_final(rec) for rec in current)
    return SimulationResult(accepted, current, trace)


def simulate(m, w) -> bool:
    return run(m, w).accepted


# ---------------------------------------------------------------------------
# products


def _renamed(m: Sdwa, tag: str) -> Sdwa:
    names = {n: f"{tag}.{n}" for n in m.state.names}
    mapping = {}
    for rec in (REC_STATE, REC_SUCC):
        for n, new in names.items():
            mapping[f"{rec}.{n}"] = Var(f"{rec}.{new}", m.state.sort_of(n))
    ssig = DataSignature(tuple(Field(names[f.name], f.sort, f.default) for f in m.state.fields))
    return Sdwa(m.alphabet, ssig, cx.substitute(m.init, mapping), cx.substitute(m.trans, mapping),
                cx.substitute(m.final, mapping), m.deterministic,
                tuple((names[n], lo, hi) for n, lo, hi in m.bounds))


def _product(a, b, final_op) -> Sdwa:
    a, b = as_sdwa(a), as_sdwa(b)
    if a.alphabet.fields != b.alphabet.fields:
        raise SdwaError("alphabet signatures differ")
    if set(a.state.names) & set(b.state.names):
        a, b = _renamed(a, "l"), _renamed(b, "r")
    ssig = DataSignature(a.state.fields + b.state.fields)
    return Sdwa(a.alphabet, ssig, cx.and_(a.init, b.init), cx.and_(a.trans, b.trans),
                final_op(a.final, b.final), a.deterministic and b.deterministic,
                a.bounds + b.bounds)


def intersect(a, b) -> Sdwa:
    return _product(a, b, cx.and_)


def union(a, b) -> Sdwa:
    return _product(a, b, cx.or_)


def universal(alphabet: DataSignature) -> Sdwa:
    return Sdwa(alphabet, DataSignature(()), cx.TRUE, cx.TRUE, cx.TRUE, True)


def empty(alphabet: DataSignature) -> Sdwa:
    return Sdwa(alphabet, DataSignature(()), cx.TRUE, cx.TRUE, cx.FALSE, True)


# ---------------------------------------------------------------------------
# determinism


def _sample_value(rng: random.Random, sort: Sort, lo=-4, hi=4):
    if sort is Sort.BOOL:
        return rng.random() < 0.5
    if sort is Sort.INT:
        return rng.randint(lo, hi)
    return Fraction(rng.randint(lo * 2, hi * 2), 2)


def sample_record(rng: random.Random, sig: DataSignature, bounds=()) -> dict:
    rb = {n: (lo, hi) for n, lo, hi in bounds}
    rec = {}
    for f in sig.fields:
        if f.name in rb:
            rec[f.name] = rng.randint(*rb[f.name])
        else:
            rec[f.name] = _sample_value(rng, f.sort)
    return rec


def _perturb(v, sort):
    if sort is Sort.BOOL:
        return not v
    return v + 1


def check_determinism(m, samples: int = 1000, seed: int = 0) -> bool:
    """Sample (state, symbol) pairs and verify each has exactly one successor.

    Successors are read off the transition constraint; uniqueness is then
    cross-checked by perturbing each field of the successor, which must
    falsify the constraint.
    """
    base = as_sdwa(m)
    st = stepper(base)
    rng = random.Random(seed)
    if len(st.initial()) != 1:
        return False
    for _ in range(samples):
        rec = sample_record(rng, base.state, base.bounds)
        sym = sample_record(rng, base.alphabet)
        succ = st.successors(rec, sym)
        if len(succ) != 1:
            return False
        env = st.env(rec, REC_STATE)
        st.env(sym, REC_LETTER, env)
        for f in base.state.fields:
            alt = dict(succ[0])
            alt[f.name] = _perturb(alt[f.name], f.sort)
            full = st.env(alt, REC_SUCC, dict(env))
            if st.trans_fn(full):
                return False
    return True


def check_buffer(m: LiftedSdwa, w: DataWord) -> bool:
    """After each step the buffer holds the most recent symbols, newest first."""
    res = run(m, w)
    if res.trace is None:
        return False
    symbols = list(w.symbols)
    defaults = m.signature.defaults()
    for k, rec in enumerate(res.trace):
        for i in range(1, m.buffer + 1):
            src = symbols[k - i] if k - i >= 0 else defaults
            for f in m.signature.names:
                if rec[buffer_field(i, f)] != src[f]:
                    return False
    return True


def _solve_definitions(e: Expr, target: str, sig: DataSignature, env) -> dict | None:
    st_alts = _alternatives(e, target)
    if len(st_alts) != 1:
        return None
    rec = {}
    for n in sig.names:
        if n not in st_alts[0]:
            return None
        rec[n] = sig.sort_of(n).coerce(cx.evaluate(st_alts[0][n], env))
    return rec


# ---------------------------------------------------------------------------
# model files


def load_model(text: str) -> Sdwa:
    """Read a JSON model file: ``alphabet``/``state`` signatures and SMT-text
    ``init``/``trans``/``final`` constraints over ``q.``/``a.``/``qp.`` variables."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SdwaError(f"model file: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SdwaError("model file must be a JSON object")
    for key in ("alphabet", "state", "init", "trans", "final"):
        if key not in doc:
            raise SdwaError(f"model file: missing key {key!r}")
    try:
        alphabet = parse_signature(json.dumps(doc["alphabet"]))
        state = parse_signature(json.dumps(doc["state"]))
    except SignatureError as exc:
        raise SdwaError(f"model file: {exc}") from None

    def resolve(name):
        rec, _, f = name.partition(".")
        sig = {REC_STATE: state, REC_SUCC: state, REC_LETTER: alphabet}.get(rec)
        if sig is not None and f in sig:
            return sig.sort_of(f)
        return None

    exprs = {}
    for key in ("init", "trans", "final"):
        try:
            exprs[key] = cx.parse_smt_expr(doc[key], resolve)
        except cx.ConstraintError as exc:
            raise SdwaError(f"model file: {key}: {exc}") from None
    bounds = tuple((b["field"], int(b["min"]), int(b["max"])) for b in doc.get("bounds", ()))
    return Sdwa(alphabet, state, exprs["init"], exprs["trans"], exprs["final"],
                bool(doc.get("deterministic", False)), bounds)


def dump_model(m) -> str:
    from .logic import signature_to_json

    m = as_sdwa(m)
    doc = {
        "alphabet": signature_to_json(m.alphabet),
        "state": signature_to_json(m.state),
        "init": cx.to_smt(m.init),
        "trans": cx.to_smt(m.trans),
        "final": cx.to_smt(m.final),
        "deterministic": m.deterministic,
    }
    if m.bounds:
        doc["bounds"] = [{"field": n, "min": lo, "max": hi} for n, lo, hi in m.bounds]
    return json.dumps(doc, indent=2) + "\n"


def describe(m) -> str:
    m = as_sdwa(m)
    lines = [
        "alphabet: " + ", ".join(f"{f.name}:{f.sort.value}" for f in m.alphabet.fields),
        "state:    " + ", ".join(f"{f.name}:{f.sort.value}" for f in m.state.fields),
        f"init:  {cx.to_smt(m.init)}",
        f"trans: {cx.to_smt(m.trans)}",
        f"final: {cx.to_smt(m.final)}",
    ]
    return "\n".join(lines)


__all__ = [
    "LiftedSdwa", "Sdwa", "SdwaError", "UnsupportedSimulation", "build_sdwa", "check_buffer",
    "check_determinism", "compile_atom", "compile_formula", "describe", "dump_model", "empty",
    "intersect", "load_model", "reroot", "run", "simulate", "union", "universal",
]
