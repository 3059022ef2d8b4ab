"""Satisfiability, model checking and runtime monitoring pipelines."""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import chc
from .config import RunConfig
from .dfa import Dfa, import_dfa, ltlf_to_dfa
from .logic import DataSignature, DataWord, Formula, LtlfmtError, eval_formula
from .normal_forms import AbstractionResult, abstract, remove_weak_next
from .sdwa import (
    STATE_FIELD,
    LiftedSdwa,
    Sdwa,
    as_sdwa,
    build_sdwa,
    intersect,
    reroot,
    run,
    stepper,
)


class PipelineError(LtlfmtError):
    """A construction failure, tagged with the pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


class VerdictKind(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass
class Verdict:
    kind: VerdictKind
    witness: DataWord | None = None
    reason: str = ""
    chc_count: int = 0
    build_time: float = 0.0
    solve_time: float = 0.0
    automaton: object = field(default=None, repr=False)
    system: object = field(default=None, repr=False)

    @property
    def exit_code(self) -> int:
        return {VerdictKind.SAT: 0, VerdictKind.UNSAT: 1, VerdictKind.UNKNOWN: 2}[self.kind]


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (chc.SolverError, PipelineError):
        raise
    except (LtlfmtError, ValueError) as exc:
        raise PipelineError(name, exc) from exc


def lift(f: Formula, sig: DataSignature, config: RunConfig | None = None) -> LiftedSdwa:
    """remove_weak_next -> abstract -> DFA -> lifted automaton."""
    config = config or RunConfig()
    g = _stage("weak-next removal", remove_weak_next, f)
    ar: AbstractionResult = _stage("abstraction", abstract, g)
    if config.dfa_import:
        text = _stage("dfa import", Path(config.dfa_import).read_text)
        d: Dfa = _stage("dfa import", import_dfa, text, ar.props)
    else:
        d = _stage("dfa construction", ltlf_to_dfa, ar.ltlf, ar.props)
    return _stage("lifting", build_sdwa, ar, d, sig)


def _chc_verdict(res: chc.SolveResult) -> VerdictKind:
    if res.verdict is chc.ChcVerdict.SYSTEM_SAT:
        return VerdictKind.UNSAT   # no accepted word
    if res.verdict is chc.ChcVerdict.SYSTEM_UNSAT:
        return VerdictKind.SAT     # some accepted word
    return VerdictKind.UNKNOWN


def _decide(m, encoding: str, config: RunConfig, t_build: float) -> Verdict:
    system = _stage("chc emission", chc.emit_chcs, m, encoding)
    res = chc.solve(system, config.solver_cmd, config.timeout)
    kind = _chc_verdict(res)
    reason = "" if kind is not VerdictKind.UNKNOWN else f"solver answered {res.verdict.value}"
    return Verdict(kind, None, reason, len(system), t_build, res.elapsed, m, system)


def check_sat(f: Formula, sig: DataSignature, config: RunConfig | None = None) -> Verdict:
    """Decide whether some data word satisfies ``f``.

    The language of the lifted automaton is empty exactly when its clause
    system is satisfiable, so the solver verdict is reported inverted.
    """
    config = config or RunConfig()
    t0 = time.perf_counter()
    m = lift(f, sig, config)
    v = _decide(m, config.encoding, config, time.perf_counter() - t0)
    if v.kind is VerdictKind.SAT and config.witness:
        w = chc.find_witness(m, config.max_witness_len, config.smt_cmd, config.timeout)
        if w is not None:
            if not eval_formula(f, w):
                raise PipelineError("witness", LtlfmtError("witness does not satisfy the formula"))
            v.witness = w
    return v


def model_check(system: Sdwa, f: Formula, config: RunConfig | None = None,
                sig: DataSignature | None = None) -> Verdict:
    """Is there a word accepted by ``system`` that satisfies ``f``?

    ``sig``, when given, is the signature ``f`` was written against and must
    equal the system's alphabet.
    """
    config = config or RunConfig()
    base = as_sdwa(system)
    if sig is not None:
        check_signature(base, sig)
    t0 = time.perf_counter()
    m = lift(f, base.alphabet, config)
    product = _stage("product", intersect, base, m)
    v = _decide(product, "monolithic", config, time.perf_counter() - t0)
    if v.kind is VerdictKind.SAT and config.witness:
        w = chc.find_witness(product, config.max_witness_len, config.smt_cmd, config.timeout)
        if w is not None:
            if not (eval_formula(f, w) and run(base, w).accepted):
                raise PipelineError("witness", LtlfmtError("witness failed validation"))
            v.witness = w
    return v


def check_signature(system: Sdwa, sig: DataSignature) -> None:
    if as_sdwa(system).alphabet.fields != sig.fields:
        raise PipelineError("model checking", LtlfmtError(
            "the system's alphabet signature differs from the formula signature"))


# ---------------------------------------------------------------------------
# monitoring


class RV(enum.Enum):
    CS = "CS"  # currently satisfied, some extension violates
    PS = "PS"  # permanently satisfied
    CV = "CV"  # currently violated, some extension satisfies
    PV = "PV"  # permanently violated
    UNKNOWN = "UNKNOWN"


@dataclass
class MonitorState:
    rv: RV
    reason: str = ""

    def to_json(self, step: int) -> dict:
        out = {"step": step, "rv": self.rv.value}
        if self.reason:
            out["reason"] = self.reason
        return out


MODES = ("exact", "approx")


@dataclass
class MonitorSession:
    automaton: LiftedSdwa
    current: dict
    mode: str = "exact"
    config: RunConfig = field(default_factory=RunConfig)
    history: list = field(default_factory=list)
    prefix: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def step_count(self) -> int:
        return len(self.prefix)


def monitor_start(f: Formula, sig: DataSignature, mode: str = "exact",
                  config: RunConfig | None = None) -> MonitorSession:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    m = lift(f, sig, config)
    return MonitorSession(m, m.initial_record(), mode, config or RunConfig())


def _empty_from(session: MonitorSession, accepting: bool) -> bool | None:
    """Is no word accepted from the current state, towards accepting states
    (``accepting``) or towards rejecting states (otherwise)?  ``None`` when
    the check is inconclusive."""
    m = session.automaton
    q = session.current
    d = m.dfa if accepting else m.dfa.complement()
    if d.is_empty(int(q[STATE_FIELD])):
        return True   # not even the abstraction can get there
    if session.mode == "approx":
        return False
    key = (tuple(sorted(q.items())), accepting)
    if key in session._cache:
        return session._cache[key]
    target = reroot(m, q, complement=not accepting)
    try:
        res = chc.solve(chc.emit_chcs(target, "per-state"), session.config.solver_cmd,
                        session.config.monitor_budget)
    except chc.SolverError:
        return None
    empty = res.language_empty
    if empty is not None:
        session._cache[key] = empty
    return empty


def classify(session: MonitorSession) -> MonitorState:
    m = session.automaton
    final = stepper(m).is_final(session.current)
    # satisfied now: can an extension violate?  violated now: can one satisfy?
    empty = _empty_from(session, accepting=not final)
    if empty is None:
        return MonitorState(RV.UNKNOWN, "emptiness check did not finish within the budget")
    if final:
        return MonitorState(RV.PS if empty else RV.CS)
    return MonitorState(RV.PV if empty else RV.CV)


def monitor_step(session: MonitorSession, sym: Mapping) -> MonitorState:
    sym = session.automaton.signature.check_symbol(sym)
    succ = stepper(session.automaton).successors(session.current, sym)
    if len(succ) != 1:
        raise LtlfmtError("lifted automaton is not deterministic")
    session.current = succ[0]
    session.prefix.append(sym)
    state = classify(session)
    session.history.append(state)
    return state


def monitor_trace(f: Formula, sig: DataSignature, trace: Sequence[Mapping], mode: str = "exact",
                  config: RunConfig | None = None) -> list[MonitorState]:
    s = monitor_start(f, sig, mode, config)
    return [monitor_step(s, sym) for sym in trace]


def monitor_verdict_semantics_oracle(f: Formula, w: Sequence[Mapping],
                                     grid: Mapping[str, Sequence], max_extension: int) -> RV:
    """Classify ``w`` by brute force over extensions drawn from ``grid``.

    Sound only relative to the grid and horizon: a verdict of PS/PV means no
    extension up to ``max_extension`` symbols over the grid flips the answer.
    """
    names = list(grid)
    letters = [dict(zip(names, vals)) for vals in itertools.product(*(grid[n] for n in names))]
    w = list(w)
    now = eval_formula(f, w)
    for k in range(1, max_extension + 1):
        for ext in itertools.product(letters, repeat=k):
            if eval_formula(f, w + list(ext)) != now:
                return RV.CS if now else RV.CV
    return RV.PS if now else RV.PV


__all__ = [
    "MODES", "MonitorSession", "MonitorState", "PipelineError", "RV", "Verdict", "VerdictKind",
    "check_sat", "check_signature", "classify", "lift", "model_check", "monitor_start",
    "monitor_step", "monitor_trace", "monitor_verdict_semantics_oracle",
]
