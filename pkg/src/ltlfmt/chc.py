"""Constrained Horn clauses whose satisfiability is equivalent to emptiness
of an automaton, their SMT-LIB serialization and the external solver driver.

Two encodings are offered:

* ``monolithic``: a single predicate ``h`` over the whole state record and
  three clauses (initial states, transitions, accepting states);
* ``per-state``: for lifted automata, one predicate per DFA state over the
  data buffer, one clause per DFA edge.

A *satisfiable* system means the language is *empty*.
"""

from __future__ import annotations

import enum
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import constraints as cx
from .constraints import Expr, Lit, Var
from .logic import DataWord, LtlfmtError, Sort
from .sdwa import (
    REC_LETTER,
    REC_STATE,
    REC_SUCC,
    STATE_FIELD,
    LiftedSdwa,
    Sdwa,
    as_sdwa,
    buffer_shift,
    restricted_step,
    run,
)


class ChcError(LtlfmtError):
    pass


class SolverError(LtlfmtError):
    def __init__(self, msg: str, raw_output: str = ""):
        super().__init__(msg)
        self.raw_output = raw_output


DEFAULT_HORN_CMD = "z3 -smt2 {input}"
DEFAULT_TIMEOUT = 600.0
SOLVER_ENV = "LTLFMT_SOLVER"
SMT_ENV = "LTLFMT_SMT_SOLVER"


def solver_command(cmd: str | None = None) -> str:
    return cmd or os.environ.get(SOLVER_ENV) or DEFAULT_HORN_CMD


def smt_command(cmd: str | None = None) -> str:
    """Command for plain (non-Horn) SMT queries; defaults to the Horn command."""
    return cmd or os.environ.get(SMT_ENV) or solver_command()


# ---------------------------------------------------------------------------
# clause systems


@dataclass(frozen=True)
class Predicate:
    name: str
    sorts: tuple[Sort, ...]


@dataclass(frozen=True)
class PredApp:
    pred: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Clause:
    head: PredApp | None  # None is the head ``false``
    constraint: Expr
    body: tuple[PredApp, ...] = ()


@dataclass(frozen=True)
class ChcSystem:
    predicates: tuple[Predicate, ...]
    clauses: tuple[Clause, ...]

    def __len__(self):
        return len(self.clauses)

    def check(self) -> None:
        """Verify arities and argument sorts of every predicate application."""
        decl = {p.name: p for p in self.predicates}
        for k, c in enumerate(self.clauses):
            if c.constraint.sort is not Sort.BOOL:
                raise ChcError(f"clause {k}: constraint is not Boolean")
            for app in ((c.head,) if c.head else ()) + c.body:
                p = decl.get(app.pred)
                if p is None:
                    raise ChcError(f"clause {k}: undeclared predicate {app.pred}")
                if tuple(a.sort for a in app.args) != p.sorts:
                    raise ChcError(f"clause {k}: ill-sorted application of {app.pred}")


def _record(rec: str, fields) -> tuple[Var, ...]:
    return tuple(Var(f"{rec}.{f.name}", f.sort) for f in fields)


def emit_chcs(m, encoding: str = "monolithic") -> ChcSystem:
    if encoding == "monolithic":
        return _monolithic(as_sdwa(m))
    if encoding in ("per-state", "per_state"):
        if not isinstance(m, LiftedSdwa):
            raise ChcError("the per-state encoding needs an automaton lifted from a DFA")
        return _per_state(m)
    raise ChcError(f"unknown encoding {encoding!r}")


def _monolithic(m: Sdwa) -> ChcSystem:
    fields = m.state.fields
    h = Predicate("h", tuple(f.sort for f in fields))
    q, qp = _record(REC_STATE, fields), _record(REC_SUCC, fields)
    clauses = (
        Clause(PredApp("h", q), cx.and_(m.init, m.range_constraint(REC_STATE))),
        Clause(PredApp("h", qp), cx.and_(m.trans, m.range_constraint(REC_SUCC)), (PredApp("h", q),)),
        Clause(None, m.final, (PredApp("h", q),)),
    )
    return ChcSystem((h,), clauses)


def _guard(m: LiftedSdwa, cubes) -> Expr:
    idx = {p: i for i, p in enumerate(m.dfa.props)}
    return cx.or_(*(cx.and_(*(m.guards[idx[p]] if val else cx.not_(m.guards[idx[p]])
                              for p, val in cube)) for cube in cubes))


def _per_state(m: LiftedSdwa) -> ChcSystem:
    data = tuple(f for f in m.state.fields if f.name != STATE_FIELD)
    sorts = tuple(f.sort for f in data)
    d = m.dfa
    preds = tuple(Predicate(f"h_{s}", sorts) for s in d.states)
    q, qp = _record(REC_STATE, data), _record(REC_SUCC, data)
    start = m.initial_record()
    init = cx.and_(*(cx.eq(v, Lit(start[f.name], f.sort)) for v, f in zip(q, data)))
    clauses = [Clause(PredApp(f"h_{start[STATE_FIELD]}", q), init)]
    shift = cx.and_(*buffer_shift(m.signature, m.buffer))
    for (src, dst), cubes in sorted(d.edges().items()):
        clauses.append(Clause(PredApp(f"h_{dst}", qp), cx.and_(_guard(m, cubes), shift),
                              (PredApp(f"h_{src}", q),)))
    for s in sorted(d.accepting):
        clauses.append(Clause(None, cx.TRUE, (PredApp(f"h_{s}", q),)))
    return ChcSystem(preds, tuple(clauses))


# ---------------------------------------------------------------------------
# SMT-LIB text


def _app_text(app: PredApp) -> str:
    if not app.args:
        return cx.smt_symbol(app.pred)
    return f"({cx.smt_symbol(app.pred)} {' '.join(cx.to_smt(a) for a in app.args)})"


def clause_vars(c: Clause) -> dict[str, Sort]:
    exprs = [a for app in c.body for a in app.args] + [c.constraint]
    if c.head:
        exprs += list(c.head.args)
    return cx.ordered_vars(*exprs)


def serialize(system: ChcSystem) -> str:
    """Deterministic Horn-logic SMT-LIB text for ``system``."""
    lines = ["(set-logic HORN)"]
    for p in system.predicates:
        lines.append(f"(declare-fun {cx.smt_symbol(p.name)} ({' '.join(s.smt for s in p.sorts)}) Bool)")
    for c in system.clauses:
        parts = [] if c.constraint == cx.TRUE else [cx.to_smt(c.constraint)]
        parts += [_app_text(b) for b in c.body]
        if not parts:
            lhs = "true"
        elif len(parts) == 1:
            lhs = parts[0]
        else:
            lhs = f"(and {' '.join(parts)})"
        head = _app_text(c.head) if c.head else "false"
        body = f"(=> {lhs} {head})"
        vs = clause_vars(c)
        if vs:
            binders = " ".join(f"({cx.smt_symbol(n)} {s.smt})" for n, s in vs.items())
            body = f"(forall ({binders}) {body})"
        lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def parse_chc(text: str) -> ChcSystem:
    """Read back the Horn fragment produced by :func:`serialize`."""
    preds: list[Predicate] = []
    clauses: list[Clause] = []
    sorts = {s.smt: s for s in Sort}
    for cmd in cx.parse_sexprs(text):
        if not isinstance(cmd, list) or not cmd:
            raise ChcError(f"unexpected top-level item {cmd!r}")
        head = cmd[0]
        if head in ("set-logic", "check-sat", "exit", "set-info", "set-option", "get-model"):
            continue
        if head == "declare-fun":
            _, name, args, ret = cmd
            if ret != "Bool":
                raise ChcError(f"predicate {name} must return Bool")
            try:
                preds.append(Predicate(name, tuple(sorts[a] for a in args)))
            except KeyError as exc:
                raise ChcError(f"unsupported sort {exc}") from None
            continue
        if head != "assert":
            raise ChcError(f"unsupported command {head!r}")
        clauses.append(_parse_clause(cmd[1], {p.name: p for p in preds}, sorts))
    return ChcSystem(tuple(preds), tuple(clauses))


def _parse_clause(sx, preds, sorts) -> Clause:
    env: dict[str, Sort] = {}
    if isinstance(sx, list) and sx and sx[0] == "forall":
        for name, s in sx[1]:
            env[name] = sorts[s]
        sx = sx[2]
    if isinstance(sx, list) and sx and sx[0] == "=>":
        lhs, rhs = sx[1], sx[2]
    else:
        lhs, rhs = "true", sx

    def app(x):
        if isinstance(x, str) and x in preds:
            return PredApp(x, ())
        if isinstance(x, list) and x and isinstance(x[0], str) and x[0] in preds:
            return PredApp(x[0], tuple(cx.sexpr_to_expr(a, env.get) for a in x[1:]))
        return None

    items = lhs[1:] if isinstance(lhs, list) and lhs and lhs[0] == "and" else [lhs]
    body, rest = [], []
    for it in items:
        a = app(it)
        if a is not None:
            body.append(a)
        else:
            rest.append(cx.sexpr_to_expr(it, env.get))
    head = None if rhs == "false" else app(rhs)
    if head is None and rhs != "false":
        raise ChcError(f"clause head is not a predicate application: {rhs!r}")
    return Clause(head, cx.and_(*rest), tuple(body))


# ---------------------------------------------------------------------------
# solving


class ChcVerdict(enum.Enum):
    SYSTEM_SAT = "sat"       # language empty
    SYSTEM_UNSAT = "unsat"   # language nonempty
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class SolveResult:
    verdict: ChcVerdict
    raw_output: str
    elapsed: float

    @property
    def language_empty(self) -> bool | None:
        if self.verdict is ChcVerdict.SYSTEM_SAT:
            return True
        if self.verdict is ChcVerdict.SYSTEM_UNSAT:
            return False
        return None


def run_solver(script: str, cmd: str, timeout: float) -> tuple[str, float, bool]:
    """Run a solver command template on ``script``.

    ``{input}`` in the template is replaced by the path of a temporary file;
    without the placeholder the script is passed on standard input.  Returns
    (stdout, elapsed seconds, timed_out).
    """
    argv_t = shlex.split(cmd)
    if not argv_t:
        raise SolverError("empty solver command")
    path = None
    try:
        if any("{input}" in a for a in argv_t):
            fd, path = tempfile.mkstemp(suffix=".smt2", prefix="ltlfmt-")
            with os.fdopen(fd, "w") as fh:
                fh.write(script)
            argv = [a.replace("{input}", path) for a in argv_t]
            stdin = None
        else:
            argv, stdin = argv_t, script
        start = time.perf_counter()
        try:
            proc = subprocess.run(argv, input=stdin, capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired as exc:
            out = exc.stdout or ""
            if isinstance(out, bytes):
                out = out.decode(errors="replace")
            return out, time.perf_counter() - start, True
        except OSError as exc:
            raise SolverError(f"cannot run solver {argv[0]!r}: {exc.strerror or exc}") from None
        return proc.stdout + proc.stderr, time.perf_counter() - start, False
    finally:
        if path:
            os.unlink(path)


def _first_verdict(output: str) -> ChcVerdict | None:
    for line in output.splitlines():
        tok = line.strip()
        if tok in ("sat", "unsat", "unknown"):
            return ChcVerdict(tok)
        if tok == "timeout":
            return ChcVerdict.TIMEOUT
    return None


def solve(system: ChcSystem | str, solver_cmd: str | None = None,
          timeout: float = DEFAULT_TIMEOUT) -> SolveResult:
    text = system if isinstance(system, str) else serialize(system)
    out, elapsed, timed_out = run_solver(text, solver_command(solver_cmd), timeout)
    if timed_out:
        return SolveResult(ChcVerdict.TIMEOUT, out, elapsed)
    verdict = _first_verdict(out)
    if verdict is None:
        raise SolverError("solver produced no verdict", out)
    return SolveResult(verdict, out, elapsed)


def solver_available(solver_cmd: str | None = None) -> bool:
    try:
        res = solve(ChcSystem((), ()), solver_cmd, timeout=30)
    except SolverError:
        return False
    return res.verdict is ChcVerdict.SYSTEM_SAT


# ---------------------------------------------------------------------------
# bounded witnesses


def run_smt_queries(preamble: Sequence[str], queries: Sequence[tuple[Sequence[str], Sequence[str]]],
                    solver_cmd: str | None = None, timeout: float = DEFAULT_TIMEOUT):
    """Run several scoped queries in one solver process.

    Each query is ``(assertions, value_terms)`` or
    ``(assertions, value_terms, declarations)``; declarations are scoped.  Returns one item per query:
    ``None`` when unsatisfiable, ``"unknown"``, or a dict from value term to
    the parsed model value.
    """
    lines = list(preamble)
    for query in queries:
        assertions, values = query[0], query[1]
        lines.append("(push 1)")
        lines.extend(query[2] if len(query) > 2 else ())
        lines.extend(f"(assert {a})" for a in assertions)
        lines.append("(check-sat)")
        if values:
            lines.append(f"(get-value ({' '.join(values)}))")
        lines.append("(pop 1)")
    out, _, timed_out = run_solver("\n".join(lines) + "\n", smt_command(solver_cmd), timeout)
    items = cx.parse_sexprs(_strip_errors(out))
    results = []
    k = 0
    for query in queries:
        values = query[1]
        if k >= len(items):
            if timed_out:
                results.append("unknown")
                continue
            raise SolverError("solver output ended early", out)
        verdict = items[k]
        k += 1
        if verdict == "sat":
            model = {}
            if values:
                if k >= len(items) or not isinstance(items[k], list):
                    raise SolverError("missing model values", out)
                for term, val in items[k]:
                    model[_sexpr_text(term)] = val
                k += 1
            results.append(model)
        elif verdict == "unsat":
            results.append(None)
        elif verdict == "unknown":
            results.append("unknown")
        else:
            raise SolverError(f"unexpected solver response {verdict!r}", out)
    return results


def _strip_errors(out: str) -> str:
    return "\n".join(l for l in out.splitlines() if not l.startswith("(error"))


def _sexpr_text(sx) -> str:
    if isinstance(sx, str):
        return cx.smt_symbol(sx)
    return "(" + " ".join(_sexpr_text(x) for x in sx) + ")"


def _declare(name: str, sort: Sort) -> str:
    return f"(declare-const {cx.smt_symbol(name)} {sort.smt})"


def _unrolling_decls(base: Sdwa, k: int) -> list[str]:
    decls = []
    for i in range(k + 1):
        decls += [_declare(f"s{i}.{f.name}", f.sort) for f in base.state.fields]
    for i in range(1, k + 1):
        decls += [_declare(f"a{i}.{f.name}", f.sort) for f in base.alphabet.fields]
    return decls


def unrolling(m, k: int) -> tuple[list[str], list[str], list[str]]:
    """Declarations and constraints for an accepting run of length ``k``.

    Returns (declarations, run constraints without the final condition,
    the final condition) with states named ``s{i}.*`` and letters ``a{i}.*``.
    """
    base = as_sdwa(m)
    decls, asserts = _unrolling_decls(base, k), []
    asserts.append(cx.to_smt(cx.and_(cx.rename_records(base.init, {REC_STATE: "s0"}),
                                     cx.rename_records(base.range_constraint(), {REC_STATE: "s0"}))))
    for i in range(1, k + 1):
        step = cx.rename_records(base.trans, {REC_STATE: f"s{i - 1}", REC_LETTER: f"a{i}",
                                              REC_SUCC: f"s{i}"})
        asserts.append(cx.to_smt(step))
    final = cx.to_smt(cx.rename_records(base.final, {REC_STATE: f"s{k}"}))
    return decls, asserts, [final]


def dfa_layers(d, k: int) -> list[set[int]] | None:
    """DFA states that can occur at each position of an accepted run of
    length ``k``; ``None`` when the abstraction already rules ``k`` out."""
    fwd = [{d.initial}]
    for _ in range(k):
        fwd.append(set().union(*(d.successors(q) for q in fwd[-1])))
    pred: dict[int, set[int]] = {}
    for q in d.states:
        for r in d.successors(q):
            pred.setdefault(r, set()).add(q)
    bwd = [set(d.accepting)]
    for _ in range(k):
        bwd.append(set().union(*(pred.get(q, set()) for q in bwd[-1])))
    layers = [fwd[i] & bwd[k - i] for i in range(k + 1)]
    return layers if all(layers) else None


def _layered_query(m: LiftedSdwa, k: int, layers, memo) -> list[str]:
    """Run constraints of length ``k`` using only the DFA states in ``layers``."""
    state = lambda i: Var(f"s{i}.{STATE_FIELD}", Sort.INT)  # noqa: E731
    out = [cx.to_smt(cx.rename_records(m.base.init, {REC_STATE: "s0"}))]
    for i in range(1, k + 1):
        step = cx.rename_records(restricted_step(m, layers[i - 1], memo),
                                 {REC_STATE: f"s{i - 1}", REC_LETTER: f"a{i}", REC_SUCC: f"s{i}"})
        member = cx.or_(*(cx.eq(state(i), Lit(q, Sort.INT)) for q in sorted(layers[i])))
        out.append(cx.to_smt(cx.and_(step, member)))
    return out


def find_witness(m, max_len: int, solver_cmd: str | None = None,
                 timeout: float = DEFAULT_TIMEOUT, min_len: int = 0) -> DataWord | None:
    """Search for an accepted word of length ``min_len..max_len`` by unrolling.

    For lifted automata each step only dispatches over the DFA states that
    can still lie on an accepting run, and lengths the DFA rules out are
    skipped.  Every returned word has been re-checked by simulation.
    ``None`` only means no word up to ``max_len`` was found.
    """
    base = as_sdwa(m)
    lifted = isinstance(m, LiftedSdwa)
    if lifted:
        decls, asserts = _unrolling_decls(base, max_len), []
    else:
        decls, asserts, _ = unrolling(m, max_len)
    lengths, queries, memo = [], [], {}
    for k in range(min_len, max_len + 1):
        if lifted:
            layers = dfa_layers(m.dfa, k)
            if layers is None:
                continue
            run_k = _layered_query(m, k, layers, memo)
        else:
            # init plus the first k steps; later states stay unconstrained
            run_k = asserts[:k + 1]
        final = cx.to_smt(cx.rename_records(base.final, {REC_STATE: f"s{k}"}))
        values = [cx.smt_symbol(f"a{i}.{f.name}") for i in range(1, k + 1) for f in base.alphabet.fields]
        lengths.append(k)
        queries.append((run_k + [final], values))
    if not queries:
        return None
    results = run_smt_queries(decls, queries, solver_cmd, timeout)
    for k, res in zip(lengths, results):
        if isinstance(res, dict):
            w = _word_from_model(base, k, res)
            if not run(m, w).accepted:
                raise SolverError(f"witness of length {k} failed re-simulation")
            return w
    return None


def _word_from_model(base: Sdwa, k: int, model: Mapping[str, object]) -> DataWord:
    symbols = []
    for i in range(1, k + 1):
        sym = {}
        for f in base.alphabet.fields:
            sx = model[cx.smt_symbol(f"a{i}.{f.name}")]
            sym[f.name] = cx.parse_smt_value(sx, f.sort)
        symbols.append(sym)
    return DataWord(base.alphabet, tuple(symbols))


__all__ = [
    "ChcError", "ChcSystem", "ChcVerdict", "Clause", "PredApp", "Predicate", "SolveResult",
    "SolverError", "emit_chcs", "find_witness", "parse_chc", "run_smt_queries", "run_solver",
    "serialize", "solve", "solver_available", "unrolling",
]
