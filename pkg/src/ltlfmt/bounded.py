"""Bounded satisfiability by direct unrolling of the semantics.

For a fixed word length the error-aware semantics is static: whether a read
falls off the end of the word depends only on the position.  A formula is
therefore equivalent, on words of length ``L``, to a quantifier-free
constraint over variables ``w{j}.{field}``.  This is independent of the
automaton construction and serves as an oracle for it.
"""

from __future__ import annotations

from typing import Sequence

from . import constraints as cx
from .constraints import Expr, Lit, Var
from .logic import (
    And,
    Apply,
    Atom,
    BoolField,
    Const,
    DataSignature,
    DataWord,
    FalseC,
    Formula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Tomorrow,
    TrueC,
    Until,
    WeakNext,
    atom_reads,
)


def position_var(j: int, field: str, sig: DataSignature) -> Var:
    return Var(f"w{j}.{field}", sig.sort_of(field))


def unroll(f: Formula, sig: DataSignature, length: int) -> Expr:
    """A constraint true exactly for the words of ``length`` satisfying ``f``."""
    memo: dict[tuple[int, int], Expr] = {}

    def term(t, i):
        if isinstance(t, (Next, WeakNext)):
            return position_var(i + t.n, t.field, sig)
        if isinstance(t, Const):
            return Lit(t.value, t.sort)
        if isinstance(t, Apply):
            return cx.arith(t.op, *(term(a, i) for a in t.args))
        raise TypeError(f"not a term: {t!r}")

    def atom(a, i):
        reads = atom_reads(a)
        if any(isinstance(r, Next) and i + r.n >= length for r in reads):
            return cx.FALSE
        if any(isinstance(r, WeakNext) and i + r.n >= length for r in reads):
            return cx.TRUE
        if isinstance(a, BoolField):
            return term(a.term, i)
        return cx.cmp(a.pred, term(a.lhs, i), term(a.rhs, i))

    def go(g, i):
        key = (id(g), i)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(g, TrueC):
            r = cx.TRUE
        elif isinstance(g, FalseC):
            r = cx.FALSE
        elif isinstance(g, (Atom, BoolField)):
            r = atom(g, i)
        elif isinstance(g, Not):
            r = cx.not_(go(g.sub, i))
        elif isinstance(g, And):
            r = cx.and_(go(g.left, i), go(g.right, i))
        elif isinstance(g, Or):
            r = cx.or_(go(g.left, i), go(g.right, i))
        elif isinstance(g, Implies):
            r = cx.implies(go(g.left, i), go(g.right, i))
        elif isinstance(g, Iff):
            a, b = go(g.left, i), go(g.right, i)
            r = cx.or_(cx.and_(a, b), cx.and_(cx.not_(a), cx.not_(b)))
        elif isinstance(g, Until):
            # l U r at i: r holds at some k >= i with l at every i <= m < k
            r = cx.FALSE
            for k in range(length - 1, i - 1, -1):
                r = cx.or_(go(g.right, k), cx.and_(go(g.left, k), r))
        elif isinstance(g, Tomorrow):
            r = go(g.sub, i + 1) if length - i > 1 else cx.FALSE
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[key] = r
        return r

    return go(f, 0)


def _query(f: Formula, sig: DataSignature, length: int):
    decls = [f"(declare-const {cx.smt_symbol(f'w{j}.{fd.name}')} {fd.sort.smt})"
             for j in range(length) for fd in sig.fields]
    values = [cx.smt_symbol(f"w{j}.{fd.name}") for j in range(length) for fd in sig.fields]
    return [cx.to_smt(unroll(f, sig, length))], values, decls


def bounded_models(items: Sequence[tuple[Formula, DataSignature, int]],
                   solver_cmd: str | None = None, timeout: float = 600.0) -> list:
    """For each ``(formula, signature, length)`` return a model word or ``None``.

    All queries run in one solver process; ``"unknown"`` marks unresolved ones.
    """
    from .chc import run_smt_queries

    queries = [_query(f, sig, n) for f, sig, n in items]
    results = run_smt_queries([], queries, solver_cmd, timeout)
    out = []
    for (f, sig, n), res in zip(items, results):
        if isinstance(res, dict):
            symbols = []
            for j in range(n):
                symbols.append({fd.name: cx.parse_smt_value(res[cx.smt_symbol(f"w{j}.{fd.name}")], fd.sort)
                                for fd in sig.fields})
            out.append(DataWord(sig, tuple(symbols)))
        else:
            out.append(res)
    return out
