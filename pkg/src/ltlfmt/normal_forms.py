"""Source-to-source rewrites: weak-next elimination, lookahead reduction and
the propositional abstraction of data atoms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .logic import (
    FALSE,
    TRUE,
    And,
    Apply,
    Atom,
    BoolField,
    DataSignature,
    DataWord,
    Field,
    Formula,
    Next,
    Not,
    Or,
    TrueC,
    WeakNext,
    atom_reads,
    atoms_of,
    conj,
    eval_formula,
    globally,
    has_weak_next,
    last,
    lookahead,
    map_atoms,
    map_atoms_ctx,
    nonempty,
    prop,
    tomorrow_n,
)


def _strengthen(t):
    if isinstance(t, WeakNext):
        return Next(t.n, t.field)
    if isinstance(t, Apply):
        return Apply(t.op, tuple(_strengthen(a) for a in t.args))
    return t


def _map_terms(a, fn):
    if isinstance(a, BoolField):
        return BoolField(fn(a.term))
    return Atom(a.pred, fn(a.lhs), fn(a.rhs))


def _steps_exist(k: int, guarded: bool) -> Formula:
    """``X^k true``; for k = 0 this means "the suffix is nonempty"."""
    if k > 0:
        return tomorrow_n(TRUE, k)
    return TRUE if guarded else nonempty()


def remove_weak_next(f: Formula) -> Formula:
    """Replace every atom with weak reads by an equivalent weak-next-free formula.

    An atom with maximal weak lookahead ``a`` and maximal strong lookahead
    ``b`` becomes ``(atom' || !X^a true) && X^b true`` where ``atom'`` reads
    strongly.  ``X^0 true`` is dropped below temporal operators and kept as
    ``F true`` at top level, so the rewrite is exact on the empty word too.
    """

    def rewrite(atom, guarded):
        reads = atom_reads(atom)
        weak = [r.n for r in reads if isinstance(r, WeakNext)]
        if not weak:
            return atom
        strong = [r.n for r in reads if isinstance(r, Next)]
        out = _map_terms(atom, _strengthen)
        no_more = Not(_steps_exist(max(weak), guarded))
        if not isinstance(no_more.sub, TrueC):
            out = Or(out, no_more)
        if strong:
            need = _steps_exist(max(strong), guarded)
            if not isinstance(need, TrueC):
                out = And(out, need)
        return out

    return map_atoms_ctx(f, rewrite)


def reduce_lookahead(f: Formula, sig: DataSignature) -> tuple[Formula, DataSignature]:
    """Equisatisfiable rewrite using only lookaheads 0 and 1 over shifted field copies.

    Field ``id_k`` carries the value of ``id`` k positions ahead.  Models of
    the result project (via the ``id_0`` fields) onto models of ``f`` of the
    same length and vice versa.
    """
    if has_weak_next(f):
        raise ValueError("reduce_lookahead expects a weak-next-free formula")
    top = lookahead(f, "strong")
    if top <= 1:
        return f, sig
    names = set()
    fields = []
    for k in range(top + 1):
        for fd in sig.fields:
            name = f"{fd.name}_{k}"
            fields.append(Field(name, fd.sort, fd.default))
            names.add(name)
    wide = DataSignature(tuple(fields))

    def shift(t):
        if isinstance(t, Next):
            return Next(0, f"{t.field}_{t.n}")
        if isinstance(t, Apply):
            return Apply(t.op, tuple(shift(a) for a in t.args))
        return t

    def rewrite(atom):
        n = max((r.n for r in atom_reads(atom)), default=0)
        out = _map_terms(atom, shift)
        return And(out, tomorrow_n(TRUE, n)) if n > 0 else out

    body = map_atoms(f, rewrite)
    links = [Or(last(), Atom("=", Next(1, f"{fd.name}_{k - 1}"), Next(0, f"{fd.name}_{k}")))
             for k in range(1, top + 1) for fd in sig.fields]
    return And(body, globally(conj(*links))), wide


@dataclass(frozen=True)
class AbstractConstraint:
    atom: Formula
    lookahead: int
    prop: str


@dataclass(frozen=True)
class AbstractionResult:
    ltlf: Formula
    constraints: tuple[AbstractConstraint, ...]
    max_lookahead: int

    @property
    def props(self) -> tuple[str, ...]:
        return tuple(c.prop for c in self.constraints)

    def table(self) -> str:
        rows = ["prop\tlookahead\tconstraint"]
        rows += [f"{c.prop}\t{c.lookahead}\t{c.atom}" for c in self.constraints]
        return "\n".join(rows)


def fold_constant_atoms(f: Formula) -> Formula:
    """Replace atoms without field reads by their truth value."""

    def fold(atom):
        if atom_reads(atom):
            return atom
        return TRUE if eval_formula(atom, ()) else FALSE

    return map_atoms(f, fold)


def abstract(f: Formula, prefix: str = "b") -> AbstractionResult:
    """Abstract each distinct data atom into a proposition delayed by its lookahead.

    Atoms are numbered in left-to-right order of first occurrence;
    syntactically equal atoms share one proposition.
    """
    if has_weak_next(f):
        raise ValueError("abstract expects a weak-next-free formula")
    f = fold_constant_atoms(f)
    index: dict[Formula, AbstractConstraint] = {}
    for a in atoms_of(f):
        if a not in index:
            n = lookahead(a, "strong")
            index[a] = AbstractConstraint(a, n, f"{prefix}{len(index) + 1}")
    ltlf = map_atoms(f, lambda a: tomorrow_n(prop(index[a].prop), index[a].lookahead))
    cons = tuple(index.values())
    return AbstractionResult(ltlf, cons, max((c.lookahead for c in cons), default=0))


AbstractWord = tuple[frozenset, ...]


def abstract_word(ar: AbstractionResult, w: DataWord,
                  defaults: Mapping | None = None) -> AbstractWord:
    """The letter at position j holds b_i iff the atom holds n_i positions earlier,
    reading a prefix of default symbols where the word does not reach back."""
    default = dict(w.signature.defaults())
    if defaults:
        default.update(defaults)
    symbols = tuple(w.symbols)
    letters = []
    for j in range(1, len(symbols) + 1):
        letter = set()
        for c in ar.constraints:
            if j > c.lookahead:
                holds = eval_formula(c.atom, symbols[j - c.lookahead - 1:])
            else:
                pad = (default,) * (c.lookahead - j + 1)
                holds = eval_formula(c.atom, pad + symbols)
            if holds:
                letter.add(c.prop)
        letters.append(frozenset(letter))
    return tuple(letters)


def props_of(f: Formula) -> list[str]:
    """Proposition names of a propositional formula, in order of first occurrence."""
    seen: dict[str, None] = {}
    for a in atoms_of(f):
        if not (isinstance(a, BoolField) and isinstance(a.term, Next) and a.term.n == 0):
            raise ValueError(f"not a propositional atom: {a}")
        seen.setdefault(a.term.field)
    return list(seen)


def ltlf_eval(f: Formula, letters: Sequence[Iterable[str]], props: Sequence[str] | None = None) -> bool:
    """Evaluate a propositional formula on a word of letters (sets of propositions)."""
    props = list(props) if props is not None else props_of(f)
    word = [{p: p in set(letter) for p in props} for letter in letters]
    return eval_formula(f, word)
