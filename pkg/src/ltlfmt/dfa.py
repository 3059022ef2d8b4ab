"""Deterministic finite automata over the alphabet 2^AP.

``ltlf_to_dfa`` builds the automaton by formula progression.  Residues are
kept as BDDs over "suffix atoms" (propositions, ``X``- and ``U``-subformulas),
so two residues are the same state exactly when they are the same Boolean
function of those atoms.  Transitions are stored per state as decision trees
over the propositions of the current letter; a tree is either an ``int``
(target state) or a triple ``(prop_index, low_tree, high_tree)``.

``import_dfa`` reads the HOA text format as commonly used for finite-word
automata: a state is accepting iff it carries an acceptance mark.
"""

from __future__ import annotations

import re
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bdd import BDD, FALSE_NODE, TRUE_NODE
from .logic import (
    And,
    BoolField,
    FalseC,
    Formula,
    Iff,
    Implies,
    LtlfmtError,
    Next,
    Not,
    Or,
    TrueC,
    Tomorrow,
    Until,
    TRUE,
)
from .normal_forms import props_of


class DfaConstructionError(LtlfmtError):
    pass


class DfaImportError(LtlfmtError):
    pass


Tree = object  # int | tuple[int, Tree, Tree]
Cube = tuple  # tuple[tuple[str, bool], ...]


@dataclass(frozen=True)
class Dfa:
    props: tuple[str, ...]
    trees: tuple[Tree, ...]
    accepting: frozenset[int]
    initial: int = 0
    descriptions: tuple[str, ...] = field(default=(), compare=False)

    @property
    def n_states(self) -> int:
        return len(self.trees)

    @property
    def states(self) -> range:
        return range(len(self.trees))

    def step(self, state: int, letter: Iterable[str]) -> int:
        letter = set(letter)
        t = self.trees[state]
        while not isinstance(t, int):
            v, lo, hi = t
            t = hi if self.props[v] in letter else lo
        return t

    def run(self, letters: Sequence[Iterable[str]], start: int | None = None) -> int:
        q = self.initial if start is None else start
        for letter in letters:
            q = self.step(q, letter)
        return q

    def accepts(self, letters: Sequence[Iterable[str]]) -> bool:
        return self.run(letters) in self.accepting

    def successors(self, state: int) -> set[int]:
        out = set()
        stack = [self.trees[state]]
        while stack:
            t = stack.pop()
            if isinstance(t, int):
                out.add(t)
            else:
                stack.extend((t[1], t[2]))
        return out

    def cubes(self, state: int) -> list[tuple[Cube, int]]:
        """Disjoint cubes covering 2^AP, each with its target state."""
        out = []

        def walk(t, path):
            if isinstance(t, int):
                out.append((tuple(path), t))
                return
            v, lo, hi = t
            walk(lo, path + [(self.props[v], False)])
            walk(hi, path + [(self.props[v], True)])

        walk(self.trees[state], [])
        return out

    def edges(self) -> dict[tuple[int, int], list[Cube]]:
        """Group cubes by (source, target); each key is one automaton edge."""
        out: dict[tuple[int, int], list[Cube]] = {}
        for q in self.states:
            for cube, dst in self.cubes(q):
                out.setdefault((q, dst), []).append(cube)
        return out

    def reachable(self, start: int | None = None) -> set[int]:
        start = self.initial if start is None else start
        seen = {start}
        todo = deque([start])
        while todo:
            q = todo.popleft()
            for r in self.successors(q):
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        return seen

    def is_empty(self, start: int | None = None) -> bool:
        return not (self.reachable(start) & self.accepting)

    def complement(self) -> "Dfa":
        return Dfa(self.props, self.trees, frozenset(self.states) - self.accepting,
                   self.initial, self.descriptions)

    def with_initial(self, state: int) -> "Dfa":
        return Dfa(self.props, self.trees, self.accepting, state, self.descriptions)

    def dump(self) -> str:
        lines = [f"props: {' '.join(self.props)}", f"states: {self.n_states}",
                 f"initial: {self.initial}"]
        for q in self.states:
            mark = " accepting" if q in self.accepting else ""
            desc = f"  ; {self.descriptions[q]}" if self.descriptions else ""
            lines.append(f"state {q}{mark}{desc}")
            for (src, dst), cubes in sorted(self.edges().items()):
                if src == q:
                    lines.append(f"  -> {dst} on {_cubes_text(cubes)}")
        return "\n".join(lines)


def _cube_text(cube, idx=None, negation="!", conj="&", true="t"):
    if not cube:
        return true
    return conj.join((("" if val else negation) + (str(idx[p]) if idx else p)) for p, val in cube)


def _cubes_text(cubes):
    return " | ".join(_cube_text(c, conj=" & ", true="true") for c in cubes)


def dfa_empty(d: Dfa) -> bool:
    return d.is_empty()


def dfa_complement(d: Dfa) -> Dfa:
    return d.complement()


# ---------------------------------------------------------------------------
# progression


_NONEMPTY = Until(TRUE, TRUE)


class _Progression:
    def __init__(self, props: Sequence[str]):
        self.props = list(props)
        self.pindex = {p: i for i, p in enumerate(self.props)}
        self.m = len(self.props)
        self.bdd = BDD()
        self.atom_var: dict[Formula, int] = {}
        self.atoms: list[Formula] = []
        self.prog_memo: dict[int, int] = {}

    def suffix_var(self, f: Formula) -> int:
        v = self.atom_var.get(f)
        if v is None:
            v = self.m + len(self.atoms)
            self.atom_var[f] = v
            self.atoms.append(f)
        return self.bdd.var(v)

    def _bool(self, f: Formula, leaf) -> int:
        b = self.bdd
        if isinstance(f, TrueC):
            return TRUE_NODE
        if isinstance(f, FalseC):
            return FALSE_NODE
        if isinstance(f, Not):
            return b.neg(self._bool(f.sub, leaf))
        if isinstance(f, And):
            return b.and_(self._bool(f.left, leaf), self._bool(f.right, leaf))
        if isinstance(f, Or):
            return b.or_(self._bool(f.left, leaf), self._bool(f.right, leaf))
        if isinstance(f, Implies):
            return b.or_(b.neg(self._bool(f.left, leaf)), self._bool(f.right, leaf))
        if isinstance(f, Iff):
            return b.iff(self._bool(f.left, leaf), self._bool(f.right, leaf))
        if isinstance(f, (BoolField, Tomorrow, Until)):
            return leaf(f)
        raise DfaConstructionError(f"not a propositional LTLf formula: {f}")

    def encode(self, f: Formula) -> int:
        """BDD over suffix atoms: "the remaining suffix satisfies f"."""
        return self._bool(f, self.suffix_var)

    def prog(self, f: Formula) -> int:
        """BDD over letter variables and suffix atoms for one progression step."""
        return self._bool(f, self.prog_atom)

    def prog_atom(self, f: Formula) -> int:
        b = self.bdd
        if isinstance(f, BoolField):
            if not (isinstance(f.term, Next) and f.term.n == 0):
                raise DfaConstructionError(f"not a propositional atom: {f}")
            return b.var(self.pindex[f.term.field])
        if isinstance(f, Tomorrow):
            # the rest must be nonempty and satisfy the operand
            return b.and_(self.encode(f.sub), self.encode(_NONEMPTY))
        # until: now the right side, or the left side now and the until later
        return b.or_(self.prog(f.right), b.and_(self.prog(f.left), self.encode(f)))

    def atom_prog(self, v: int) -> int:
        r = self.prog_memo.get(v)
        if r is None:
            r = self.prog_atom(self.atoms[v - self.m])
            self.prog_memo[v] = r
        return r

    def step(self, residue: int) -> int:
        b = self.bdd
        memo: dict[int, int] = {}

        def comp(u):
            if u < 2:
                return u
            r = memo.get(u)
            if r is None:
                r = b.ite(self.atom_prog(b.var_of(u)), comp(b.high(u)), comp(b.low(u)))
                memo[u] = r
            return r

        return comp(residue)

    def accepts_empty(self, residue: int) -> bool:
        # every suffix atom (proposition, X, U) is false on the empty word
        return self.bdd.evaluate(residue, {})

    def describe(self, u: int, depth: int = 0) -> str:
        b = self.bdd
        if u == TRUE_NODE:
            return "true"
        if u == FALSE_NODE:
            return "false"
        if depth > 6:
            return "..."
        atom = str(self.atoms[b.var_of(u) - self.m])
        hi, lo = self.describe(b.high(u), depth + 1), self.describe(b.low(u), depth + 1)
        return f"ite({atom}, {hi}, {lo})"


def ltlf_to_dfa(f: Formula, props: Sequence[str] | None = None, *,
                max_states: int = 20000, max_props: int = 20,
                describe: bool = False) -> Dfa:
    """Deterministic automaton accepting exactly the letter words satisfying ``f``,
    including the decision on the empty word."""
    props = list(props) if props is not None else props_of(f)
    missing = [p for p in props_of(f) if p not in props]
    if missing:
        raise DfaConstructionError(f"propositions not in the alphabet: {missing}")
    if len(props) > max_props:
        raise DfaConstructionError(
            f"{len(props)} propositions exceed the limit of {max_props}")
    pg = _Progression(props)
    b = pg.bdd
    init = pg.encode(f)
    ids = {init: 0}
    order = [init]
    trees: list[Tree] = []
    i = 0
    while i < len(order):
        residue = order[i]
        i += 1
        nxt = pg.step(residue)
        memo: dict[int, Tree] = {}

        def walk(u):
            t = memo.get(u)
            if t is not None:
                return t
            if u < 2 or b.var_of(u) >= pg.m:
                q = ids.get(u)
                if q is None:
                    if len(order) >= max_states:
                        raise DfaConstructionError(
                            f"state budget of {max_states} exceeded")
                    q = ids[u] = len(order)
                    order.append(u)
                t = q
            else:
                t = (b.var_of(u), walk(b.low(u)), walk(b.high(u)))
            memo[u] = t
            return t

        trees.append(walk(nxt))
    accepting = frozenset(q for q, r in enumerate(order) if pg.accepts_empty(r))
    desc = tuple(pg.describe(r) for r in order) if describe else ()
    return Dfa(tuple(props), tuple(trees), accepting, 0, desc)


# ---------------------------------------------------------------------------
# HOA exchange format


def export_hoa(d: Dfa, name: str | None = None) -> str:
    idx = {p: i for i, p in enumerate(d.props)}
    lines = ["HOA: v1"]
    if name:
        lines.append(f'name: "{name}"')
    lines += [f"States: {d.n_states}", f"Start: {d.initial}",
              "AP: " + " ".join([str(len(d.props))] + [f'"{p}"' for p in d.props]),
              "acc-name: Buchi", "Acceptance: 1 Inf(0)",
              "properties: trans-labels explicit-labels state-acc deterministic complete",
              "--BODY--"]
    edges = d.edges()
    for q in d.states:
        lines.append(f"State: {q}" + (" {0}" if q in d.accepting else ""))
        for (src, dst), cubes in sorted(edges.items()):
            if src != q:
                continue
            label = " | ".join(_cube_text(c, idx) for c in cubes)
            lines.append(f"[{label}] {dst}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


_HOA_TOKEN = re.compile(r'\s*(?:(?P<str>"(?:[^"\\]|\\.)*")|(?P<tok>[^\s"]+))')


class _LabelParser:
    def __init__(self, text, bdd, var_of_ap, where):
        self.toks = re.findall(r"\d+|[tf]|[!&|()]", text)
        if "".join(self.toks) != re.sub(r"\s+", "", text):
            raise DfaImportError(f"{where}: cannot parse label [{text}]")
        self.i = 0
        self.bdd = bdd
        self.var_of_ap = var_of_ap
        self.where = where

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def parse(self):
        u = self.disj()
        if self.peek() is not None:
            raise DfaImportError(f"{self.where}: trailing tokens in label")
        return u

    def disj(self):
        u = self.conj()
        while self.peek() == "|":
            self.i += 1
            u = self.bdd.or_(u, self.conj())
        return u

    def conj(self):
        u = self.unary()
        while self.peek() == "&":
            self.i += 1
            u = self.bdd.and_(u, self.unary())
        return u

    def unary(self):
        t = self.peek()
        self.i += 1
        if t == "!":
            return self.bdd.neg(self.unary())
        if t == "(":
            u = self.disj()
            if self.peek() != ")":
                raise DfaImportError(f"{self.where}: missing ')' in label")
            self.i += 1
            return u
        if t == "t":
            return TRUE_NODE
        if t == "f":
            return FALSE_NODE
        if t is not None and t.isdigit():
            return self.var_of_ap(int(t), self.where)
        raise DfaImportError(f"{self.where}: unexpected {t!r} in label")


def import_dfa(text: str, props: Sequence[str]) -> Dfa:
    """Read a deterministic finite automaton in HOA syntax over propositions ``props``.

    HOA propositions are matched to ``props`` by name; when none of the names
    is known they are mapped by position instead.  Missing transitions
    are sent to a fresh rejecting sink (with a warning).
    """
    props = list(props)
    pindex = {p: i for i, p in enumerate(props)}
    header, _, rest = text.partition("--BODY--")
    if not _:
        raise DfaImportError("missing --BODY--")
    body, _, _tail = rest.partition("--END--")
    n_states = None
    starts: list[str] = []
    ap_names: list[str] = []
    for lineno, line in enumerate(header.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        key, _, value = line.partition(":")
        value = value.strip()
        if key == "States":
            n_states = int(value)
        elif key == "Start":
            starts.append(value)
        elif key == "AP":
            toks = [m.group("str") or m.group("tok") for m in _HOA_TOKEN.finditer(value)]
            count = int(toks[0])
            ap_names = [t.strip('"') for t in toks[1:]]
            if len(ap_names) != count:
                raise DfaImportError(f"header line {lineno}: AP count mismatch")
    if len(starts) != 1 or "&" in starts[0]:
        raise DfaImportError("a deterministic automaton needs exactly one initial state")
    initial = int(starts[0])
    if any(name in pindex for name in ap_names):
        for name in ap_names:
            if name not in pindex:
                raise DfaImportError(f"unknown proposition {name!r}")
        ap_index = [pindex[name] for name in ap_names]
    else:
        # foreign names: the k-th HOA proposition is the k-th of ``props``
        if len(ap_names) > len(props):
            raise DfaImportError(f"{len(ap_names)} propositions, expected at most {len(props)}")
        ap_index = list(range(len(ap_names)))
    bdd = BDD()

    def var_of_ap(k, where):
        if k >= len(ap_names):
            raise DfaImportError(f"{where}: proposition index {k} out of range")
        return bdd.var(ap_index[k])

    state_edges: dict[int, list[tuple[int, int]]] = {}
    accepting: set[int] = set()
    current = None
    for lineno, line in enumerate(body.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        where = f"body line {lineno}"
        if line.startswith("State:"):
            m = re.match(r"State:\s*(\d+)\s*(\"[^\"]*\")?\s*(\{[^}]*\})?\s*$", line)
            if not m:
                raise DfaImportError(f"{where}: cannot parse state line")
            current = int(m.group(1))
            state_edges.setdefault(current, [])
            if m.group(3) and m.group(3).strip("{} "):
                accepting.add(current)
            continue
        if current is None:
            raise DfaImportError(f"{where}: edge before any State line")
        m = re.match(r"\[([^\]]*)\]\s*(\d+)\s*(\{[^}]*\})?\s*$", line)
        if not m:
            raise DfaImportError(f"{where}: only explicitly labelled edges are supported")
        label = _LabelParser(m.group(1), bdd, var_of_ap, where).parse()
        if m.group(3) and m.group(3).strip("{} "):
            raise DfaImportError(f"{where}: transition-based acceptance is not supported")
        state_edges[current].append((label, int(m.group(2))))
    if n_states is None:
        n_states = max(list(state_edges) + [initial]) + 1
    all_states = set(range(n_states))
    for q, es in state_edges.items():
        for _, dst in es:
            if dst not in all_states:
                raise DfaImportError(f"state {q}: target {dst} out of range")
    sink = None
    completed = []
    for q in range(n_states):
        es = state_edges.get(q, [])
        for i, (u, d1) in enumerate(es):
            for v, d2 in es[i + 1:]:
                if d1 != d2 and bdd.and_(u, v) != FALSE_NODE:
                    raise DfaImportError(f"state {q}: nondeterministic transitions")
        cover = FALSE_NODE
        for u, _ in es:
            cover = bdd.or_(cover, u)
        if cover != TRUE_NODE:
            if sink is None:
                sink = n_states
            es = es + [(bdd.neg(cover), sink)]
            completed.append(q)
        state_edges[q] = es
    if completed:
        warnings.warn(f"automaton completed with a rejecting sink for states {completed}")
    trees = [_label_tree(bdd, state_edges[q], len(props)) for q in range(n_states)]
    if sink is not None:
        trees.append(sink)
    return Dfa(tuple(props), tuple(trees), frozenset(accepting), initial)


def _label_tree(bdd: BDD, edges: list[tuple[int, int]], m: int) -> Tree:
    live = [(u, d) for u, d in edges if u != FALSE_NODE]
    if len({d for _, d in live}) == 1:
        return live[0][1]
    v = min(bdd.var_of(u) for u, _ in live)
    lo = _label_tree(bdd, [(bdd.restrict(u, v, False), d) for u, d in live], m)
    hi = _label_tree(bdd, [(bdd.restrict(u, v, True), d) for u, d in live], m)
    return lo if lo == hi else (v, lo, hi)
