"""Concrete syntax for LTLfMT formulas.

Grammar (loosest to tightest)::

    formula := iff
    iff     := impl ('<->' impl)*            right associative
    impl    := or ('->' impl)?
    or      := and ('||' and)*
    and     := until ('&&' until)*
    until   := unary ('U' until)?
    unary   := ('!' | 'X' | 'WX' | 'F' | 'G') unary | 'X^N' unary | 'WX^N' unary | primary
    primary := 'true' | 'false' | 'last' | term REL term | boolfield | '(' formula ')'

Terms are linear: ``+ - *`` with one constant factor, literals, ``name``,
``next^N(name)`` and ``wnext^N(name)``.  Integer literals take the sort of
the term they are compared or combined with; decimal literals are Real.
Derived operators are desugared while parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .logic import (
    FALSE,
    TRUE,
    And,
    Apply,
    Atom,
    BoolField,
    Const,
    DataSignature,
    Field,
    Formula,
    Iff,
    Implies,
    LtlfmtError,
    Next,
    Not,
    Or,
    Sort,
    Until,
    WeakNext,
    apply_op,
    eventually,
    globally,
    last,
    tomorrow_n,
    weak_tomorrow,
)


class FormulaError(LtlfmtError):
    """Syntax or typing error with a position in the source text."""

    def __init__(self, msg: str, text: str = "", pos: int = 0):
        self.pos = pos
        self.line = text.count("\n", 0, pos) + 1
        self.col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{self.line}:{self.col}: {msg}")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>\d+\.\d+|\d+)
  | (?P<op><->|->|&&|\|\||<=|>=|!=|[<>=!()+\-*^])
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

KEYWORDS = {"true", "false", "last", "X", "WX", "F", "G", "U", "next", "wnext"}


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class FormulaTypeError(FormulaError):
    """Unknown field, sort mismatch or non-linear term."""


class _Num:
    """Untyped integer literal; its sort is fixed by context."""

    def __init__(self, value: int):
        self.value = value


class _Backtrack(Exception):
    pass


class _Parser:
    def __init__(self, text: str, sig: DataSignature | None):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.sig = sig
        # lenient pass used for inference when no signature is given
        self.seen: dict[str, None] = {}
        self.bool_used: set[str] = set()
        self.real_used: set[str] = set()

    # -- helpers ----------------------------------------------------------
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None) -> FormulaError:
        tok = tok or self.tok
        return FormulaError(msg, self.text, tok.pos)

    def type_error(self, msg, tok=None) -> FormulaError:
        tok = tok or self.tok
        return FormulaTypeError(msg, self.text, tok.pos)

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "id"):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def field_sort(self, name, tok) -> Sort:
        if self.sig is not None:
            if name not in self.sig:
                raise self.type_error(f"unknown field {name!r}", tok)
            return self.sig.sort_of(name)
        self.seen.setdefault(name)
        return Sort.INT

    # -- formulas ---------------------------------------------------------
    def parse(self) -> Formula:
        f = self.iff()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def iff(self):
        left = self.impl()
        if self.accept("<->"):
            return Iff(left, self.iff())
        return left

    def impl(self):
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.impl())
        return left

    def disj(self):
        parts = [self.conj()]
        while self.accept("||"):
            parts.append(self.conj())
        return _fold(Or, parts)

    def conj(self):
        parts = [self.until()]
        while self.accept("&&"):
            parts.append(self.until())
        return _fold(And, parts)

    def until(self):
        left = self.unary()
        if self.accept("U"):
            return Until(left, self.until())
        return left

    def power(self) -> int:
        if self.accept("^"):
            tok = self.tok
            if tok.kind != "num" or "." in tok.text:
                raise self.error("expected a natural number after '^'")
            self.i += 1
            return int(tok.text)
        return 1

    def unary(self):
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("X"):
            n = self.power()
            return tomorrow_n(self.unary(), n)
        if self.accept("WX"):
            n = self.power()
            f = self.unary()
            for _ in range(n):
                f = weak_tomorrow(f)
            return f
        if self.accept("F"):
            return eventually(self.unary())
        if self.accept("G"):
            return globally(self.unary())
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "id" and tok.text in ("true", "false", "last"):
            # ``true = heat`` is an atom, bare ``true`` is the constant
            if self.toks[self.i + 1].text not in ("<", "<=", "=", ">=", ">", "!="):
                self.i += 1
                return {"true": TRUE, "false": FALSE, "last": None}[tok.text] or last()
        start = self.i
        try:
            return self.atom()
        except _Backtrack:
            self.i = start
        if self.accept("("):
            f = self.iff()
            self.expect(")")
            return f
        raise self.error(f"expected a formula, found {tok.text or 'end of input'!r}")

    def atom(self):
        tok = self.tok
        try:
            lhs = self.term()
        except FormulaTypeError:
            raise
        except FormulaError:
            raise _Backtrack()
        rel = self.tok
        if rel.text in ("<", "<=", "=", ">=", ">", "!="):
            self.i += 1
            rhs = self.term()
            return self.typed_atom(rel.text, lhs, rhs, rel)
        # a bare Boolean field read
        t, s = lhs
        if isinstance(t, (Next, WeakNext)):
            if self.sig is None:
                self.bool_used.add(t.field)
                return BoolField(t)
            if s is not Sort.BOOL:
                raise self.type_error(f"field {t.field!r} has sort {s.value}, expected bool", tok)
            return BoolField(t)
        raise _Backtrack()

    def note_real(self, sorts, *terms):
        # signature inference: fields next to a decimal literal are Real
        if self.sig is None and Sort.REAL in sorts:
            for t in terms:
                self.real_used.update(_fields(t))

    def typed_atom(self, pred, lhs, rhs, tok):
        (lt, ls), (rt, rs) = lhs, rhs
        sort = ls or rs or Sort.INT
        self.note_real((ls, rs), lt, rt)
        for s in (ls, rs):
            if s is not None and s is not sort:
                if self.sig is None:
                    return TRUE
                raise self.type_error(f"sort mismatch: {ls.value} vs {rs.value}", tok)
        if pred in ("<", "<=", ">", ">=") and sort is Sort.BOOL:
            raise self.type_error(f"relation {pred!r} needs numeric operands", tok)
        return Atom(pred, _fix(lt, sort), _fix(rt, sort))

    # -- terms: each returns (term, sort-or-None) --------------------------
    def term(self):
        left = self.product()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok
            self.i += 1
            right = self.product()
            left = self.arith(op.text, left, right, op)
        return left

    def product(self):
        left = self.signed()
        while self.tok.text == "*" and self.tok.kind == "op":
            op = self.tok
            self.i += 1
            right = self.signed()
            if _has_reads(left[0]) and _has_reads(right[0]):
                raise self.type_error("non-linear product: one factor must be constant", op)
            left = self.arith("*", left, right, op)
        return left

    def signed(self):
        if self.tok.text == "-" and self.tok.kind == "op":
            op = self.tok
            self.i += 1
            t, s = self.signed()
            if s is Sort.BOOL:
                raise self.type_error("unary minus on a Boolean term", op)
            if isinstance(t, _Num):
                return _Num(-t.value), None
            if isinstance(t, Const):
                return Const(-t.value, t.sort), t.sort
            return Apply("neg", (t,)), s
        return self.term_primary()

    def arith(self, op, left, right, tok):
        (lt, ls), (rt, rs) = left, right
        if ls is Sort.BOOL or rs is Sort.BOOL:
            raise self.type_error(f"arithmetic {op!r} on a Boolean term", tok)
        if ls and rs and ls is not rs:
            raise self.type_error(f"sort mismatch: {ls.value} vs {rs.value}", tok)
        sort = ls or rs
        self.note_real((ls, rs), lt, rt)
        if sort is None:
            # both untyped numerals: fold
            return _Num(apply_op(op, [lt.value, rt.value])), None
        return Apply(op, (_fix(lt, sort), _fix(rt, sort))), sort

    def term_primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            if "." in tok.text:
                return Const(Fraction(tok.text), Sort.REAL), Sort.REAL
            return _Num(int(tok.text)), None
        if tok.kind == "id":
            if tok.text in ("true", "false"):
                self.i += 1
                return Const(tok.text == "true", Sort.BOOL), Sort.BOOL
            if tok.text in ("next", "wnext"):
                self.i += 1
                self.expect("^")
                ntok = self.tok
                if ntok.kind != "num" or "." in ntok.text:
                    raise self.error("expected a natural number lookahead", ntok)
                self.i += 1
                n = int(ntok.text)
                self.expect("(")
                name_tok = self.tok
                if name_tok.kind != "id" or name_tok.text in KEYWORDS:
                    raise self.error("expected a field name", name_tok)
                self.i += 1
                self.expect(")")
                cls = Next if tok.text == "next" else WeakNext
                return cls(n, name_tok.text), self.field_sort(name_tok.text, name_tok)
            if tok.text in KEYWORDS:
                raise self.error(f"unexpected keyword {tok.text!r}")
            self.i += 1
            return Next(0, tok.text), self.field_sort(tok.text, tok)
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")


def _fold(cls, parts):
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = cls(p, out)
    return out


def _has_reads(t) -> bool:
    if isinstance(t, (Next, WeakNext)):
        return True
    if isinstance(t, Apply):
        return any(_has_reads(a) for a in t.args)
    return False


def _fields(t):
    if isinstance(t, (Next, WeakNext)):
        yield t.field
    elif isinstance(t, Apply):
        for a in t.args:
            yield from _fields(a)


def _fix(t, sort: Sort):
    """Give untyped numerals inside ``t`` the sort ``sort``."""
    if isinstance(t, _Num):
        if sort is Sort.BOOL:
            raise FormulaTypeError("numeric literal compared with a Boolean term")
        return Const(Fraction(t.value) if sort is Sort.REAL else t.value, sort)
    if isinstance(t, Const) and t.sort is not sort:
        raise FormulaTypeError(f"constant {t} used with sort {sort.value}")
    if isinstance(t, Apply):
        return Apply(t.op, tuple(_fix(a, sort) for a in t.args))
    return t


def parse_formula(text: str, sig: DataSignature | None = None) -> Formula:
    """Parse and type-check ``text`` against ``sig``.

    With ``sig=None`` field sorts are inferred: fields used as bare
    predicates are Boolean, fields combined with a decimal literal Real,
    all others Int (see :func:`infer_signature`).
    """
    if sig is None:
        sig = infer_signature(text)
    return _Parser(text, sig).parse()


def infer_signature(text: str) -> DataSignature:
    """Signature implied by ``text`` when no signature file is supplied."""
    p = _Parser(text, None)
    p.parse()
    fields = []
    for name in p.seen:
        if name in p.bool_used:
            s = Sort.BOOL
        elif name in p.real_used:
            s = Sort.REAL
        else:
            s = Sort.INT
        fields.append(Field(name, s, s.default))
    return DataSignature(tuple(fields))
