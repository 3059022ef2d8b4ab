"""Data signatures, data words, LTLfMT terms/formulas and the reference semantics.

The evaluator in this module is a direct transcription of the satisfaction
relation and is used as the brute-force oracle by every other stage.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union


class LtlfmtError(Exception):
    """Base class for all toolkit errors."""


class SignatureError(LtlfmtError):
    pass


class TraceError(LtlfmtError):
    pass


class TypeCheckError(LtlfmtError):
    pass


class Sort(enum.Enum):
    INT = "int"
    REAL = "real"
    BOOL = "bool"

    @property
    def default(self):
        return {Sort.INT: 0, Sort.REAL: Fraction(0), Sort.BOOL: False}[self]

    @property
    def smt(self) -> str:
        return {Sort.INT: "Int", Sort.REAL: "Real", Sort.BOOL: "Bool"}[self]

    @property
    def numeric(self) -> bool:
        return self is not Sort.BOOL

    def coerce(self, value):
        """Convert a JSON/Python value to this sort's canonical representation.

        Raises ``TypeError`` on ill-typed values (no Int->Real promotion for
        fractional values, no bool/int confusion).
        """
        if self is Sort.BOOL:
            if isinstance(value, bool):
                return value
        elif self is Sort.INT:
            if isinstance(value, int) and not isinstance(value, bool):
                return value
            if isinstance(value, Fraction) and value.denominator == 1:
                return int(value)
        else:
            if isinstance(value, bool):
                pass
            elif isinstance(value, (int, Fraction)):
                return Fraction(value)
            elif isinstance(value, float):
                return Fraction(str(value))
        raise TypeError(f"value {value!r} is not of sort {self.value}")


Value = Union[int, Fraction, bool]


@dataclass(frozen=True)
class Field:
    name: str
    sort: Sort
    default: Value


@dataclass(frozen=True)
class DataSignature:
    fields: tuple[Field, ...]

    def __post_init__(self):
        seen = set()
        for f in self.fields:
            if f.name in seen:
                raise SignatureError(f"duplicate field {f.name!r}")
            seen.add(f.name)
            try:
                f.sort.coerce(f.default)
            except TypeError as exc:
                raise SignatureError(f"field {f.name!r}: ill-typed default: {exc}") from None

    @classmethod
    def of(cls, **sorts: Sort | str) -> "DataSignature":
        """Build a signature with canonical defaults, e.g. ``DataSignature.of(x="int")``."""
        fields = []
        for name, s in sorts.items():
            s = Sort(s) if isinstance(s, str) else s
            fields.append(Field(name, s, s.default))
        return cls(tuple(fields))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def __contains__(self, name: str) -> bool:
        return any(f.name == name for f in self.fields)

    def __iter__(self):
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)

    def sort_of(self, name: str) -> Sort:
        for f in self.fields:
            if f.name == name:
                return f.sort
        raise KeyError(name)

    def defaults(self) -> dict[str, Value]:
        return {f.name: f.default for f in self.fields}

    def default_symbol(self) -> dict[str, Value]:
        return self.defaults()

    def with_defaults(self, overrides: Mapping[str, Value]) -> "DataSignature":
        fields = []
        for f in self.fields:
            if f.name in overrides:
                fields.append(Field(f.name, f.sort, f.sort.coerce(overrides[f.name])))
            else:
                fields.append(f)
        return DataSignature(tuple(fields))

    def check_symbol(self, sym: Mapping[str, object]) -> dict[str, Value]:
        """Validate and normalise one symbol; raise ``TraceError`` on mismatch."""
        missing = [n for n in self.names if n not in sym]
        if missing:
            raise TraceError(f"missing field(s): {', '.join(missing)}")
        extra = [k for k in sym if k not in self]
        if extra:
            raise TraceError(f"unknown field(s): {', '.join(extra)}")
        out = {}
        for f in self.fields:
            try:
                out[f.name] = f.sort.coerce(sym[f.name])
            except TypeError as exc:
                raise TraceError(f"field {f.name!r}: {exc}") from None
        return out


@dataclass(frozen=True)
class DataWord:
    signature: DataSignature
    symbols: tuple[Mapping[str, Value], ...] = ()

    @classmethod
    def of(cls, sig: DataSignature, symbols: Iterable[Mapping[str, object]]) -> "DataWord":
        return cls(sig, tuple(sig.check_symbol(s) for s in symbols))

    def __len__(self):
        return len(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def __iter__(self):
        return iter(self.symbols)

    def suffix(self, i: int) -> "DataWord":
        """Return w_{>=i} using 1-based positions."""
        return DataWord(self.signature, self.symbols[i - 1:])


# ---------------------------------------------------------------------------
# signature and trace files


def parse_signature(text: str) -> DataSignature:
    """Parse the JSON signature format ``{"fields": [{"name", "type", "default"?}]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SignatureError(f"line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("fields"), list):
        raise SignatureError("signature must be an object with a 'fields' list")
    fields: list[Field] = []
    seen: set[str] = set()
    for i, entry in enumerate(doc["fields"]):
        where = f"fields[{i}]"
        if not isinstance(entry, dict):
            raise SignatureError(f"{where}: expected an object")
        name = entry.get("name")
        if not isinstance(name, str) or not name.isidentifier():
            raise SignatureError(f"{where}: invalid field name {name!r}")
        if name in seen:
            raise SignatureError(f"{where}: duplicate field {name!r}")
        seen.add(name)
        try:
            sort = Sort(entry.get("type"))
        except ValueError:
            raise SignatureError(f"{where}: unknown sort {entry.get('type')!r}") from None
        if "default" in entry:
            try:
                default = sort.coerce(entry["default"])
            except TypeError as exc:
                raise SignatureError(f"{where}: ill-typed default: {exc}") from None
        else:
            default = sort.default
        fields.append(Field(name, sort, default))
    return DataSignature(tuple(fields))


def signature_to_json(sig: DataSignature) -> dict:
    def enc(v):
        return float(v) if isinstance(v, Fraction) else v

    return {"fields": [{"name": f.name, "type": f.sort.value, "default": enc(f.default)}
                       for f in sig.fields]}


def parse_trace(text: str, sig: DataSignature) -> DataWord:
    """Parse a JSON Lines trace; blank lines are ignored, missing fields rejected."""
    symbols = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"line {lineno}: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise TraceError(f"line {lineno}: expected a JSON object")
        try:
            symbols.append(sig.check_symbol(obj))
        except TraceError as exc:
            raise TraceError(f"line {lineno}: {exc}") from None
    return DataWord(sig, tuple(symbols))


def symbol_to_json(sym: Mapping[str, Value]) -> dict:
    return {k: (float(v) if isinstance(v, Fraction) else v) for k, v in sym.items()}


# ---------------------------------------------------------------------------
# terms


class TermError(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"

    def __repr__(self):
        return f"TermError.{self.name}"


STRONG_ERROR = TermError.STRONG
WEAK_ERROR = TermError.WEAK


@dataclass(frozen=True)
class Next:
    """``next^n(field)``: the field value n steps ahead; strong error past the end."""
    n: int
    field: str

    def __str__(self):
        return self.field if self.n == 0 else f"next^{self.n}({self.field})"


@dataclass(frozen=True)
class WeakNext:
    n: int
    field: str

    def __str__(self):
        return f"wnext^{self.n}({self.field})"


@dataclass(frozen=True)
class Const:
    value: Value
    sort: Sort

    def __str__(self):
        return _const_text(self.value, self.sort)


@dataclass(frozen=True)
class Apply:
    """Linear arithmetic: ``+``, ``-`` (binary), ``*`` (one constant operand), ``neg``."""
    op: str
    args: tuple

    def __str__(self):
        if self.op == "neg":
            return f"-({self.args[0]})"
        l, r = self.args
        ls, rs = _term_text(l, self.op, False), _term_text(r, self.op, True)
        return f"{ls} {self.op} {rs}"


Term = Union[Next, WeakNext, Const, Apply]

_TERM_PREC = {"+": 1, "-": 1, "*": 2}


def _term_text(t, parent_op, right):
    if isinstance(t, Apply) and t.op != "neg":
        p, pp = _TERM_PREC[t.op], _TERM_PREC[parent_op]
        if p < pp or (right and p == pp):
            return f"({t})"
    return str(t)


def _const_text(value, sort) -> str:
    if sort is Sort.BOOL:
        return "true" if value else "false"
    if sort is Sort.INT:
        return str(value) if value >= 0 else f"(-{-value})"
    v = Fraction(value)
    neg = v < 0
    v = abs(v)
    den = v.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        raise ValueError(f"real constant {value} has no finite decimal form")
    digits = max(twos, fives, 1)
    scaled = v * 10 ** digits
    text = f"{scaled.numerator // 10 ** digits}.{scaled.numerator % 10 ** digits:0{digits}d}"
    text = text.rstrip("0")
    if text.endswith("."):
        text += "0"
    return f"(-{text})" if neg else text


def term_reads(t: Term) -> Iterable[Next | WeakNext]:
    if isinstance(t, (Next, WeakNext)):
        yield t
    elif isinstance(t, Apply):
        for a in t.args:
            yield from term_reads(a)


def eval_term(t: Term, w: DataWord | Sequence[Mapping], start: int = 0):
    """Interpret a term on the suffix of ``w`` starting at 0-based index ``start``."""
    symbols = w.symbols if isinstance(w, DataWord) else w
    return _eval_term(t, symbols, start)


def _eval_term(t, symbols, start):
    if isinstance(t, Next):
        j = start + t.n
        return symbols[j][t.field] if j < len(symbols) else STRONG_ERROR
    if isinstance(t, WeakNext):
        j = start + t.n
        return symbols[j][t.field] if j < len(symbols) else WEAK_ERROR
    if isinstance(t, Const):
        return t.value
    vals = [_eval_term(a, symbols, start) for a in t.args]
    if any(v is STRONG_ERROR for v in vals):
        return STRONG_ERROR
    if any(v is WEAK_ERROR for v in vals):
        return WEAK_ERROR
    return apply_op(t.op, vals)


def apply_op(op, vals):
    if op == "+":
        return vals[0] + vals[1]
    if op == "-":
        return vals[0] - vals[1]
    if op == "*":
        return vals[0] * vals[1]
    if op == "neg":
        return -vals[0]
    raise ValueError(f"unknown function {op!r}")


# ---------------------------------------------------------------------------
# formulas

RELATIONS = ("<", "<=", "=", ">=", ">", "!=")


def compare(pred: str, x, y) -> bool:
    if pred == "<":
        return x < y
    if pred == "<=":
        return x <= y
    if pred == "=":
        return x == y
    if pred == ">=":
        return x >= y
    if pred == ">":
        return x > y
    if pred == "!=":
        return x != y
    raise ValueError(f"unknown relation {pred!r}")


class Formula:
    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, repr=False)
class TrueC(Formula):
    def __repr__(self):
        return "TrueC()"


@dataclass(frozen=True, repr=False)
class FalseC(Formula):
    def __repr__(self):
        return "FalseC()"


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    lhs: Term
    rhs: Term



@dataclass(frozen=True)
class BoolField(Formula):
    """A Boolean-sorted field read used directly as a predicate."""
    term: Next | WeakNext



@dataclass(frozen=True)
class Not(Formula):
    sub: Formula



@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula



@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula



@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula



@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula



@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula



@dataclass(frozen=True)
class Tomorrow(Formula):
    sub: Formula



TRUE = TrueC()
FALSE = FalseC()


def prop(name: str) -> BoolField:
    """A propositional atom, i.e. a Boolean field read at the current position."""
    return BoolField(Next(0, name))


def conj(*fs: Formula) -> Formula:
    if not fs:
        return TRUE
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


def disj(*fs: Formula) -> Formula:
    if not fs:
        return FALSE
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Or(f, out)
    return out


def eventually(f: Formula) -> Formula:
    return Until(TRUE, f)


def globally(f: Formula) -> Formula:
    return Not(eventually(Not(f)))


def last() -> Formula:
    return Not(Tomorrow(TRUE))


def weak_tomorrow(f: Formula) -> Formula:
    return Or(last(), Tomorrow(f))


def tomorrow_n(f: Formula, n: int) -> Formula:
    for _ in range(n):
        f = Tomorrow(f)
    return f


def nonempty() -> Formula:
    """``F true``: holds exactly on nonempty words."""
    return eventually(TRUE)


def atoms_of(f: Formula) -> Iterable[Formula]:
    """Yield predicate subformulas (``Atom`` and ``BoolField``) left to right."""
    if isinstance(f, (Atom, BoolField)):
        yield f
    elif isinstance(f, (Not, Tomorrow)):
        yield from atoms_of(f.sub)
    elif isinstance(f, (And, Or, Implies, Iff, Until)):
        yield from atoms_of(f.left)
        yield from atoms_of(f.right)


def atom_terms(a: Atom | BoolField) -> tuple:
    return (a.term,) if isinstance(a, BoolField) else (a.lhs, a.rhs)


def atom_reads(a: Atom | BoolField) -> list[Next | WeakNext]:
    return [r for t in atom_terms(a) for r in term_reads(t)]


def lookahead(f, kind: str = "any") -> int:
    """Maximum lookahead over terms of ``f``; ``kind`` is ``strong``, ``weak`` or ``any``."""
    best = 0
    items = [f] if not isinstance(f, Formula) else list(atoms_of(f))
    for item in items:
        reads = term_reads(item) if not isinstance(item, Formula) else atom_reads(item)
        for r in reads:
            if kind == "strong" and not isinstance(r, Next):
                continue
            if kind == "weak" and not isinstance(r, WeakNext):
                continue
            best = max(best, r.n)
    return best


def has_weak_next(f: Formula) -> bool:
    return any(isinstance(r, WeakNext) for a in atoms_of(f) for r in atom_reads(a))


def map_atoms(f: Formula, fn) -> Formula:
    """Rebuild ``f`` replacing each predicate subformula ``a`` by ``fn(a)``."""
    if isinstance(f, (Atom, BoolField)):
        return fn(f)
    if isinstance(f, (TrueC, FalseC)):
        return f
    if isinstance(f, (Not, Tomorrow)):
        return type(f)(map_atoms(f.sub, fn))
    return type(f)(map_atoms(f.left, fn), map_atoms(f.right, fn))


def map_atoms_ctx(f: Formula, fn, guarded: bool = False) -> Formula:
    """Like :func:`map_atoms` but passes whether the atom sits under X or U.

    Subformulas below a temporal operator are only ever evaluated on
    nonempty suffixes.
    """
    if isinstance(f, (Atom, BoolField)):
        return fn(f, guarded)
    if isinstance(f, (TrueC, FalseC)):
        return f
    if isinstance(f, Not):
        return Not(map_atoms_ctx(f.sub, fn, guarded))
    if isinstance(f, Tomorrow):
        return Tomorrow(map_atoms_ctx(f.sub, fn, True))
    inner = guarded or isinstance(f, Until)
    return type(f)(map_atoms_ctx(f.left, fn, inner), map_atoms_ctx(f.right, fn, inner))


def size(f: Formula) -> int:
    if isinstance(f, (Not, Tomorrow)):
        return 1 + size(f.sub)
    if isinstance(f, (And, Or, Implies, Iff, Until)):
        return 1 + size(f.left) + size(f.right)
    return 1


# ---------------------------------------------------------------------------
# satisfaction relation


def eval_formula(f: Formula, w: DataWord | Sequence[Mapping]) -> bool:
    """Decide ``w |= f`` by direct recursion over suffixes."""
    symbols = w.symbols if isinstance(w, DataWord) else tuple(w)
    return _Evaluator(symbols).holds(f, 0)


class _Evaluator:
    def __init__(self, symbols):
        self.symbols = symbols
        self.n = len(symbols)
        self.memo: dict = {}

    def holds(self, f, i) -> bool:
        key = (id(f), i)
        r = self.memo.get(key)
        if r is None:
            r = self._holds(f, i)
            self.memo[key] = r
        return r

    def _holds(self, f, i) -> bool:
        if isinstance(f, TrueC):
            return True
        if isinstance(f, FalseC):
            return False
        if isinstance(f, Atom):
            vals = (_eval_term(f.lhs, self.symbols, i), _eval_term(f.rhs, self.symbols, i))
            return _predicate(vals, lambda: compare(f.pred, *vals))
        if isinstance(f, BoolField):
            vals = (_eval_term(f.term, self.symbols, i),)
            return _predicate(vals, lambda: bool(vals[0]))
        if isinstance(f, Not):
            return not self.holds(f.sub, i)
        if isinstance(f, And):
            return self.holds(f.left, i) and self.holds(f.right, i)
        if isinstance(f, Or):
            return self.holds(f.left, i) or self.holds(f.right, i)
        if isinstance(f, Implies):
            return (not self.holds(f.left, i)) or self.holds(f.right, i)
        if isinstance(f, Iff):
            return self.holds(f.left, i) == self.holds(f.right, i)
        if isinstance(f, Until):
            for k in range(i, self.n):
                if self.holds(f.right, k):
                    return True
                if not self.holds(f.left, k):
                    return False
            return False
        if isinstance(f, Tomorrow):
            return self.n - i > 1 and self.holds(f.sub, i + 1)
        raise TypeError(f"not a formula: {f!r}")


def _predicate(vals, theory) -> bool:
    if any(v is STRONG_ERROR for v in vals):
        return False
    if any(v is WEAK_ERROR for v in vals):
        return True
    return theory()


# ---------------------------------------------------------------------------
# printing in the concrete grammar

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Until: 5}


def to_text(f: Formula) -> str:
    return _fmt(f, 0)


def _fmt(f, ctx) -> str:
    if isinstance(f, TrueC):
        return "true"
    if isinstance(f, FalseC):
        return "false"
    if isinstance(f, Atom):
        s = f"{f.lhs} {f.pred} {f.rhs}"
        return s if ctx < 6 else f"({s})"
    if isinstance(f, BoolField):
        return str(f.term)
    if isinstance(f, Not):
        return "!" + _fmt(f.sub, 6)
    if isinstance(f, Tomorrow):
        return "X " + _fmt(f.sub, 6)
    p = _PREC[type(f)]
    op = {Iff: "<->", Implies: "->", Or: "||", And: "&&", Until: "U"}[type(f)]
    # binary operators are printed right-associatively
    s = f"{_fmt(f.left, p + 1)} {op} {_fmt(f.right, p)}"
    return f"({s})" if ctx > p else s
