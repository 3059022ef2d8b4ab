"""Quantifier-free first-order constraint expressions.

Records are flattened into dotted variable names: ``q.state``,
``a.temp``, ``qp.data1.temp``.  Expressions print to and parse from SMT-LIB
text and can be compiled into Python closures for concrete evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .logic import LtlfmtError, Sort


class ConstraintError(LtlfmtError):
    pass


class Expr:
    __slots__ = ()
    sort: Sort

    def __str__(self):
        return to_smt(self)

    def __and__(self, other):
        return and_(self, other)

    def __or__(self, other):
        return or_(self, other)

    def __invert__(self):
        return not_(self)


@dataclass(frozen=True, repr=False)
class Var(Expr):
    name: str
    sort: Sort

    def __repr__(self):
        return f"Var({self.name!r}, {self.sort.value})"


@dataclass(frozen=True, repr=False)
class Lit(Expr):
    value: object
    sort: Sort

    def __repr__(self):
        return f"Lit({self.value!r})"


@dataclass(frozen=True, repr=False)
class App(Expr):
    op: str
    args: tuple
    sort: Sort

    def __repr__(self):
        return f"App({self.op!r}, {list(self.args)!r})"


TRUE = Lit(True, Sort.BOOL)
FALSE = Lit(False, Sort.BOOL)

_CMP = {"<", "<=", ">", ">=", "=", "distinct"}
_ARITH = {"+", "-", "*", "neg"}
_BOOL = {"and", "or", "not", "=>"}


def lit(value, sort: Sort | None = None) -> Lit:
    if sort is None:
        if isinstance(value, bool):
            sort = Sort.BOOL
        elif isinstance(value, int):
            sort = Sort.INT
        else:
            sort = Sort.REAL
    return Lit(sort.coerce(value) if sort is not Sort.REAL else Fraction(value), sort)


def _boolean(op, xs):
    for x in xs:
        if x.sort is not Sort.BOOL:
            raise ConstraintError(f"non-Boolean operand of {op}: {x}")


def and_(*xs: Expr) -> Expr:
    _boolean("and", xs)
    flat = []
    for x in xs:
        if isinstance(x, App) and x.op == "and":
            flat.extend(x.args)
        elif x == TRUE:
            continue
        elif x == FALSE:
            return FALSE
        else:
            flat.append(x)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App("and", tuple(flat), Sort.BOOL)


def or_(*xs: Expr) -> Expr:
    _boolean("or", xs)
    flat = []
    for x in xs:
        if isinstance(x, App) and x.op == "or":
            flat.extend(x.args)
        elif x == FALSE:
            continue
        elif x == TRUE:
            return TRUE
        else:
            flat.append(x)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return App("or", tuple(flat), Sort.BOOL)


def not_(x: Expr) -> Expr:
    _boolean("not", (x,))
    if isinstance(x, Lit):
        return Lit(not x.value, Sort.BOOL)
    if isinstance(x, App) and x.op == "not":
        return x.args[0]
    return App("not", (x,), Sort.BOOL)


def implies(a: Expr, b: Expr) -> Expr:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return App("=>", (a, b), Sort.BOOL)


def cmp(op: str, a: Expr, b: Expr) -> Expr:
    if op == "!=":
        op = "distinct"
    if op not in _CMP:
        raise ConstraintError(f"unknown relation {op!r}")
    if a.sort is not b.sort:
        raise ConstraintError(f"sort mismatch in ({op} {a} {b})")
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(_apply(op, [a.value, b.value]), Sort.BOOL)
    return App(op, (a, b), Sort.BOOL)


def eq(a: Expr, b: Expr) -> Expr:
    return cmp("=", a, b)


def arith(op: str, *args: Expr) -> Expr:
    sort = args[0].sort
    if any(x.sort is not sort for x in args) or sort is Sort.BOOL:
        raise ConstraintError(f"ill-sorted arithmetic {op!r}")
    if all(isinstance(x, Lit) for x in args):
        return Lit(_apply(op, [x.value for x in args]), sort)
    return App(op, tuple(args), sort)


def ite(c: Expr, a: Expr, b: Expr) -> Expr:
    if c == TRUE:
        return a
    if c == FALSE:
        return b
    if a is b or (isinstance(a, Lit) and isinstance(b, Lit) and a == b):
        return a
    if a.sort is not b.sort:
        raise ConstraintError("ite branches of different sorts")
    return App("ite", (c, a, b), a.sort)


def _apply(op, vals):
    if op == "and":
        return all(vals)
    if op == "or":
        return any(vals)
    if op == "not":
        return not vals[0]
    if op == "=>":
        return (not vals[0]) or vals[1]
    if op == "=":
        return vals[0] == vals[1]
    if op == "distinct":
        return vals[0] != vals[1]
    if op == "<":
        return vals[0] < vals[1]
    if op == "<=":
        return vals[0] <= vals[1]
    if op == ">":
        return vals[0] > vals[1]
    if op == ">=":
        return vals[0] >= vals[1]
    if op == "+":
        return sum(vals[1:], vals[0])
    if op == "-":
        out = vals[0]
        for v in vals[1:]:
            out = out - v
        return out
    if op == "*":
        out = vals[0]
        for v in vals[1:]:
            out = out * v
        return out
    if op == "neg":
        return -vals[0]
    if op == "ite":
        return vals[1] if vals[0] else vals[2]
    raise ConstraintError(f"unknown operator {op!r}")


# ---------------------------------------------------------------------------
# traversal


def free_vars(e: Expr) -> dict[str, Sort]:
    out: dict[str, Sort] = {}
    stack = [e]
    seen: set[int] = set()
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out[x.name] = x.sort
        elif isinstance(x, App) and id(x) not in seen:
            seen.add(id(x))
            stack.extend(x.args)
    return out


def ordered_vars(*es: Expr) -> dict[str, Sort]:
    """Free variables in first-occurrence order (deterministic)."""
    out: dict[str, Sort] = {}
    stack = list(reversed(es))
    seen: set[int] = set()
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.setdefault(x.name, x.sort)
        elif isinstance(x, App) and id(x) not in seen:
            seen.add(id(x))
            stack.extend(reversed(x.args))
    return out


def postorder(e: Expr) -> list[Expr]:
    """Distinct subexpressions, children before parents (no recursion)."""
    out: list[Expr] = []
    done: set[int] = set()
    stack = [(e, False)]
    while stack:
        x, expanded = stack.pop()
        if id(x) in done:
            continue
        if expanded or not isinstance(x, App):
            done.add(id(x))
            out.append(x)
            continue
        stack.append((x, True))
        stack.extend((a, False) for a in reversed(x.args))
    return out


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    new: dict[int, Expr] = {}
    for x in postorder(e):
        if isinstance(x, Var):
            r = mapping.get(x.name, x)
        elif isinstance(x, App):
            args = tuple(new[id(a)] for a in x.args)
            r = x if all(a is b for a, b in zip(args, x.args)) else _rebuild(x.op, args, x.sort)
        else:
            r = x
        new[id(x)] = r
    return new[id(e)]


def _rebuild(op, args, sort):
    if op == "and":
        return and_(*args)
    if op == "or":
        return or_(*args)
    if op == "not":
        return not_(args[0])
    if op == "=>":
        return implies(*args)
    if op in _CMP:
        return cmp(op, *args)
    if op == "ite":
        return ite(*args)
    if op in _ARITH:
        return arith(op, *args)
    return App(op, args, sort)


def rename_records(e: Expr, renames: Mapping[str, str]) -> Expr:
    """Rename record prefixes, e.g. ``{"q": "s0", "qp": "s1"}``."""
    mapping = {}
    for name, sort in free_vars(e).items():
        rec, dot, rest = name.partition(".")
        if dot and rec in renames:
            mapping[name] = Var(f"{renames[rec]}.{rest}", sort)
    return substitute(e, mapping)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, env: Mapping[str, object]):
    return compile_expr(e)(env)


def _dispatch_key(c: Expr):
    """``(= v k)`` with ``v`` a variable and ``k`` a literal, as ``(name, k)``."""
    if isinstance(c, App) and c.op == "=":
        a, b = c.args
        if isinstance(a, Var) and isinstance(b, Lit):
            return a.name, b.value
        if isinstance(b, Var) and isinstance(a, Lit):
            return b.name, a.value
    return None


def _chain(e: Expr):
    """Unfold ``ite(v = k1, t1, ite(v = k2, t2, ... d))`` into ``(v, [(k, t)], d)``."""
    key = _dispatch_key(e.args[0])
    if key is None:
        return None
    name, cases, x = key[0], [], e
    while isinstance(x, App) and x.op == "ite":
        k = _dispatch_key(x.args[0])
        if k is None or k[0] != name:
            break
        cases.append((k[1], x.args[1]))
        x = x.args[2]
    return (name, cases, x) if len(cases) >= 4 else None


def compile_expr(e: Expr) -> Callable[[Mapping[str, object]], object]:
    """Compile to a closure over an environment mapping variable names to values.

    Long ``ite`` chains that dispatch on one variable become table lookups.
    """
    fns: dict[int, Callable] = {}
    chains: dict[int, tuple] = {}
    # post-order walk; chains are expanded into their cases instead of args
    order: list[Expr] = []
    done: set[int] = set()
    stack = [(e, False)]
    while stack:
        x, expanded = stack.pop()
        if id(x) in done or not isinstance(x, App):
            continue
        if expanded:
            done.add(id(x))
            order.append(x)
            continue
        stack.append((x, True))
        ch = _chain(x) if x.op == "ite" else None
        if ch is not None:
            chains[id(x)] = ch
            kids = [t for _, t in ch[1]] + [ch[2]]
        else:
            kids = list(x.args)
        stack.extend((k, False) for k in kids)

    def leaf(x):
        if isinstance(x, Lit):
            v = x.value
            return lambda env: v
        name = x.name

        def read(env):
            try:
                return env[name]
            except KeyError:
                raise ConstraintError(f"unbound variable {name}") from None

        return read

    def get(x):
        f = fns.get(id(x))
        if f is None:
            f = fns[id(x)] = leaf(x)
        return f

    for x in order:
        if id(x) in chains:
            name, cases, default = chains[id(x)]
            table = {}
            for k, t in cases:
                table.setdefault(k, get(t))
            fns[id(x)] = _table_fn(name, table, get(default))
        else:
            fns[id(x)] = _app_fn(x.op, [get(a) for a in x.args])
    return get(e)


def _table_fn(name, table, default):
    def dispatch(env):
        return table.get(env[name], default)(env)

    return dispatch


def _app_fn(op, fs):
    if op == "and":
        return lambda env: all(f(env) for f in fs)
    if op == "or":
        return lambda env: any(f(env) for f in fs)
    if op == "ite":
        c, a, b = fs
        return lambda env: a(env) if c(env) else b(env)
    if op == "=>":
        a, b = fs
        return lambda env: (not a(env)) or b(env)
    if op == "not":
        a = fs[0]
        return lambda env: not a(env)
    if len(fs) == 2:
        a, b = fs
        binary = {
            "=": lambda env: a(env) == b(env),
            "distinct": lambda env: a(env) != b(env),
            "<": lambda env: a(env) < b(env),
            "<=": lambda env: a(env) <= b(env),
            ">": lambda env: a(env) > b(env),
            ">=": lambda env: a(env) >= b(env),
            "+": lambda env: a(env) + b(env),
            "-": lambda env: a(env) - b(env),
            "*": lambda env: a(env) * b(env),
        }
        if op in binary:
            return binary[op]
    return lambda env: _apply(op, [f(env) for f in fs])


# ---------------------------------------------------------------------------
# SMT-LIB printing

_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")


def smt_symbol(name: str) -> str:
    return name if _SIMPLE_SYMBOL.match(name) else f"|{name}|"


def smt_literal(value, sort: Sort) -> str:
    if sort is Sort.BOOL:
        return "true" if value else "false"
    if sort is Sort.INT:
        return str(value) if value >= 0 else f"(- {-value})"
    v = Fraction(value)
    if v < 0:
        return f"(- {smt_literal(-v, sort)})"
    if v.denominator == 1:
        return f"{v.numerator}.0"
    den, k = v.denominator, 0
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den == 1:
        while (v * 10 ** k).denominator != 1:
            k += 1
        digits = str((v * 10 ** k).numerator).rjust(k + 1, "0")
        return f"{digits[:-k]}.{digits[-k:]}"
    return f"(/ {v.numerator}.0 {v.denominator}.0)"


def to_smt(e: Expr) -> str:
    parts: list[str] = []
    stack: list = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, str):
            parts.append(x)
        elif isinstance(x, Var):
            parts.append(smt_symbol(x.name))
        elif isinstance(x, Lit):
            parts.append(smt_literal(x.value, x.sort))
        else:
            parts.append("(" + ("-" if x.op == "neg" else x.op))
            stack.append(")")
            for a in reversed(x.args):
                stack.append(a)
                stack.append(" ")
    return "".join(parts)


# ---------------------------------------------------------------------------
# SMT-LIB parsing

_SEXP_TOKEN = re.compile(r'\s+|;[^\n]*|(\()|(\))|(\|[^|]*\|)|("(?:[^"]|"")*")|([^\s()|";]+)')


def parse_sexprs(text: str) -> list:
    """Parse a sequence of s-expressions into nested lists of atom strings."""
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        if not m:
            raise ConstraintError(f"bad s-expression near offset {pos}")
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise ConstraintError(f"unbalanced ')' at offset {m.start()}")
            done = stack.pop()
            stack[-1].append(done)
        elif m.group(3):
            stack[-1].append(m.group(3)[1:-1])
        elif m.group(4):
            stack[-1].append(m.group(4))
        elif m.group(5):
            stack[-1].append(m.group(5))
    if len(stack) != 1:
        raise ConstraintError("unbalanced '(' in s-expression")
    return stack[0]


_DECIMAL = re.compile(r"^\d+\.\d+$")


def sexpr_to_expr(sx, resolve: Callable[[str], Sort | None]) -> Expr:
    """Convert a parsed s-expression to an :class:`Expr`.

    ``resolve`` maps a symbol to its sort (or ``None`` when unknown).
    Integer numerals next to Real operands are read as Real.
    """
    if isinstance(sx, str):
        if sx == "true":
            return TRUE
        if sx == "false":
            return FALSE
        if sx.isdigit():
            return Lit(int(sx), Sort.INT)
        if _DECIMAL.match(sx):
            return Lit(Fraction(sx), Sort.REAL)
        sort = resolve(sx)
        if sort is None:
            raise ConstraintError(f"unknown symbol {sx!r}")
        return Var(sx, sort)
    if not sx:
        raise ConstraintError("empty application")
    head, *rest = sx
    if not isinstance(head, str):
        raise ConstraintError(f"unsupported head {head!r}")
    if head == "let":
        raise ConstraintError("let-bindings are not supported")
    args = [sexpr_to_expr(a, resolve) for a in rest]
    if head == "/" and all(isinstance(a, Lit) for a in args) and len(args) == 2:
        return Lit(Fraction(args[0].value) / Fraction(args[1].value), Sort.REAL)
    if head in ("+", "-", "*", "<", "<=", ">", ">=", "=", "distinct", "ite"):
        numeric = args[1:] if head == "ite" else args
        if any(a.sort is Sort.REAL for a in numeric):
            numeric = [_promote(a) for a in numeric]
            args = [args[0]] + numeric if head == "ite" else numeric
    try:
        if head == "and":
            return and_(*args)
        if head == "or":
            return or_(*args)
        if head == "not":
            return not_(args[0])
        if head == "=>":
            return implies(*args)
        if head == "ite":
            return ite(*args)
        if head == "-" and len(args) == 1:
            a = args[0]
            return Lit(-a.value, a.sort) if isinstance(a, Lit) else App("neg", (a,), a.sort)
        if head in ("+", "-", "*"):
            if head == "*" and sum(not isinstance(a, Lit) for a in args) > 1:
                raise ConstraintError("non-linear multiplication")
            return arith(head, *args)
        if head in _CMP:
            if len(args) != 2:
                return and_(*(cmp(head, x, y) for x, y in zip(args, args[1:])))
            return cmp(head, *args)
    except (TypeError, IndexError):
        raise ConstraintError(f"bad arity for {head!r}") from None
    if head == "/":
        raise ConstraintError("division is only supported between literals")
    raise ConstraintError(f"unsupported operator {head!r}")


def _promote(a: Expr) -> Expr:
    if isinstance(a, Lit) and a.sort is Sort.INT:
        return Lit(Fraction(a.value), Sort.REAL)
    return a


def parse_smt_expr(text: str, sorts: Mapping[str, Sort] | Callable[[str], Sort | None]) -> Expr:
    resolve = sorts if callable(sorts) else sorts.get
    sx = parse_sexprs(text)
    if len(sx) != 1:
        raise ConstraintError("expected exactly one expression")
    return sexpr_to_expr(sx[0], resolve)


def parse_smt_value(sx, sort: Sort | None = None):
    """Read a model value such as ``5``, ``(- 3)``, ``(/ 3.0 2.0)`` or ``true``."""
    e = sexpr_to_expr(sx, lambda name: None)
    if not isinstance(e, Lit):
        raise ConstraintError(f"not a literal value: {sx!r}")
    if sort is not None:
        return sort.coerce(e.value if sort is not Sort.REAL else Fraction(e.value))
    return e.value


def conjuncts(e: Expr) -> Iterable[Expr]:
    if isinstance(e, App) and e.op == "and":
        return e.args
    return (e,)
