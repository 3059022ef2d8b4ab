"""A minimal reduced ordered BDD used to canonicalise progression residues.

Nodes are integers; ``0`` and ``1`` are the terminals.  Smaller variable
indices sit closer to the root.
"""

from __future__ import annotations

FALSE_NODE = 0
TRUE_NODE = 1
_TERMINAL = 1 << 62


class BDD:
    def __init__(self):
        self._var = [_TERMINAL, _TERMINAL]
        self._lo = [0, 1]
        self._hi = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._ite_memo: dict[tuple[int, int, int], int] = {}

    def __len__(self):
        return len(self._var)

    def var_of(self, u: int) -> int:
        return self._var[u]

    def low(self, u: int) -> int:
        return self._lo[u]

    def high(self, u: int) -> int:
        return self._hi[u]

    def is_terminal(self, u: int) -> bool:
        return u < 2

    def mk(self, v: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (v, lo, hi)
        u = self._unique.get(key)
        if u is None:
            u = len(self._var)
            self._var.append(v)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = u
        return u

    def var(self, v: int) -> int:
        return self.mk(v, FALSE_NODE, TRUE_NODE)

    def ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE_NODE:
            return g
        if f == FALSE_NODE:
            return h
        if g == h:
            return g
        if g == TRUE_NODE and h == FALSE_NODE:
            return f
        key = (f, g, h)
        r = self._ite_memo.get(key)
        if r is not None:
            return r
        v = min(self._var[f], self._var[g], self._var[h])
        f0, f1 = self._cofactors(f, v)
        g0, g1 = self._cofactors(g, v)
        h0, h1 = self._cofactors(h, v)
        r = self.mk(v, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_memo[key] = r
        return r

    def _cofactors(self, u, v):
        if self._var[u] == v:
            return self._lo[u], self._hi[u]
        return u, u

    def neg(self, u: int) -> int:
        return self.ite(u, FALSE_NODE, TRUE_NODE)

    def and_(self, u: int, v: int) -> int:
        return self.ite(u, v, FALSE_NODE)

    def or_(self, u: int, v: int) -> int:
        return self.ite(u, TRUE_NODE, v)

    def iff(self, u: int, v: int) -> int:
        return self.ite(u, v, self.neg(v))

    def restrict(self, u: int, v: int, value: bool) -> int:
        if u < 2 or self._var[u] > v:
            return u
        if self._var[u] == v:
            return self._hi[u] if value else self._lo[u]
        return self.mk(self._var[u], self.restrict(self._lo[u], v, value),
                       self.restrict(self._hi[u], v, value))

    def evaluate(self, u: int, assignment) -> bool:
        """``assignment`` maps a variable index to bool; missing variables read False."""
        while u >= 2:
            u = self._hi[u] if assignment.get(self._var[u], False) else self._lo[u]
        return u == TRUE_NODE
