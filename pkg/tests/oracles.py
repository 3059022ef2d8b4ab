"""Independent oracles for the acceptance suite.

None of these call the Horn solver.  ``explicit_monitor`` explores the
concrete state space of a finite-state lifted automaton; ``bounded_emptiness``
decides emptiness by direct unrolling of the semantics up to a pumping
bound.
"""

from __future__ import annotations

import itertools
from collections import deque

from ltlfmt.apps import RV
from ltlfmt.bounded import bounded_models
from ltlfmt.logic import DataSignature, Sort, eval_formula
from ltlfmt.sdwa import LiftedSdwa, run, stepper


def letters(sig: DataSignature, grid: dict | None = None) -> list[dict]:
    """Every symbol over ``sig``; non-Boolean fields range over ``grid``."""
    domains = []
    for f in sig.fields:
        if f.sort is Sort.BOOL:
            domains.append([False, True])
        else:
            domains.append(list(grid[f.name]))
    return [dict(zip(sig.names, vals)) for vals in itertools.product(*domains)]


def explicit_monitor(m: LiftedSdwa, prefix, alphabet: list[dict]) -> RV:
    """RV verdict after ``prefix`` by breadth-first search over concrete states.

    Exact when every reachable state is visited, which holds for Boolean
    signatures (finitely many buffer contents).
    """
    st = stepper(m)
    start = run(m, prefix).final_state
    now = st.is_final(start)
    key = lambda rec: tuple(sorted(rec.items()))  # noqa: E731
    seen = {key(start)}
    todo = deque([start])
    while todo:
        rec = todo.popleft()
        for sym in alphabet:
            (succ,) = st.successors(rec, sym)
            if st.is_final(succ) != now:
                return RV.CS if now else RV.CV
            k = key(succ)
            if k not in seen:
                seen.add(k)
                todo.append(succ)
    return RV.PS if now else RV.PV


def pumping_bound(m: LiftedSdwa, domain_size: int) -> int:
    """Number of concrete states when every data value lies in a domain of
    ``domain_size`` elements: a nonempty language then has a word no longer
    than this."""
    return m.dfa.n_states * domain_size ** (m.buffer * len(m.signature.fields))


def bounded_emptiness(f, sig: DataSignature, bound: int, solver_cmd=None):
    """(empty?, witness) from the semantics unrolled at every length up to ``bound``."""
    results = bounded_models([(f, sig, n) for n in range(bound + 1)], solver_cmd)
    for word in results:
        if word == "unknown":
            return None, None
        if word is not None:
            if not eval_formula(f, word):
                raise AssertionError("bounded model does not satisfy the formula")
            return False, word
    return True, None
