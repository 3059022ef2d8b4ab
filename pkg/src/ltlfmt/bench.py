"""Embedded satisfiability benchmarks: the temperature controller family and
the contradictory ``G(x > 3) && F(x < 2)``."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .apps import VerdictKind, check_sat
from .chc import SolverError
from .config import RunConfig
from .logic import DataSignature
from .parser import parse_formula

TEMP_SIGNATURE = DataSignature.of(heat="bool", temp="real", e="int", t="int")
X_SIGNATURE = DataSignature.of(x="int")

# heating raises the temperature by 1.5 per hour and uses one energy unit,
# heating stays on for at least 4 hours and off for at least 2
RULES = """\
G( (wnext^1(t) = t + 1)
 && (heat -> (wnext^1(e) = e + 1 && wnext^1(temp) = temp + 1.5))
 && (!heat -> (wnext^1(e) = e && wnext^1(temp) = temp - 1))
 && ((!heat && X heat) -> (WX^2 heat && WX^3 heat && WX^4 heat))
 && ((heat && X !heat) -> WX^2 !heat) )
&& e = 0 && t = 0"""

TEMPCTRL = "({rules}) && temp = 20 && G(temp >= 18) && X^24(e <= {n} && temp >= 20)"

GANDF = "G(x > 3) && F(x < 2)"


def tempctrl_text(n: int) -> str:
    return TEMPCTRL.format(rules=RULES, n=n)


# name, parameter, expected answer to "is the formula satisfiable?"
MANIFEST = (
    ("tempctrl", 6, "No"),
    ("tempctrl", 9, "No"),
    ("tempctrl", 10, "Yes"),
    ("tempctrl", 12, "Yes"),
    ("tempctrl", 24, "Yes"),
    ("gandf", None, "No"),
)


def instance(name: str, n: int | None):
    """(formula text, signature) of a benchmark row."""
    if name == "tempctrl":
        return tempctrl_text(n), TEMP_SIGNATURE
    if name == "gandf":
        return GANDF, X_SIGNATURE
    raise KeyError(name)


@dataclass
class BenchRow:
    name: str
    n: int | None
    expected: str
    observed: str = "Unknown"
    chc_count: int = 0
    solve_time: float = 0.0
    total_time: float = 0.0
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.observed == self.expected

    def cells(self) -> list[str]:
        return [self.name, "-" if self.n is None else str(self.n), self.expected, self.observed,
                str(self.chc_count), f"{self.solve_time:.2f}", f"{self.total_time:.2f}",
                self.note]


HEADER = ["formula", "N", "expected", "observed", "CHCs", "solve(s)", "total(s)", "note"]


def run_row(name: str, n: int | None, expected: str, config: RunConfig) -> BenchRow:
    row = BenchRow(name, n, expected)
    text, sig = instance(name, n)
    t0 = time.perf_counter()
    try:
        v = check_sat(parse_formula(text, sig), sig, config)
    except SolverError as exc:
        row.note = str(exc)
        row.total_time = time.perf_counter() - t0
        return row
    row.total_time = time.perf_counter() - t0
    row.observed = {VerdictKind.SAT: "Yes", VerdictKind.UNSAT: "No"}.get(v.kind, "Unknown")
    row.chc_count, row.solve_time, row.note = v.chc_count, v.solve_time, v.reason
    return row


def run_bench(config: RunConfig | None = None, only: list[str] | None = None,
              jobs: int = 1) -> list[BenchRow]:
    config = config or RunConfig()
    rows = [r for r in MANIFEST if not only or r[0] in only]
    if jobs <= 1:
        return [run_row(*r, config) for r in rows]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda r: run_row(*r, config), rows))


def format_table(rows: list[BenchRow]) -> str:
    table = [HEADER] + [r.cells() for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(HEADER))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in table)
