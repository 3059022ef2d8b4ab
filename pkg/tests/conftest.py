from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ltlfmt.chc import solver_available  # noqa: E402

HAVE_SOLVER = solver_available()


def pytest_collection_modifyitems(config, items):
    if HAVE_SOLVER:
        return
    skip = pytest.mark.skip(reason="no Horn solver available (install z3 or set LTLFMT_SOLVER)")
    for item in items:
        if "solver" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
