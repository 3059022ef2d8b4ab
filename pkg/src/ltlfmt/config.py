"""Run configuration shared by the pipelines and the command line."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .logic import LtlfmtError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on older interpreters only
    import tomli as tomllib


class ConfigError(LtlfmtError):
    pass


ENCODINGS = ("per-state", "monolithic")


@dataclass(frozen=True)
class RunConfig:
    solver_cmd: str | None = None     # Horn solver template, ``{input}`` = file path
    smt_cmd: str | None = None        # plain SMT solver for witnesses
    timeout: float = 600.0            # seconds per solver call
    max_witness_len: int = 32
    encoding: str = "per-state"
    dfa_import: str | None = None     # HOA file replacing the builtin DFA construction
    monitor_budget: float = 5.0       # seconds per emptiness check while monitoring
    witness: bool = False

    def __post_init__(self):
        if not self.timeout > 0:
            raise ConfigError("timeout must be positive")
        if not self.monitor_budget > 0:
            raise ConfigError("monitor_budget must be positive")
        if self.max_witness_len < 0:
            raise ConfigError("max_witness_len must be non-negative")
        if self.encoding not in ENCODINGS:
            raise ConfigError(f"encoding must be one of {', '.join(ENCODINGS)}")

    def updated(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_config(path: str | Path) -> RunConfig:
    """Read a JSON (``.json``) or TOML config; keys mirror :class:`RunConfig`."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        if p.suffix == ".json":
            doc = json.loads(text)
        else:
            doc = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    doc = {k.replace("-", "_"): v for k, v in doc.items()}
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {', '.join(unknown)}")
    try:
        return RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
