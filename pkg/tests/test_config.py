from __future__ import annotations

import pytest

from ltlfmt.config import ConfigError, RunConfig, load_config


def test_defaults():
    cfg = RunConfig()
    assert cfg.timeout == 600 and cfg.encoding == "per-state" and cfg.max_witness_len == 32


def test_validation():
    with pytest.raises(ConfigError):
        RunConfig(timeout=0)
    with pytest.raises(ConfigError):
        RunConfig(encoding="magic")


def test_updated_ignores_none():
    cfg = RunConfig().updated(timeout=5, solver_cmd=None)
    assert cfg.timeout == 5 and cfg.solver_cmd is None


def test_toml_and_json(tmp_path):
    t = tmp_path / "c.toml"
    t.write_text('solver-cmd = "z3 -smt2 {input}"\nmax_witness_len = 8\n')
    assert load_config(t) == RunConfig(solver_cmd="z3 -smt2 {input}", max_witness_len=8)
    j = tmp_path / "c.json"
    j.write_text('{"encoding": "monolithic"}')
    assert load_config(j).encoding == "monolithic"


def test_errors(tmp_path):
    with pytest.raises(ConfigError, match="unknown keys"):
        p = tmp_path / "c.json"
        p.write_text('{"speed": 1}')
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("x = ")
    with pytest.raises(ConfigError):
        load_config(bad)
