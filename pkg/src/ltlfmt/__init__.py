"""LTLf modulo theories: formulas over finite data words, their compilation
to symbolic data-word automata and constrained Horn clauses, and the
satisfiability, model-checking and monitoring pipelines built on top."""

from __future__ import annotations

from .apps import RV, MonitorState, Verdict, VerdictKind, check_sat, model_check, monitor_start, monitor_step
from .chc import ChcSystem, emit_chcs, find_witness, serialize, solve
from .config import RunConfig
from .dfa import Dfa, export_hoa, import_dfa, ltlf_to_dfa
from .logic import DataSignature, DataWord, Sort, eval_formula, parse_signature, parse_trace
from .normal_forms import abstract, abstract_word, reduce_lookahead, remove_weak_next
from .parser import parse_formula
from .sdwa import LiftedSdwa, Sdwa, build_sdwa, check_determinism, compile_formula, intersect, simulate, union

__version__ = "0.1.0"

__all__ = [
    "RV", "ChcSystem", "DataSignature", "DataWord", "Dfa", "LiftedSdwa", "MonitorState",
    "RunConfig", "Sdwa", "Sort", "Verdict", "VerdictKind", "abstract", "abstract_word",
    "build_sdwa", "check_determinism", "check_sat", "compile_formula", "emit_chcs", "eval_formula", "export_hoa",
    "find_witness", "import_dfa", "intersect", "ltlf_to_dfa", "model_check", "monitor_start",
    "monitor_step", "parse_formula", "parse_signature", "parse_trace", "reduce_lookahead",
    "remove_weak_next", "serialize", "simulate", "solve", "union",
]
