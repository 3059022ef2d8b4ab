"""Command-line frontend.

Exit codes: 0 satisfiable / nonempty / accepted, 1 unsatisfiable / empty /
rejected, 2 unknown or timeout, 3 usage or internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import apps, bench, chc
from .config import ENCODINGS, ConfigError, RunConfig, load_config
from .dfa import export_hoa
from .logic import DataSignature, LtlfmtError, eval_formula, parse_signature, parse_trace, symbol_to_json
from .parser import FormulaError, infer_signature, parse_formula
from .sdwa import describe, dump_model, load_model, run

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3

POLARITY = {
    apps.VerdictKind.SAT: "clause system unsatisfiable, language nonempty",
    apps.VerdictKind.UNSAT: "clause system satisfiable, language empty",
    apps.VerdictKind.UNKNOWN: "solver gave no answer",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _read(path: str, what: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path!r}: {exc.strerror}") from None


def _formula(args, sig: DataSignature | None = None):
    if args.expr is not None:
        text = args.expr
    elif args.formula is not None:
        text = _read(args.formula, "formula file")
    else:
        raise UsageError("give a formula with -f FILE or -e TEXT")
    if sig is None:
        sig = parse_signature(_read(args.sig, "signature file")) if getattr(args, "sig", None) \
            else infer_signature(text)
    return parse_formula(text, sig), sig


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return cfg.updated(
        solver_cmd=args.solver,
        timeout=args.timeout,
        encoding=getattr(args, "encoding", None),
        max_witness_len=getattr(args, "max_len", None),
        witness=True if getattr(args, "witness", False) else None,
        dfa_import=getattr(args, "dfa_import", None),
        monitor_budget=getattr(args, "budget", None),
    )


def _print_word(w, out=sys.stdout):
    for sym in w.symbols:
        print(json.dumps(symbol_to_json(sym)), file=out)


def _report(v: apps.Verdict, label: str) -> int:
    print(f"result: {label[v.kind]} ({POLARITY[v.kind]})")
    if v.reason:
        print(f"reason: {v.reason}")
    print(f"chcs: {v.chc_count}  build: {v.build_time:.2f}s  solve: {v.solve_time:.2f}s")
    if v.witness is not None:
        print(f"witness ({len(v.witness)} symbols):")
        _print_word(v.witness)
    return v.exit_code


# ---------------------------------------------------------------------------
# commands


def cmd_sat(args) -> int:
    f, sig = _formula(args)
    cfg = _config(args)
    if args.emit_chc:
        m = apps.lift(f, sig, cfg)
        Path(args.emit_chc).write_text(chc.serialize(chc.emit_chcs(m, cfg.encoding)))
        print(f"wrote {args.emit_chc}")
        return EXIT_SAT
    v = apps.check_sat(f, sig, cfg)
    rc = _report(v, {apps.VerdictKind.SAT: "SAT", apps.VerdictKind.UNSAT: "UNSAT",
                     apps.VerdictKind.UNKNOWN: "UNKNOWN"})
    if cfg.witness and v.kind is apps.VerdictKind.SAT and v.witness is None:
        print(f"witness: none found up to length {cfg.max_witness_len}")
    return rc


def cmd_mc(args) -> int:
    system = load_model(_read(args.model, "model file"))
    f, sig = _formula(args, system.alphabet)
    cfg = _config(args)
    if args.emit_chc:
        from .sdwa import intersect

        product = intersect(system, apps.lift(f, sig, cfg))
        Path(args.emit_chc).write_text(chc.serialize(chc.emit_chcs(product, "monolithic")))
        print(f"wrote {args.emit_chc}")
        return EXIT_SAT
    v = apps.model_check(system, f, cfg, sig)
    return _report(v, {apps.VerdictKind.SAT: "EXISTS (some system trace satisfies the formula)",
                       apps.VerdictKind.UNSAT: "NONE (no system trace satisfies the formula)",
                       apps.VerdictKind.UNKNOWN: "UNKNOWN"})


def cmd_monitor(args) -> int:
    f, sig = _formula(args)
    cfg = _config(args)
    session = apps.monitor_start(f, sig, args.mode, cfg)
    stream = open(args.trace) if args.trace and args.trace != "-" else sys.stdin
    try:
        step = 0
        for lineno, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                sym = json.loads(line)
            except json.JSONDecodeError as exc:
                raise UsageError(f"trace line {lineno}: {exc.msg}") from None
            step += 1
            state = apps.monitor_step(session, sym)
            print(json.dumps(state.to_json(step)), flush=True)
    finally:
        if stream is not sys.stdin:
            stream.close()
    return EXIT_SAT


def cmd_run(args) -> int:
    if args.model:
        system = load_model(_read(args.model, "model file"))
        w = parse_trace(_read(args.trace, "trace file"), system.alphabet)
        accepted = run(system, w).accepted
        print("accept" if accepted else "reject")
        return EXIT_SAT if accepted else EXIT_UNSAT
    f, sig = _formula(args)
    cfg = _config(args)
    w = parse_trace(_read(args.trace, "trace file"), sig)
    m = apps.lift(f, sig, cfg)
    res = run(m, w)
    expected = eval_formula(f, w)
    print("accept" if res.accepted else "reject")
    if res.accepted == expected:
        print("oracle: ok")
    else:
        print("oracle: MISMATCH (direct evaluation says "
              f"{'accept' if expected else 'reject'})")
        return EXIT_ERROR
    if args.verbose and res.trace:
        for k, rec in enumerate(res.trace):
            print(f"state {k}: {json.dumps(symbol_to_json(rec))}")
    return EXIT_SAT if res.accepted else EXIT_UNSAT


def cmd_compile(args) -> int:
    f, sig = _formula(args)
    cfg = _config(args)
    m = apps.lift(f, sig, cfg)
    wanted = [args.dump_abstraction, args.dump_dfa, args.dump_sdwa, args.dump_chc,
              args.export_hoa, args.export_model]
    everything = not any(wanted)
    if args.dump_abstraction or everything:
        print(m.abstraction.table())
    if args.dump_dfa or everything:
        print(m.dfa.dump())
    if args.dump_sdwa or everything:
        print(describe(m))
    if args.dump_chc:
        sys.stdout.write(chc.serialize(chc.emit_chcs(m, cfg.encoding)))
    if args.export_hoa:
        Path(args.export_hoa).write_text(export_hoa(m.dfa, str(m.abstraction.ltlf)))
        print(f"wrote {args.export_hoa}")
    if args.export_model:
        Path(args.export_model).write_text(dump_model(m))
        print(f"wrote {args.export_model}")
    return EXIT_SAT


def cmd_bench(args) -> int:
    cfg = _config(args)
    if not chc.solver_available(cfg.solver_cmd):
        rows = [bench.BenchRow(n, p, e, note="no Horn solver available")
                for n, p, e in bench.MANIFEST if not args.only or n in args.only]
    else:
        rows = bench.run_bench(cfg, args.only, args.jobs)
    print(bench.format_table(rows))
    print("solve(s) is the clause-solving time only; total(s) includes construction")
    if any(r.observed == "Unknown" for r in rows):
        return EXIT_UNKNOWN
    return EXIT_SAT if all(r.ok for r in rows) else EXIT_UNSAT


# ---------------------------------------------------------------------------
# argument parsing


def _common(p, formula=True, sig=True):
    if formula:
        g = p.add_mutually_exclusive_group()
        g.add_argument("-f", "--formula", metavar="FILE", help="formula file ('-' for stdin)")
        g.add_argument("-e", "--expr", metavar="TEXT", help="formula text")
    if sig:
        p.add_argument("-s", "--sig", metavar="FILE",
                       help="signature file (JSON); inferred from the formula if omitted")
    p.add_argument("--config", metavar="FILE", help="TOML or JSON run configuration")
    p.add_argument("--solver", metavar="CMD",
                   help=f"Horn solver command template (default {chc.DEFAULT_HORN_CMD!r}, "
                        f"env {chc.SOLVER_ENV})")
    p.add_argument("--timeout", type=float, metavar="SEC", help="solver timeout in seconds")


def _dfa_flag(p):
    p.add_argument("--dfa-import", metavar="HOA", help="use this HOA automaton instead of the builtin DFA")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ltlfmt", description="LTLf modulo theories: satisfiability, "
                 "model checking and monitoring via symbolic automata and Horn clauses.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("sat", help="decide satisfiability of a formula")
    _common(p)
    _dfa_flag(p)
    p.add_argument("--emit-chc", metavar="PATH", help="write the clause system and stop")
    p.add_argument("--witness", action="store_true", help="search for a satisfying trace")
    p.add_argument("--max-len", type=int, metavar="K", help="witness length bound")
    p.add_argument("--encoding", choices=ENCODINGS)
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("mc", help="does some trace of a system model satisfy the formula?")
    _common(p, sig=False)
    p.add_argument("-m", "--model", required=True, metavar="FILE", help="JSON system model")
    p.add_argument("--emit-chc", metavar="PATH", help="write the clause system and stop")
    p.add_argument("--witness", action="store_true", help="search for a system trace")
    p.add_argument("--max-len", type=int, metavar="K", help="witness length bound")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("monitor", help="monitor a JSONL symbol stream")
    _common(p)
    _dfa_flag(p)
    p.add_argument("--mode", choices=apps.MODES, default="exact")
    p.add_argument("-t", "--trace", metavar="FILE", help="JSONL trace (default: stdin)")
    p.add_argument("--budget", type=float, metavar="SEC", help="per-step solver budget")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("run", help="simulate a trace on a formula's automaton or a model")
    _common(p)
    _dfa_flag(p)
    p.add_argument("-t", "--trace", required=True, metavar="FILE", help="JSONL trace")
    p.add_argument("-m", "--model", metavar="FILE", help="simulate this JSON model instead")
    p.add_argument("-v", "--verbose", action="store_true", help="print the state sequence")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compile", help="dump intermediate artefacts")
    _common(p)
    _dfa_flag(p)
    p.add_argument("--dump-abstraction", action="store_true", help="atom/proposition table")
    p.add_argument("--dump-dfa", action="store_true")
    p.add_argument("--dump-sdwa", action="store_true")
    p.add_argument("--dump-chc", action="store_true")
    p.add_argument("--encoding", choices=ENCODINGS)
    p.add_argument("--export-hoa", metavar="PATH", help="write the DFA in HOA format")
    p.add_argument("--export-model", metavar="PATH", help="write the automaton as a JSON model")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("bench", help="run the embedded satisfiability benchmarks")
    _common(p, formula=False, sig=False)
    p.add_argument("--only", action="append", choices=sorted({r[0] for r in bench.MANIFEST}))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--encoding", choices=ENCODINGS)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except FormulaError as exc:
        print(f"formula error: {exc}", file=sys.stderr)
    except chc.SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        if exc.raw_output:
            print(exc.raw_output.rstrip(), file=sys.stderr)
    except LtlfmtError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except BrokenPipeError:
        pass
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
