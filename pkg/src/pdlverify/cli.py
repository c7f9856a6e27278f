"""Command-line driver: ``pdlverify verify FILE`` and ``pdlverify oracle FILE``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .constraints import emit_smtlib
from .engine import format_tree, tree_to_json
from .errors import ParseError, PdlError
from .formula import sat_state_formula
from .oracle import enumerate_paths
from .parser import parse_task
from .printer import format_prob, format_ratio
from .verify import (EXIT_INPUT_ERROR, oracle_minimum, oracle_task, parse_binding,
                     verify_task)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are input errors too
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    ap = _ArgumentParser(
        prog="pdlverify",
        description="Verify lower bounds on the probability of pGCL postconditions.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="task file (.pgcl)")
        p.add_argument("--unroll", type=int, default=8, metavar="N",
                       help="loop unrolling budget (default 8)")
        p.add_argument("--bind", action="append", default=[], metavar="x=v",
                       help="fix an @input value (repeatable)")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    v = sub.add_parser("verify", help="prove the claimed bound deductively")
    common(v)
    v.add_argument("--tree", metavar="PATH",
                   help="write the proof tree (JSON if PATH ends in .json, else text)")
    v.add_argument("--smt", metavar="PATH", help="write the constraint system as SMT-LIB")
    v.add_argument("--no-split", action="store_true",
                   help="keep finite-domain inputs symbolic instead of case-splitting")

    o = sub.add_parser("oracle", help="compute the exact worst-case probability")
    common(o)
    o.add_argument("--enumerate", action="store_true",
                   help="print every path of every demonic resolution")
    return ap


def _cmd_verify(args, out: TextIO) -> int:
    task = parse_task(Path(args.file).read_text())
    binds = dict(parse_binding(b) for b in args.bind)
    res = verify_task(task, args.unroll, binds, split_inputs=not args.no_split)
    v = res.verdict
    tree_path = None
    if args.tree:
        text = tree_to_json(res.tree) if args.tree.endswith(".json") else format_tree(res.tree)
        Path(args.tree).write_text(text)
        tree_path = args.tree
    if args.smt:
        Path(args.smt).write_text(emit_smtlib(res.constraints[:-1], v.claimed))
    if args.json:
        doc = {"status": v.status, "claimed": format_ratio(v.claimed),
               "maxProvable": format_ratio(v.max_provable),
               "elapsedMs": round(v.elapsed_ms, 3)}
        if tree_path:
            doc["proofTreePath"] = tree_path
        out.write(json.dumps(doc) + "\n")
    else:
        out.write(f"status: {v.status}\n")
        out.write(f"claimed: {format_prob(v.claimed)}\n")
        out.write(f"maxProvable: {format_prob(v.max_provable)}\n")
        for note in v.notes:
            out.write(f"note: {note}\n")
        if tree_path:
            out.write(f"proofTree: {tree_path}\n")
        out.write(f"elapsed: {v.elapsed_ms:.1f} ms\n")
    return v.exit_code


def _cmd_oracle(args, out: TextIO) -> int:
    task = parse_task(Path(args.file).read_text())
    binds = dict(parse_binding(b) for b in args.bind)
    runs = oracle_task(task, args.unroll, binds)
    if args.json:
        doc = {"valuations": [
            {"valuation": {k: v for k, v in r.valuation.items()},
             "lowerBound": format_ratio(r.result.lower_bound),
             "residualMass": format_ratio(r.result.residual_mass),
             "exact": r.result.exact} for r in runs],
            "minimum": format_ratio(oracle_minimum(runs))}
        out.write(json.dumps(doc) + "\n")
        return 0
    if not runs:
        out.write("no input valuation satisfies @assume\n")
    for r in runs:
        if task.inputs:
            out.write(f"valuation: {r.valuation}\n")
        out.write(f"lowerBound: {format_prob(r.result.lower_bound)}\n")
        out.write(f"residualMass: {format_prob(r.result.residual_mass)}\n")
        out.write(f"exact: {'true' if r.result.exact else 'false'}\n")
        if args.enumerate:
            out.write("paths:\n")
            for p in enumerate_paths(task.body, r.valuation, args.unroll):
                mark = "cut" if p.truncated else (
                    "sat" if sat_state_formula(p.final, task.ensures) else "unsat")
                out.write(f"  [{p.resolution or '-'}] {format_prob(p.probability)} "
                          f"{p.final} {mark}\n")
    if len(runs) > 1:
        out.write(f"minimum: {format_prob(oracle_minimum(runs))}\n")
    return 0


def main(argv: Sequence[str] | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = _build_parser().parse_args(argv)
    if args.unroll < 0:
        err.write("error: --unroll must be >= 0\n")
        return EXIT_INPUT_ERROR
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    try:
        if args.command == "verify":
            return _cmd_verify(args, out)
        return _cmd_oracle(args, out)
    except ParseError as e:
        err.write(f"{args.file}:{e}\n")
        return EXIT_INPUT_ERROR
    except (PdlError, OSError) as e:
        err.write(f"error: {e}\n")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
