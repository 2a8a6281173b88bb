"""Command-line interface: ``defaultdp {decide,enumerate,count,verify,td} FILE``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import oracle
from .decomposition import HEURISTICS, pretty_ltd_for, to_dot, to_json, width
from .formula import ResourceLimitError
from .solver import SolverConfig, iterate_solutions, solution_record, solve
from .theory import parse_theory

EXIT_SAT, EXIT_UNSAT, EXIT_ERROR = 10, 20, 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _env_seed() -> int:
    raw = os.environ.get("DEFAULTDP_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"DEFAULTDP_SEED must be an integer, got {raw!r}")


def _shared_flags(suppress: bool) -> argparse.ArgumentParser:
    # Global flags are accepted before and after the subcommand; the copy on the
    # subcommands suppresses defaults so it never clobbers an earlier value.
    def default(value):
        return argparse.SUPPRESS if suppress else value

    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--seed", type=int, default=default(None), help="tie-breaking seed (env DEFAULTDP_SEED, default 0)")
    flags.add_argument("--heuristic", choices=HEURISTICS, default=default("min-fill"))
    flags.add_argument("--jobs", type=int, default=default(1), help="worker threads for independent subtrees")
    flags.add_argument("--max-oracle-vars", type=int, default=default(oracle.MAX_VARIABLES))
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="defaultdp", description=__doc__, parents=[_shared_flags(False)])
    common = _shared_flags(True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decide", parents=[common], help="print SAT/UNSAT; exit 10/20")
    p.add_argument("path")
    p = sub.add_parser("enumerate", parents=[common], help="stable default sets as JSON lines")
    p.add_argument("path")
    p.add_argument("--limit", type=int, default=None)
    p = sub.add_parser("count", parents=[common], help="number of stable default sets")
    p.add_argument("path")
    p = sub.add_parser("verify", parents=[common], help="compare the solver with the brute-force oracle")
    p.add_argument("path")
    p = sub.add_parser("td", parents=[common], help="print the labeled tree decomposition")
    p.add_argument("path")
    p.add_argument("--format", choices=("dot", "json"), default="json")
    return parser


def _config(args) -> SolverConfig:
    seed = args.seed if args.seed is not None else _env_seed()
    return SolverConfig(heuristic=args.heuristic, seed=seed, jobs=max(1, args.jobs))


def cmd_decide(theory, args, out) -> int:
    tables = solve(theory, _config(args))
    found = bool(tables.accepting_rows())
    print("SAT" if found else "UNSAT", file=out)
    return EXIT_SAT if found else EXIT_UNSAT


def cmd_enumerate(theory, args, out) -> int:
    tables = solve(theory, _config(args))
    n = 0
    for s in iterate_solutions(tables, args.limit):
        print(json.dumps(solution_record(s, theory)), file=out)
        n += 1
    print(f"count={n}", file=sys.stderr)
    return EXIT_SAT if tables.accepting_rows() else EXIT_UNSAT


def cmd_count(theory, args, out) -> int:
    tables = solve(theory, _config(args))
    print(sum(1 for _ in iterate_solutions(tables)), file=out)
    return 0


def cmd_verify(theory, args, out) -> int:
    cap = args.max_oracle_vars
    report = oracle.cross_validate(theory, max_variables=cap)
    solved = list(iterate_solutions(solve(theory, _config(args))))
    dp_sets = sorted(sorted(s) for s in solved)
    oracle_sets = sorted(sorted(s) for s in report.stable_sets)
    duplicates = len(solved) != len(set(solved))
    doc = {
        "dp_sets": dp_sets,
        "oracle_sets": oracle_sets,
        "dp_matches_oracle": dp_sets == oracle_sets and not duplicates,
        "fixpoint_agreement": report.agreement,
        "oracle": report.to_json(),
    }
    mismatch = sorted(set(map(tuple, dp_sets)) ^ set(map(tuple, oracle_sets)))
    doc["first_counterexample"] = list(mismatch[0]) if mismatch else report.counterexample
    doc["agreement"] = doc["dp_matches_oracle"] and doc["fixpoint_agreement"]
    print(json.dumps(doc, indent=2), file=out)
    return 0 if doc["agreement"] else 2


def cmd_td(theory, args, out) -> int:
    cfg = _config(args)
    ltd = pretty_ltd_for(theory, cfg.heuristic, cfg.seed)
    out.write(to_dot(ltd) if args.format == "dot" else to_json(ltd) + "\n")
    print(f"width={width(ltd)}", file=sys.stderr)
    return 0


COMMANDS = {
    "decide": cmd_decide,
    "enumerate": cmd_enumerate,
    "count": cmd_count,
    "verify": cmd_verify,
    "td": cmd_td,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.path, encoding="utf-8") as fh:
            theory = parse_theory(fh.read())
        return COMMANDS[args.command](theory, args, sys.stdout)
    except (OSError, ValueError, ResourceLimitError) as exc:
        print(f"defaultdp: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
