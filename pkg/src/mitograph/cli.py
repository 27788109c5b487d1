"""Command line entry point: ``mitograph run`` and ``mitograph list``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError, MitographError
from .harness import list_experiments, run

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for failed criteria
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mitograph", description="Branching-with-mass experiments and their checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("config", help="path to the experiment JSON document")
    r.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker processes (results do not depend on it)")
    r.add_argument("--out", default=None, help="output directory for artifacts")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    ls = sub.add_parser("list", help="list experiment kinds")
    ls.add_argument("-v", "--verbose", action="store_true", help="include oracle descriptions")
    return parser


def _print_catalog(verbose: bool) -> None:
    for kind, entry in list_experiments(verbose).items():
        print(kind)
        print(f"  required: {', '.join(entry['required']) or '(none)'}")
        print(f"  optional: {', '.join(entry['optional'])}")
        print(f"  checks:   {entry['claims']}")
        if verbose:
            print(f"  oracle:   {entry['oracle']}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        _print_catalog(args.verbose)
        return EXIT_OK
    try:
        report = run(args.config, out_dir=args.out, workers=args.workers, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except MitographError as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for c in report.criteria:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: statistic={c.statistic!r} tolerance={c.tolerance!r}")
    print(json.dumps({"passed": report.passed, "wall_clock_s": round(report.wall_clock, 3)}))
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
