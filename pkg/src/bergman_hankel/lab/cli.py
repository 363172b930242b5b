"""Command line: ``bergman-lab <subcommand> --config FILE [key=value ...]``.

Exit codes: 0 all asserted bands/flags pass, 1 a band or flag failed,
2 numerical tolerance failure, 3 precondition failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from ..errors import NumericalError, PreconditionError
from .experiments import RUNNERS
from .report import CSV_HELP, ExperimentReport, emit_report
from .scenario import Scenario, load_scenario, parse_scenario

log = logging.getLogger("bergman_lab")

EXIT_OK, EXIT_FAILED, EXIT_NUMERICAL, EXIT_PRECONDITION = 0, 1, 2, 3


def _overrides(items):
    out = []
    for item in items:
        if "=" not in item:
            raise PreconditionError(f"override {item!r} is not key=value")
        k, _, v = item.partition("=")
        out.append((k, v))
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bergman-lab", description="Weighted Bergman space experiments.",
        epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run a {name} scenario", epilog=CSV_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="flat key = value scenario file")
        p.add_argument("--seed", type=int, help="overrides the seed in the config")
        p.add_argument("--out", default=None, help="output directory (default: out/<name>)")
        p.add_argument("--format", choices=["json", "csv", "both"], default="both")
        p.add_argument("overrides", nargs="*", metavar="key=value")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    partial = None
    try:
        pairs = _overrides(args.overrides) + [("kind", args.command)]
        if args.seed is not None:
            pairs.append(("seed", str(args.seed)))
        sc = load_scenario(args.config, pairs) if args.config else parse_scenario("", ".", pairs)
        partial = sc
        rep = RUNNERS[args.command](sc)
        code = EXIT_OK if rep.passed else EXIT_FAILED
    except PreconditionError as exc:
        log.error("precondition failure: %s", exc)
        rep, code = _partial(args.command, partial, exc), EXIT_PRECONDITION
    except NumericalError as exc:
        log.error("numerical failure: %s (best=%s, bound=%s)", exc, exc.best, exc.bound)
        rep, code = _partial(args.command, partial, exc), EXIT_NUMERICAL
    out = args.out or os.path.join("out", partial.name if partial else args.command)
    formats = ("json", "csv") if args.format == "both" else (args.format,)
    for path in emit_report(rep, out, formats):
        log.info("wrote %s", path)
    status = "PASS" if code == EXIT_OK else "FAIL"
    print(f"{args.command}: {status} (exit {code}) -> {out}")
    for k, v in rep.checks.items():
        print(f"  {'ok  ' if v else 'FAIL'} {k}")
    return code


def _partial(kind, sc, exc):
    echo = sc.echo() if isinstance(sc, Scenario) else {}
    return ExperimentReport(kind=kind, scenario=echo, status="partial", error=str(exc))


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
