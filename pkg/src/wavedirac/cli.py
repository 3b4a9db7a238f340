"""Command-line entry point: ``wavedirac run | list-tasks | version``.

Exit codes: 0 all tasks pass, 1 some task failed, 2 scenario/argument
error, 3 model construction error.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .runner import (
    TASK_HELP,
    TASKS,
    ModelError,
    OUT_ENV,
    ScenarioError,
    load_scenario,
    parse_tolerance_override,
    resolve_out_dir,
    run_scenario,
)

EXIT_OK, EXIT_TASK, EXIT_PARSE, EXIT_MODEL = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavedirac", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="scenario JSON file")
    run.add_argument("--out", help=f"output directory (overrides ${OUT_ENV})")
    run.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                     help="override a tolerance; repeatable")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    sub.add_parser("list-tasks", help="list task names")
    sub.add_parser("version", help="print the version")
    return ap


def _run(args) -> int:
    try:
        sc = load_scenario(args.scenario)
        for item in args.tol:
            key, val = parse_tolerance_override(item)
            sc.tolerances[key] = val
        if args.seed is not None:
            if args.seed < 0:
                raise ScenarioError("seed must be nonnegative")
            sc.seed = args.seed
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    out = resolve_out_dir(args.out, os.environ)
    try:
        report = run_scenario(sc, out, plots=not args.no_plots)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    for t in report.tasks:
        line = f"{t.name:<16} {'PASS' if t.passed else 'FAIL'}"
        if t.error:
            line += f"  {t.error}"
        failing = [k for k, r in t.residuals.items() if not r["pass"]]
        if failing:
            line += "  failing: " + ", ".join(failing)
        print(line)
    print(f"report: {out / 'report.json'}")
    return EXIT_OK if report.passed else EXIT_TASK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    if args.command == "list-tasks":
        for name in TASKS:
            print(f"{name:<16} {TASK_HELP[name]}")
        return EXIT_OK
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
