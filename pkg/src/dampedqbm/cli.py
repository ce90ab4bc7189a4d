"""Command-line entry point: ``dampedqbm run | list | validate``."""
from __future__ import annotations

import argparse
import logging
import sys

from .evolution import NumericalError
from .harness import CATALOG, run_scenario
from .io import ConfigError, parse_config

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dampedqbm", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a catalog scenario and write CSV + manifest")
    run.add_argument("scenario", choices=sorted(CATALOG))
    run.add_argument("--config", help="key=value file; --set flags override it")
    run.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("--out", default="runs", help="output directory (default: runs)")
    run.add_argument("--grid-points", type=int)
    run.add_argument("--half-width", type=float)
    run.add_argument("--workers", type=int)

    sub.add_parser("list", help="print the scenario catalog with defaults")

    val = sub.add_parser("validate", help="run the invariant suite at reduced resolution")
    val.add_argument("--grid-points", type=int, default=129)
    return ap


def _cmd_list() -> int:
    for sc in CATALOG.values():
        print(f"{sc.name}\n    {sc.description}")
        for k, v in sc.defaults.items():
            print(f"    {k} = {v}")
    return EXIT_OK


def _cmd_run(args) -> int:
    flags = list(args.sets)
    if args.grid_points is not None:
        flags.append(f"n_points={args.grid_points}")
    if args.half_width is not None:
        flags.append(f"half_width={args.half_width}")
    if args.workers is not None:
        flags.append(f"workers={args.workers}")
    overrides = parse_config(args.config, flags)
    result = run_scenario(args.scenario, overrides, out_dir=args.out)
    print(f"wrote {result.csv_path} and {result.manifest_path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validation import run_checks

    checks = run_checks(args.grid_points)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_run(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
