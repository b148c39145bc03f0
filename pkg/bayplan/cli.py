"""
Command-line entry point: `bayplan <command> ...`.

Every command is a thin adapter over the library: it parses arguments, calls one pipeline
function and prints or writes the result. Exit codes: 0 success, 1 invalid input,
2 infeasible problem, 3 any other error.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .bay_alloc import emit_standard_form
from .errors import BayplanError, Infeasible, InvalidInput
from .pipeline import (
    bay_problem_to_dict,
    format_allocation,
    format_curve,
    format_report,
    format_summary,
    ingest,
    load_bay_problem,
    load_reports,
    run_scenario,
    summarize_runs,
    write_report,
)
from .pog_knapsack import solve_curve
from .synthetic import random_bay_problem

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV: str = "BAYPLAN_OUTPUT_DIR"
EXIT_INVALID_INPUT: int = 1
EXIT_INFEASIBLE: int = 2
EXIT_OTHER: int = 3


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with the invalid-input exit code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID_INPUT, f"{self.prog}: error: {message}\n")


def _scenario_overrides(args: argparse.Namespace) -> List[str]:
    # --weights and --unit are applied last so they win over --set
    overrides = list(args.set or [])
    if args.weights is not None:
        for name, value in zip(("sales", "margin", "units", "similarity"), args.weights):
            overrides.append(f"weights.{name}={value}")
    if args.unit is not None:
        overrides.append(f"inches_per_unit={args.unit}")
    return overrides


def _add_scenario_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--scenario", required=True, help="Scenario YAML file.")
    parser.add_argument("--items", required=True, help="Items CSV file.")
    parser.add_argument("--pogs", default=None, help="POGs CSV file (optional).")
    parser.add_argument(
        "--weights", nargs=4, type=float, metavar=("SALES", "MARGIN", "UNITS", "SIMILARITY"),
        help="Objective weights, overriding the scenario file.",
    )
    parser.add_argument("--unit", type=float, default=None, help="Inches per capacity unit.")


def _add_override_argument(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--set", action="append", metavar="KEY=VALUE",
        help="Override a config value with dot notation, e.g. --set weights.margin=2. Repeatable.",
    )


def _cmd_optimize(args: argparse.Namespace) -> int:
    scenario = ingest(args.items, args.pogs, args.scenario, _scenario_overrides(args))
    report = run_scenario(scenario)
    out = args.out
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{scenario.department_id}_plan.json")
    if out is not None:
        write_report(report, out)
        logger.info("wrote %s", out)
    sys.stdout.write(format_report(report))
    return 0


def _cmd_curve(args: argparse.Namespace) -> int:
    scenario = ingest(args.items, args.pogs, args.scenario, _scenario_overrides(args))
    curve = solve_curve(scenario.pog(args.pog), scenario.weights)
    sys.stdout.write(format_curve(curve))
    return 0


def _cmd_bays(args: argparse.Namespace) -> int:
    problem, solver = load_bay_problem(args.problem, args.set or [])
    allocation = solver(problem)
    if args.out is not None:
        with open(args.out, "w") as handle:
            yaml.safe_dump(allocation.to_dict(), handle, sort_keys=True)
    sys.stdout.write(format_allocation(allocation))
    return 0


def _cmd_emit_lp(args: argparse.Namespace) -> int:
    problem, _ = load_bay_problem(args.problem, args.set or [])
    text = emit_standard_form(problem)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as handle:
            handle.write(text)
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    sys.stdout.write(format_summary(summarize_runs(load_reports(args.reports))))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = ingest(args.items, args.pogs, args.scenario, _scenario_overrides(args))
    items = sum(len(pog.items) for pog in scenario.pogs)
    sys.stdout.write(f"department {scenario.department_id}: {len(scenario.pogs)} pogs, {items} items, ok\n")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    problem = random_bay_problem(rng, max_pogs=args.pogs, max_choices=args.choices, concave=not args.nonconcave)
    text = yaml.safe_dump(bay_problem_to_dict(problem), sort_keys=True)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as handle:
            handle.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="bayplan", allow_abbrev=False, description="Retail space planning.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging.")
    commands = parser.add_subparsers(dest="command", required=True)

    optimize = commands.add_parser("optimize", help="Plan a department end to end.")
    _add_scenario_arguments(optimize)
    _add_override_argument(optimize)
    optimize.add_argument("--out", default=None, help=f"JSON report path (default: ${OUTPUT_DIR_ENV}/<department>_plan.json).")
    optimize.set_defaults(handler=_cmd_optimize)

    curve = commands.add_parser("curve", help="Print the value curve of one POG.")
    _add_scenario_arguments(curve)
    _add_override_argument(curve)
    curve.add_argument("--pog", required=True, help="POG id.")
    curve.set_defaults(handler=_cmd_curve)

    bays = commands.add_parser("bays", help="Solve a standalone bay allocation problem.")
    bays.add_argument("problem", help="Bay-problem YAML file.")
    _add_override_argument(bays)
    bays.add_argument("--out", default=None, help="Write the allocation as YAML.")
    bays.set_defaults(handler=_cmd_bays)

    emit = commands.add_parser("emit-lp", help="Write a bay problem as a CPLEX LP file.")
    emit.add_argument("problem", help="Bay-problem YAML file.")
    _add_override_argument(emit)
    emit.add_argument("--out", default=None, help="LP file path (default: stdout).")
    emit.set_defaults(handler=_cmd_emit_lp)

    summarize = commands.add_parser("summarize", help="Mean ± sd of lifts over saved reports.")
    summarize.add_argument("reports", help="Directory of JSON reports.")
    summarize.set_defaults(handler=_cmd_summarize)

    validate = commands.add_parser("validate", help="Check scenario inputs without solving.")
    _add_scenario_arguments(validate)
    _add_override_argument(validate)
    validate.set_defaults(handler=_cmd_validate)

    generate = commands.add_parser("generate", help="Write a random bay problem.")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--pogs", type=int, default=4, help="Maximum number of POGs.")
    generate.add_argument("--choices", type=int, default=5, help="Maximum grid points per POG.")
    generate.add_argument("--nonconcave", action="store_true", help="Allow non-concave value tables.")
    generate.add_argument("--out", default=None)
    generate.set_defaults(handler=_cmd_generate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as err:
        # --help and --version exit 0, usage errors EXIT_INVALID_INPUT
        return err.code if isinstance(err.code, int) else EXIT_INVALID_INPUT
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        return args.handler(args)
    except Infeasible as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_INFEASIBLE
    except InvalidInput as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_INVALID_INPUT
    except BayplanError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_OTHER
    except Exception as err:
        logger.debug("unexpected failure in %s", args.command, exc_info=True)
        sys.stderr.write(f"error: {type(err).__name__}: {err}\n")
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
