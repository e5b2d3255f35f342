# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Command-line entry point: ``python -m stsource <command> ...``."""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from .config import ScenarioConfig
from .errors import NumericalError, ValidationError
from .lmi_design import solution_summary
from .scenarios import (
    PUBLISHED_RMSE,
    Scenario,
    design_scenario,
    reproduce_figures,
    reproduce_table1,
    run_scenario,
    simulate_scenario,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="Directory for the CSV artifacts.")
    common.add_argument("--dt", type=float, default=None, help="Sample period in seconds.")
    common.add_argument("--nodes", type=int, default=None, help="Odd spatial node count.")
    common.add_argument("--pin-gains", default=None, help="JSON gain file to use as is.")
    common.add_argument("--seed", type=int, default=None, help="Seed of the gain search.")

    parser = _Parser(prog="stsource", description="Identify spatio-temporal sources of a PDE.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug output.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings only.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, text in (
        ("simulate", "Run the forward simulation only."),
        ("design", "Solve or load the observer gains and print their certificate."),
        ("identify", "Run the full identification pipeline."),
    ):
        sub = commands.add_parser(name, parents=[common], help=text, description=text)
        sub.add_argument("config", help="TOML scenario file.")

    sub = commands.add_parser(
        "reproduce", parents=[common], help="Rerun the published experiments."
    )
    sub.add_argument("target", choices=("figures", "table1"))
    sub.add_argument("--workers", type=int, default=None, help="Processes for Table I rows.")
    return parser


def _overrides(args) -> dict:
    run = {"out": args.out, "dt": args.dt, "nodes": args.nodes}
    design = {"seed": args.seed}
    if args.pin_gains:
        design.update(gains="pin", pin_file=str(Path(args.pin_gains).resolve()))
    return {
        "run": {k: v for k, v in run.items() if v is not None},
        "design": {k: v for k, v in design.items() if v is not None},
    }


def _scenario(args) -> Scenario:
    config = ScenarioConfig.from_file(args.config, _overrides(args))
    return Scenario.from_config(config, name=Path(args.config).stem)


def _print_paths(paths) -> None:
    for path in paths:
        print(f"Wrote: {path}")


def _simulate(args) -> int:
    sim, paths = simulate_scenario(_scenario(args))
    print(f"simulated {sim.t_grid.size} samples of {sim.y.shape[1]} outputs")
    _print_paths(paths)
    return EXIT_OK


def _design(args) -> int:
    sol, report = design_scenario(_scenario(args))
    for key, value in solution_summary(sol).items():
        print(f"{key:<17}{value: .6e}")
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def _identify(args) -> int:
    outcome = run_scenario(_scenario(args))
    for name, value in outcome.report.rows():
        print(f"{name:<17}{value: .6g}")
    _print_paths(outcome.paths)
    return EXIT_OK


def _reproduce(args) -> int:
    out = Path(args.out or "out")
    dt = args.dt if args.dt is not None else 0.01
    nodes = args.nodes if args.nodes is not None else 201
    if args.target == "figures":
        reports = reproduce_figures(out, dt, nodes)
        for name, report in reports.items():
            print(f"{name:<10} RMSE {report.rmse:.4f} (published {PUBLISHED_RMSE[name]:.4f})")
    else:
        seed = args.seed if args.seed is not None else 0
        rows = reproduce_table1(out, seed=seed, dt=dt, nodes=nodes, workers=args.workers)
        print("(m, n_y)  RMSE    Ideal   published")
        for row in rows:
            published_rmse, published_ideal = row.published
            print(
                f"({row.m}, {row.n_y})    {row.rmse:.4f}  {row.ideal_rmse:.4f}  "
                f"{published_rmse:.4f} / {published_ideal:.4f}"
            )
        print(f"Wrote: {out / 'table1.csv'}")
    return EXIT_OK


COMMANDS = {
    "simulate": _simulate,
    "design": _design,
    "identify": _identify,
    "reproduce": _reproduce,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        logger.error("%s", exc)
        return EXIT_VALIDATION
    except NumericalError as exc:
        logger.error("%s", exc)
        return EXIT_NUMERICAL
