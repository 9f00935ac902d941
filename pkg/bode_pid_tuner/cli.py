"""Command-line entry point: analyze, tune, simulate, compare and schema subcommands.

Exit codes: 0 on success, 1 for any tuning or I/O error (one-line diagnostic on
stderr), 2 for argument errors. JSON documents go to the given files or to
stdout; logs and the comparison table go to stderr.
"""

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.table import Table

from .logging_conf import configure_logging, set_level
from .models import DeadTimePlant, DesignSpec, GaConfig, PidController, SimConfig, TuneMethod
from .pipelines import TuneOutcome, TuningPipeline
from .storage_utils import load_document, save_json, save_step_csv, write_text

logger = configure_logging("bode-pid-tuner.cli")

SCHEMA_RESOURCE = "tune_report.schema.json"


def _add_sim_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sim-config", type=Path, help="JSON/YAML file with dt, horizon, deriv_filter_n")
    parser.add_argument("--dt", type=float, help="Simulation step in seconds (default 0.01)")
    parser.add_argument("--horizon", type=float, help="Simulation horizon in seconds (default 60)")
    parser.add_argument("--deriv-filter-n", type=float, help="Derivative filter coefficient N (default 100)")


def _add_tuning_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--plant", type=Path, required=True, help="Plant document {num, den, delay}")
    parser.add_argument("--spec", type=Path, required=True, help="Spec document {wc, pm_deg, psi_deg}")
    parser.add_argument("--pade-order", type=int, default=1, help="Padé order for the pade pipeline (default 1)")
    parser.add_argument("--ga-config", type=Path, help="GA settings document")
    parser.add_argument("--seed", type=int, help="GA random seed")
    parser.add_argument("--generations", type=int, help="GA generation count")
    _add_sim_arguments(parser)


def _tune_method(value: str) -> TuneMethod:
    try:
        return TuneMethod.from_string(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bode-pid-tuner",
        description="PID tuning for delayed plants from Bode-integral slope estimates",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="Frequency point and slope estimates at a frequency")
    analyze.add_argument("--plant", type=Path, required=True)
    analyze.add_argument("--wc", type=float, required=True, help="Analysis frequency in rad/s")
    analyze.add_argument("--pade-order", type=int, default=1)
    analyze.add_argument("--out", type=Path, help="Write JSON here instead of stdout")

    tune = commands.add_parser("tune", help="Run one tuning pipeline and write its report")
    tune.add_argument("--method", type=_tune_method, required=True, help="bode-delay, pade or ga")
    _add_tuning_arguments(tune)
    tune.add_argument("--out", type=Path, required=True, help="Report JSON path")
    tune.add_argument("--csv", type=Path, help="Step response CSV path")
    tune.add_argument("--controller-out", type=Path, help="Controller JSON path")

    simulate = commands.add_parser("simulate", help="Closed-loop step of a given controller")
    simulate.add_argument("--plant", type=Path, required=True)
    simulate.add_argument("--controller", type=Path, required=True, help="Controller or tune report document")
    simulate.add_argument("--out", type=Path, required=True, help="Step response CSV path")
    simulate.add_argument("--svg", type=Path, help="Also write a chart of y(t)")
    _add_sim_arguments(simulate)

    compare = commands.add_parser("compare", help="Run all three pipelines side by side")
    _add_tuning_arguments(compare)
    compare.add_argument("--out", type=Path, required=True, help="Comparison JSON path")
    compare.add_argument("--csv-dir", type=Path, help="Directory for per-method step CSVs")
    compare.add_argument("--svg", type=Path, help="Also write a chart overlaying all methods")

    schema = commands.add_parser("schema", help="Print the JSON schema of tune reports")
    schema.add_argument("--out", type=Path, help="Write the schema here instead of stdout")
    return parser


def _sim_config(args: argparse.Namespace) -> SimConfig:
    data: Dict[str, Any] = load_document(args.sim_config) if args.sim_config else {}
    for key in ("dt", "horizon", "deriv_filter_n"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    return SimConfig.from_dict(data)


def _ga_config(args: argparse.Namespace) -> GaConfig:
    data: Dict[str, Any] = load_document(args.ga_config) if args.ga_config else {}
    if args.seed is not None:
        data["seed"] = args.seed
    if args.generations is not None:
        data["generations"] = args.generations
    return GaConfig.from_dict(data)


def _emit(document: Dict[str, Any], out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(json.dumps(document, indent=2, ensure_ascii=False, allow_nan=False) + "\n")
    else:
        save_json(out, document)


def _format(value: Optional[float], digits: int = 4) -> str:
    return "-" if value is None else f"{value:.{digits}g}"


def _comparison_table(outcomes: Dict[TuneMethod, TuneOutcome]) -> Table:
    table = Table(title="Tuning comparison")
    for column in ("method", "Kp", "Ti", "Td", "PM [deg]", "slope error", "ITAE", "overshoot", "settling [s]"):
        table.add_column(column, justify="left" if column == "method" else "right")
    for method, outcome in outcomes.items():
        document = outcome.report.to_dict()
        controller, design, metrics = document["controller"], document["design"], document["metrics"]
        table.add_row(
            method.value,
            _format(controller["kp"]),
            _format(controller["ti"]),
            _format(controller["td"]),
            _format(design["achieved_pm_deg"], 3),
            f"{design['slope_error_fraction']:.1%}",
            _format(metrics["itae"]),
            _format(metrics["overshoot"], 3),
            _format(metrics["settling_time_2pct"], 3),
        )
    return table


def _cmd_analyze(args: argparse.Namespace) -> None:
    plant = DeadTimePlant.from_dict(load_document(args.plant))
    _emit(TuningPipeline.analyze(plant, args.wc, args.pade_order), args.out)


def _cmd_tune(args: argparse.Namespace) -> None:
    method = args.method
    plant = DeadTimePlant.from_dict(load_document(args.plant))
    spec = DesignSpec.from_dict(load_document(args.spec))
    ga_config = _ga_config(args) if method == TuneMethod.GA else None
    outcome = TuningPipeline.tune(method, plant, spec, _sim_config(args), args.pade_order, ga_config)

    save_json(args.out, outcome.report.to_dict())
    if args.csv:
        save_step_csv(args.csv, outcome.step)
    if args.controller_out:
        save_json(args.controller_out, outcome.report.controller.to_dict(include_parallel=True))
    logger.info("Wrote %s report to %s", method.value, args.out)


def _cmd_simulate(args: argparse.Namespace) -> None:
    plant = DeadTimePlant.from_dict(load_document(args.plant))
    controller = PidController.from_dict(load_document(args.controller))
    result = TuningPipeline.simulate(plant, controller, _sim_config(args))
    save_step_csv(args.out, result)
    if args.svg:
        from .plotting import step_chart_svg

        write_text(args.svg, step_chart_svg({"closed loop": result}))
    if result.diverged:
        logger.warning("Simulation diverged; CSV holds the samples up to divergence")


def _cmd_compare(args: argparse.Namespace) -> None:
    plant = DeadTimePlant.from_dict(load_document(args.plant))
    spec = DesignSpec.from_dict(load_document(args.spec))
    outcomes = TuningPipeline.compare(plant, spec, _sim_config(args), args.pade_order, _ga_config(args))

    save_json(args.out, TuningPipeline.comparison_document(outcomes))
    if args.csv_dir:
        for method, outcome in outcomes.items():
            save_step_csv(args.csv_dir / f"{method.value}.csv", outcome.step)
    if args.svg:
        from .plotting import step_chart_svg

        write_text(args.svg, step_chart_svg({m.value: o.step for m, o in outcomes.items()}))
    Console(stderr=True).print(_comparison_table(outcomes))


def schema_text() -> str:
    """The published tune-report JSON schema shipped with the package."""
    return resources.files("bode_pid_tuner").joinpath("schemas", SCHEMA_RESOURCE).read_text(encoding="utf-8")


def _cmd_schema(args: argparse.Namespace) -> None:
    if args.out:
        write_text(args.out, schema_text())
    else:
        sys.stdout.write(schema_text())


COMMANDS = {
    "analyze": _cmd_analyze,
    "tune": _cmd_tune,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "schema": _cmd_schema,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    if args.verbose:
        set_level(logging.DEBUG)
    elif args.quiet:
        set_level(logging.WARNING)

    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        sys.stderr.write("error: " + " ".join(str(e).split()) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
