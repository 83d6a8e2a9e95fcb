#!/usr/bin/env python3
"""Main entry point for the divide-and-discard observer experiments."""

import argparse
import sys
from typing import List, Optional

import config
from errors import ObserverError
from services.harness import (
    compare,
    format_table,
    load_scenario,
    records_frame,
    run_repeats,
    sweep,
    with_overrides,
    write_csv,
)
from services.utils import log, set_log_level
from state import ScenarioConfig


def _scenario_from_args(args, mmax: Optional[int] = None) -> ScenarioConfig:
    scenario = load_scenario(args.config, args.preset)
    return with_overrides(
        scenario,
        mmax=mmax,
        seed=args.seed,
        rigorous=args.rigorous,
        repeats=args.repeats,
        horizon=args.horizon,
    )


def log_startup_flags(args) -> None:
    """Log the command and every flag that differs from its default."""
    log(f"Command: {args.command}", node="main")
    flags = []
    if args.config:
        flags.append(f"  --config: {args.config}")
    if args.preset:
        flags.append(f"  --preset: {args.preset}")
    if args.mmax is not None:
        flags.append(f"  --mmax: {args.mmax}")
    if args.seed is not None:
        flags.append(f"  --seed: {args.seed}")
    if args.horizon is not None:
        flags.append(f"  --horizon: {args.horizon}")
    if args.repeats is not None:
        flags.append(f"  --repeats: {args.repeats}")
    if args.rigorous:
        flags.append("  --rigorous: enabled")
    if args.out:
        flags.append(f"  --out: {args.out}")

    if flags:
        for flag in flags:
            log(flag, node="main")
    else:
        log("  (using defaults)", node="main")


def cmd_run(args) -> int:
    """Run one scenario (with repeats) and write one CSV row per step."""
    scenario = _scenario_from_args(args, args.mmax)
    report, records = run_repeats(scenario)
    write_csv(records_frame(records), args.out)
    log(
        f"Summary: v~={report.v_tilde:.4f} w~={report.w_tilde:.4f} "
        f"{report.mean_step_ms:.3f} ms/step sound={report.sound}",
        node="main",
    )
    return 0


def cmd_sweep(args) -> int:
    """Sweep the interval cap and write one aggregated row per value."""
    scenario = _scenario_from_args(args)
    m_max_values = args.mmax or [1, 3, 10, 50, 100, 250]
    frame = sweep(scenario, m_max_values)
    write_csv(frame, args.out)
    return 0


def cmd_compare(args) -> int:
    """Compare interval caps; prints a normalized table and optionally writes CSV."""
    scenario = _scenario_from_args(args)
    frame = compare(scenario, args.mmax)
    print(format_table(frame))
    if args.out:
        write_csv(frame, args.out)
    return 0


def parse_args(argv: Optional[List[str]] = None):
    """Parse command line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        type=str,
        help="YAML scenario file. Values override the preset, flags override the file."
    )
    common.add_argument(
        "--preset",
        type=str,
        choices=sorted(config.SCENARIO_PRESETS),
        help="Built-in scenario preset"
    )
    common.add_argument(
        "--seed",
        type=int,
        help="Truth simulation seed (first seed when --repeats > 1)"
    )
    common.add_argument(
        "--horizon",
        type=int,
        help=f"Number of observer steps N (default: {config.DEFAULT_HORIZON})"
    )
    common.add_argument(
        "--repeats",
        type=int,
        help="Number of runs with consecutive truth seeds"
    )
    common.add_argument(
        "--rigorous",
        action="store_true",
        help="Use outward-rounded interval arithmetic (sound under floating point)"
    )
    common.add_argument(
        "--out",
        type=str,
        help="CSV output path (default: stdout)"
    )
    common.add_argument(
        "--verbose",
        action="store_true",
        help="Log per-step diagnostics (DEBUG level)"
    )

    parser = argparse.ArgumentParser(
        description="Divide-and-discard interval observer - runs, sweeps and comparisons"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", parents=[common], help="Run one scenario")
    run_parser.add_argument("--mmax", type=int, help="Interval cap M_max")
    run_parser.set_defaults(handler=cmd_run)

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Sweep M_max")
    sweep_parser.add_argument(
        "--mmax",
        type=int,
        nargs="+",
        help="Interval caps to sweep (default: 1 3 10 50 100 250)"
    )
    sweep_parser.set_defaults(handler=cmd_sweep)

    compare_parser = subparsers.add_parser("compare", parents=[common],
                                           help="Compare M_max variants")
    compare_parser.add_argument(
        "--mmax",
        type=int,
        nargs="+",
        help="Interval caps to compare (default: 1 and the scenario's M_max)"
    )
    compare_parser.set_defaults(handler=cmd_compare)

    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the observer CLI and return the process exit code."""
    args = parse_args(argv)
    if args.verbose:
        set_log_level("DEBUG")
    log_startup_flags(args)

    try:
        return args.handler(args)
    except ObserverError as e:
        log(f"{type(e).__name__}: {e}", node="main", level="ERROR")
        return e.exit_code
    except KeyboardInterrupt:
        log("Interrupted by user. Exiting...", node="main", level="INFO")
        return 130


if __name__ == "__main__":
    sys.exit(main())
