#!/usr/bin/env python3
"""
cylgreen - fields of electric dipoles in cylindrically layered uniaxial media.
Main entry point for the command-line interface.
"""

import argparse
import asyncio
import json
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config.constants import EXIT_ALL_FAILED, EXIT_SCHEMA_ERROR, EXIT_SUCCESS
from src.config.settings import settings
from src.core.compare import MismatchedGrids, compare_files
from src.core.output import write_results
from src.core.runner import BatchRunner
from src.models.scenario import ScenarioError, load_scenario
from src.solver.errors import InvalidStack
from src.utils.logger import configure_logging, get_logger

logger = get_logger("main")

VERSION = "0.1.0"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cylgreen",
        description="Dipole fields in cylindrically stratified doubly-uniaxial media",
    )
    parser.add_argument("--verbose", action="store_true", help="Enable debug logging")
    parser.add_argument("--log-file", type=Path, default=None, help="Also write log records to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Spectral evaluation of a scenario")
    oracle = commands.add_parser("oracle", help="Closed-form evaluation of a scenario")
    for sub in (solve, oracle):
        sub.add_argument("scenario", type=Path, help="Scenario file (JSON)")
        sub.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")
        sub.add_argument("--format", choices=["csv", "json"], default=None)
        sub.add_argument("--threads", type=int, default=None, help="Receiver worker count")
        sub.add_argument("--convention", choices=["plus", "minus"], default=None)

    compare = commands.add_parser("compare", help="Compare two result files")
    compare.add_argument("a", type=Path, help="Reference result file")
    compare.add_argument("b", type=Path, help="Result file under test")
    compare.add_argument("--mode", choices=["db", "magdiff"], default="db")
    compare.add_argument(
        "--component", default=None, help="Component (db: E_z default; magdiff: H default)"
    )
    return parser


async def run_batch(args: argparse.Namespace, mode: str) -> int:
    """Run `solve` or `oracle`; returns the process exit code."""
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as e:
        logger.error("scenario_invalid", path=str(args.scenario), error=str(e), details=e.details)
        for line in e.details:
            print(f"{args.scenario}: {line}", file=sys.stderr)
        return EXIT_SCHEMA_ERROR

    if args.threads is not None and args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return EXIT_SCHEMA_ERROR

    try:
        runner = BatchRunner(scenario, threads=args.threads, mode=mode)
    except InvalidStack as e:
        logger.error("stack_invalid", path=str(args.scenario), error=str(e))
        print(f"{args.scenario}: {e}", file=sys.stderr)
        return EXIT_SCHEMA_ERROR

    batch = await runner.run()

    text = write_results(batch, args.out, args.format, args.convention)
    if args.out is None:
        sys.stdout.write(text)

    if batch.all_failed:
        logger.error("all_receivers_failed", receivers=len(batch.receivers))
        return EXIT_ALL_FAILED
    return EXIT_SUCCESS


def run_compare(args: argparse.Namespace) -> int:
    try:
        report = compare_files(args.a, args.b, args.mode, args.component)
    except (MismatchedGrids, ValueError, KeyError, OSError) as e:
        logger.error("compare_failed", error=str(e), error_type=type(e).__name__)
        print(f"compare: {e}", file=sys.stderr)
        return EXIT_SCHEMA_ERROR
    sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_SUCCESS


async def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)

    # Configure logging
    log_level = "DEBUG" if args.verbose else settings.log_level
    global logger
    logger = configure_logging(log_level=log_level, log_file=args.log_file, pretty_console=True)

    logger.debug("cylgreen_starting", command=args.command, version=VERSION)

    try:
        if args.command == "compare":
            return run_compare(args)
        return await run_batch(args, "oracle" if args.command == "oracle" else "solve")

    except KeyboardInterrupt:
        logger.info("cylgreen_interrupted")
        return EXIT_SUCCESS

    except Exception as e:
        logger.error("cylgreen_failed", error=str(e), error_type=type(e).__name__)
        raise


def run() -> None:
    """Console-script entry."""
    sys.exit(asyncio.run(main()))


if __name__ == "__main__":
    run()
