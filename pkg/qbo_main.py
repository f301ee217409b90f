#!/usr/bin/env python3
"""
qbo-bench - Command Line Entry Point

Runs benchmark experiments for quantization-based random search and its
annealing baselines, samples objective grids for plotting and executes the
statistical validation suite.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from src.errors import OutputError, QBOError

logger = logging.getLogger(__name__)

DEFAULT_LOG_FILE = "qbo_bench.log"
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_IO_ERROR = 2
EXIT_INTERRUPTED = 130


def setup_logging(log_file: Optional[str], verbose: bool) -> None:
    """Log to stdout and, unless log_file is empty, to a file"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def run_command(args) -> int:
    """Run an experiment config and write its outputs"""
    from src.harness import ExperimentConfig, run_experiment, write_experiment

    config = ExperimentConfig.from_file(args.config, args.set or [])
    shorthands = {
        "jobs": args.jobs,
        "output_dir": args.output_dir,
        "trace": args.trace,
        "timing": True if args.timing else None,
    }
    config = replace(config, **{k: v for k, v in shorthands.items() if v is not None})
    result = run_experiment(config)
    manifest = write_experiment(result)

    logger.info(f"Results written to {Path(config.output_dir).resolve()} ({len(manifest)} files)")
    for row in result.summary:
        iterations = "-" if row.median_iterations_to_success is None else f"{row.median_iterations_to_success:g}"
        print(
            f"{row.function:<18} {row.algorithm:<4} success {row.successes}/{row.n_seeds}  "
            f"median iterations {iterations:>8}  median improvement {row.median_improvement_ratio:6.2f}%"
        )
    return EXIT_OK


def grid_command(args) -> int:
    """Sample an objective on a grid and emit CSV"""
    from src.harness import grid_sample, render_grid_csv, write_grid_csv
    from src.objectives import get_objective

    objective = get_objective(args.objective, dim=args.dim)
    grid = grid_sample(objective, args.resolution, args.slice)
    if args.output:
        write_grid_csv(grid, args.output)
    else:
        sys.stdout.write(render_grid_csv(grid))
    return EXIT_OK


def validate_command(args) -> int:
    """Run the statistical validation suite"""
    from src.validation import run_validation_suite

    results = run_validation_suite(seed=args.seed, quick=args.quick)
    for result in results:
        print(result)
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Validation failed: {', '.join(failed)}")
        return EXIT_FAILURE
    logger.info("All validation checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='qbo-bench',
        description='Quantization-based random search benchmarks and diagnostics',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s run config/settings.yaml                  # Full benchmark protocol
  %(prog)s run config/smoke.yaml --set n_seeds=3     # Override any config key
  %(prog)s grid drop_wave --resolution 101           # 2-D grid as CSV
  %(prog)s grid schaffer_n2 --resolution 401 --slice y=0
  %(prog)s validate                                  # Statistical checks
        """
    )
    parser.add_argument('--verbose', action='store_true', help='Enable verbose logging')
    parser.add_argument(
        '--log-file',
        default=DEFAULT_LOG_FILE,
        help=f'Log file path, empty to disable (default: {DEFAULT_LOG_FILE})'
    )

    subparsers = parser.add_subparsers(dest='command')

    run_parser = subparsers.add_parser('run', help='Run an experiment config')
    run_parser.add_argument('config', help='YAML experiment config')
    run_parser.add_argument(
        '--set',
        action='append',
        metavar='KEY=VALUE',
        help='Override a config key (repeatable), e.g. sa.alpha=0.99'
    )
    run_parser.add_argument('--jobs', type=int, help='Number of worker threads')
    run_parser.add_argument('--output-dir', help='Output directory')
    run_parser.add_argument(
        '--trace',
        action=argparse.BooleanOptionalAction,
        default=None,
        help='Write one JSONL trace per cell'
    )
    run_parser.add_argument('--timing', action='store_true', help='Record wall_ms in results.csv')
    run_parser.set_defaults(handler=run_command)

    grid_parser = subparsers.add_parser('grid', help='Sample an objective on a grid')
    grid_parser.add_argument('objective', help='Objective name')
    grid_parser.add_argument('--resolution', type=int, required=True, help='Points per axis')
    grid_parser.add_argument('--slice', help='Fix coordinates for a 1-D slice, e.g. y=0')
    grid_parser.add_argument('--dim', type=int, help='Objective dimension')
    grid_parser.add_argument('--output', help='CSV path (default: stdout)')
    grid_parser.set_defaults(handler=grid_command)

    validate_parser = subparsers.add_parser('validate', help='Run the statistical validation suite')
    validate_parser.add_argument('--seed', type=int, default=0, help='Base seed')
    validate_parser.add_argument('--quick', action='store_true', help='Shorter escape-rate experiment')
    validate_parser.set_defaults(handler=validate_command)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not getattr(args, 'command', None):
        parser.print_help()
        return EXIT_OK

    setup_logging(args.log_file, args.verbose)

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_INTERRUPTED
    except OutputError as e:
        logger.error(str(e))
        return EXIT_IO_ERROR
    except QBOError as e:
        logger.error(str(e))
        return EXIT_FAILURE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO_ERROR
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
