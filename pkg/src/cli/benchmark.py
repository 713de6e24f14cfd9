#!/usr/bin/env python3
"""Benchmark CLI - Run an experiment grid and write the report.

Usage:
    lpcmci benchmark config/experiments/confounder_example.yaml --seed 0 --out report.json

Examples:
    # Eight workers, CSV table next to the JSON report
    lpcmci benchmark experiment.yaml --seed 11 --jobs 8 --out report.json --csv table.csv

    # Quick run with fewer replications
    lpcmci benchmark experiment.yaml --seed 11 --reps 5
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from src.adapters.filesystem_adapter import ConfigurationError, FileSystemAdapter
from src.cli.common import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    CliParser,
    UsageError,
    add_common_flags,
    configure_runtime,
    fail,
    load_defaults,
)
from src.core.domain.experiment_config import ExperimentConfig
from src.core.services.benchmark_service import BenchmarkRequest, create_benchmark_service


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = CliParser(
        prog="lpcmci benchmark",
        description="Run a replicated method comparison",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument("experiment", type=str, help="Experiment YAML or JSON")
    parser.add_argument("--seed", type=int, required=True, help="Seed of the first replication")
    parser.add_argument("--jobs", "-j", type=int, default=None, help="Parallel workers (-1: all)")
    parser.add_argument("--reps", type=int, default=None, help="Override the replication count")
    parser.add_argument("--out", "-o", type=str, default=None, help="Report JSON output path")
    parser.add_argument("--csv", type=str, default=None, help="Table CSV output path")
    add_common_flags(parser)
    return parser


def main(args: list[str] | None = None) -> int:
    """Main entry point.

    Returns:
        Exit code (0 success, 1 usage error, 2 failed cells or runtime failure)
    """
    adapter = FileSystemAdapter()
    try:
        parsed = create_parser().parse_args(args)
        configure_runtime(parsed.verbose)
        defaults = load_defaults(parsed.config).get("benchmark", {})
        jobs = parsed.jobs if parsed.jobs is not None else int(defaults.get("jobs", 1))
        data = adapter.load_config(parsed.experiment)
        experiment = ExperimentConfig.from_dict(
            {"max_failure_rate": defaults.get("max_failure_rate", 0.1), **data}
        )
        experiment = replace(experiment, seed_base=parsed.seed)
        if parsed.reps is not None:
            experiment = replace(experiment, reps=parsed.reps)
        request = BenchmarkRequest(experiment, jobs)
    except (UsageError, ValueError) as e:
        return fail(str(e), EXIT_USAGE)
    except (ConfigurationError, FileNotFoundError) as e:
        return fail(str(e))

    try:
        response = create_benchmark_service().run(request)
        report = response.report
        if parsed.out:
            adapter.save_json(parsed.out, report.to_dict())
        if parsed.csv:
            adapter.save_csv(parsed.csv, report.to_frame())
    except OSError as e:
        return fail(str(e))

    frame = report.to_frame()
    columns = ["method", "k", "ci", "link_class", "tpr", "fpr", "edgemark_recall", "edgemark_precision"]
    print(frame[columns].to_string(index=False, float_format=lambda v: f"{v:.3f}"))
    print(f"{len(report.cells)} cells in {response.runtime_seconds:.1f}s")
    if report.failed_cells:
        return fail(f"{len(report.failed_cells)} cells exceeded the failure budget", EXIT_RUNTIME)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
