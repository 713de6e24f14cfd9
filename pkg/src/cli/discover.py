#!/usr/bin/env python3
"""Discover CLI - Estimate a time series PAG from a data CSV.

Usage:
    lpcmci discover data.csv --out graph.json
    lpcmci discover data.csv --method svarfci --alpha 0.05 --tau-max 3

Examples:
    # LPCMCI with four preliminary iterations
    lpcmci discover data.csv --k 4 --tau-max 2 --out graph.json

    # Discrete data with the G-test and a CI trace
    lpcmci discover counts.csv --ci gtest --trace trace.jsonl
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from src.adapters.filesystem_adapter import ConfigurationError, DataValidationError, FileSystemAdapter
from src.adapters.gtest_adapter import GTestAdapter
from src.adapters.parcorr_adapter import ParCorrAdapter
from src.adapters.trace_adapter import TraceRecorder
from src.cli.common import (
    EXIT_OK,
    EXIT_USAGE,
    CliParser,
    UsageError,
    add_common_flags,
    configure_runtime,
    fail,
    load_defaults,
)
from src.core.domain.discovery_config import DiscoveryConfig, Method
from src.core.ports.ci_port import CITestError
from src.core.services.discovery_service import DiscoveryRequest, create_discovery_service

MIN_EXTRA_SAMPLES = 10


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = CliParser(
        prog="lpcmci discover",
        description="Estimate a time series PAG from data",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument("data", type=str, help="Data CSV with header row X0..X{N-1}")
    parser.add_argument(
        "--method",
        type=str,
        choices=[m.value for m in Method],
        default=Method.LPCMCI.value,
        help="Discovery method (default: lpcmci)",
    )
    parser.add_argument(
        "--ci", type=str, choices=["parcorr", "gtest"], default="parcorr", help="CI test"
    )
    parser.add_argument("--alpha", type=float, default=None, help="Significance level")
    parser.add_argument("--tau-max", type=int, default=None, help="Maximum lag")
    parser.add_argument("--k", type=int, default=None, help="Preliminary ancestral iterations")
    parser.add_argument(
        "--max-cond", type=int, default=None, help="Conditioning cap of the non-ancestral phase"
    )
    parser.add_argument(
        "--max-cond-ancestral", type=int, default=None, help="Conditioning cap of the ancestral phase"
    )
    parser.add_argument(
        "--sepset-rule",
        type=str,
        choices=["standard", "majority"],
        default=None,
        help="Collider rule of the SVAR-FCI baselines",
    )
    parser.add_argument("--out", "-o", type=str, default=None, help="Graph JSON output path")
    parser.add_argument("--trace", type=str, default=None, help="JSON-lines CI trace output path")
    add_common_flags(parser)
    return parser


def build_config(parsed: argparse.Namespace, defaults: dict[str, Any]) -> DiscoveryConfig:
    """Flags override the defaults file."""
    values = dict(defaults.get("discovery", {}))
    for flag, name in (
        ("alpha", "alpha"),
        ("tau_max", "tau_max"),
        ("k", "k"),
        ("max_cond", "max_cond_nonancestral"),
        ("max_cond_ancestral", "max_cond_ancestral"),
        ("sepset_rule", "sepset_rule"),
    ):
        value = getattr(parsed, flag)
        if value is not None:
            values[name] = value
    return DiscoveryConfig.from_dict(values)


def main(args: list[str] | None = None) -> int:
    """Main entry point.

    Args:
        args: Command line arguments

    Returns:
        Exit code (0 success, 1 usage error, 2 runtime failure)
    """
    try:
        parsed = create_parser().parse_args(args)
        configure_runtime(parsed.verbose)
        config = build_config(parsed, load_defaults(parsed.config))
    except (UsageError, ValueError) as e:
        return fail(str(e), EXIT_USAGE)
    except (ConfigurationError, FileNotFoundError) as e:
        return fail(str(e))

    adapter = FileSystemAdapter()
    try:
        data = adapter.load_csv(parsed.data)
    except (DataValidationError, FileNotFoundError) as e:
        return fail(str(e))
    n_samples, n_vars = data.shape
    if n_samples <= config.tau_max + MIN_EXTRA_SAMPLES:
        return fail(
            f"{n_samples} time steps are too few for tau_max={config.tau_max}; "
            f"need more than {config.tau_max + MIN_EXTRA_SAMPLES}"
        )

    try:
        ci = ParCorrAdapter(data) if parsed.ci == "parcorr" else GTestAdapter(data)
        with TraceRecorder(parsed.trace) as trace:
            service = create_discovery_service(ci, trace if parsed.trace else None)
            response = service.discover(DiscoveryRequest(n_vars, config, Method(parsed.method)))
        if parsed.out:
            adapter.save_graph(parsed.out, response.graph)
    except (CITestError, ValueError, OSError) as e:
        return fail(str(e))

    summary = {"data": parsed.data, "columns": list(map(str, data.columns)), **response.summary()}
    print(json.dumps(summary, indent=2))
    for warning in response.warnings:
        print(f"Warning: {warning}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
