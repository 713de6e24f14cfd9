#!/usr/bin/env python3
"""Oracle Check CLI - Run LPCMCI with perfect CI decisions and compare to the true PAG.

Usage:
    lpcmci oracle-check model.json --tau-max 2 --k 2
    lpcmci oracle-check --batch 200 --seed 0

Examples:
    # Compare against a hand-edited expected graph
    lpcmci oracle-check model.json --expected expected_pag.json

    # Validate the intermediate graphs as well
    lpcmci oracle-check model.json --validate-steps
"""

from __future__ import annotations

import argparse
import json
import sys

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
    resolve_seed,
)
from src.core.services.oracle_check_service import (
    OracleCheckRequest,
    create_oracle_check_service,
    random_check_models,
)
from src.core.services.simulation_service import StationarityRejectionError


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = CliParser(
        prog="lpcmci oracle-check",
        description="Check LPCMCI's oracle output against the true PAG",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument("model", type=str, nargs="?", default=None, help="Model JSON")
    parser.add_argument("--tau-max", type=int, default=2, help="Maximum lag (default: 2)")
    parser.add_argument("--k", type=int, default=0, help="Preliminary iterations (default: 0)")
    parser.add_argument("--expected", type=str, default=None, help="Expected Graph JSON")
    parser.add_argument("--batch", type=int, default=None, help="Check N random models instead")
    parser.add_argument("--seed", type=int, default=None, help="Seed of the random batch")
    parser.add_argument(
        "--validate-steps", action="store_true", help="Validate the graph after every step"
    )
    add_common_flags(parser)
    return parser


def main(args: list[str] | None = None) -> int:
    """Main entry point.

    Returns:
        Exit code (0 all PASS, 1 usage error, 2 FAIL or runtime failure)
    """
    try:
        parsed = create_parser().parse_args(args)
        configure_runtime(parsed.verbose)
        if (parsed.model is None) == (parsed.batch is None):
            raise UsageError("give either a model file or --batch N")
        if parsed.batch is not None and parsed.batch < 1:
            raise UsageError(f"--batch must be positive. Got: {parsed.batch}")
        if parsed.expected and parsed.batch is not None:
            raise UsageError("--expected needs a single model")
        if parsed.tau_max < 0 or parsed.k < 0:
            raise UsageError("--tau-max and --k must be non-negative")
    except UsageError as e:
        return fail(str(e), EXIT_USAGE)

    adapter = FileSystemAdapter()
    try:
        if parsed.batch is not None:
            models = random_check_models(parsed.batch, resolve_seed(parsed.seed))
        else:
            models = [adapter.load_model(parsed.model)]
        expected = adapter.load_graph(parsed.expected) if parsed.expected else None
        request = OracleCheckRequest(
            models=tuple(models),
            tau_max=parsed.tau_max,
            k=parsed.k,
            expected=expected,
            validate_steps=parsed.validate_steps,
        )
        response = create_oracle_check_service().check(request)
    except (ConfigurationError, FileNotFoundError, StationarityRejectionError, ValueError) as e:
        return fail(str(e))

    for check in response.checks:
        if check.passed:
            continue
        print(f"FAIL model {check.index}")
        for line in check.diff:
            print(f"  {line}")
        for line in check.step_violations:
            print(f"  {line}")
    verdict = "PASS" if response.all_passed else "FAIL"
    print(f"{verdict} {response.n_passed}/{len(response.checks)}")
    if parsed.verbose:
        print(json.dumps(response.to_dict(), indent=2))
    return EXIT_OK if response.all_passed else EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
