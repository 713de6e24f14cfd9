#!/usr/bin/env python3
"""Simulate CLI - Draw a random SVAR model and sample its observed series.

Usage:
    lpcmci simulate --out-data data.csv --out-model model.json --seed 7
    lpcmci simulate --model model.json --T 1000 --out-data data.csv

Examples:
    # Five variables, 30% latent, strong autocorrelation
    lpcmci simulate --n-total 5 --autocorr 0.95 --T 500 --seed 1 --out-data data.csv

    # The three-variable latent confounder example
    lpcmci simulate --example confounder --T 500 --seed 3 --out-data fig.csv --out-model fig.json
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from src.adapters.filesystem_adapter import ConfigurationError, FileSystemAdapter
from src.cli.common import (
    EXIT_OK,
    EXIT_USAGE,
    CliParser,
    UsageError,
    add_common_flags,
    configure_runtime,
    fail,
    load_defaults,
    resolve_seed,
)
from src.core.domain.ground_truth import GroundTruthModel, motivational_model
from src.core.domain.model_config import ModelConfig, ModelKind
from src.core.services.simulation_service import (
    ExplosiveTrajectoryError,
    SimulationRequest,
    StationarityRejectionError,
    create_simulation_service,
)

MODEL_FLAGS = (
    "n_total",
    "n_links",
    "autocorr",
    "contemp_fraction",
    "p_ts",
    "latent_fraction",
    "kind",
    "n_bin",
)


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = CliParser(
        prog="lpcmci simulate",
        description="Draw a random SVAR model and sample observed time series",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--model", type=str, default=None, help="Sample this Model JSON")
    source.add_argument(
        "--example", type=str, choices=["confounder"], default=None, help="Sample a fixed example"
    )
    parser.add_argument("--n-total", type=int, default=None, help="Variables incl. latent ones")
    parser.add_argument("--n-links", type=int, default=None, help="Cross links (default: n-total)")
    parser.add_argument("--autocorr", type=float, default=None, help="Upper autocorrelation a")
    parser.add_argument("--contemp-fraction", type=float, default=None, help="Contemporaneous share")
    parser.add_argument("--p-ts", type=int, default=None, help="Maximum lag of cross links")
    parser.add_argument("--latent-fraction", type=float, default=None, help="Latent share lambda")
    parser.add_argument(
        "--kind", type=str, choices=[k.value for k in ModelKind], default=None, help="Model variant"
    )
    parser.add_argument("--n-bin", type=int, default=None, help="Binomial trials (discrete)")
    parser.add_argument("--T", type=int, default=None, help="Time series length (default: 500)")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default: generated)")
    parser.add_argument("--out-data", type=str, default=None, help="Data CSV output path")
    parser.add_argument("--out-model", type=str, default=None, help="Model JSON output path")
    add_common_flags(parser)
    return parser


def build_model_config(parsed: argparse.Namespace, defaults: dict[str, Any]) -> ModelConfig:
    values = dict(defaults.get("simulate", {}).get("model", {}))
    for name in MODEL_FLAGS:
        value = getattr(parsed, name)
        if value is not None:
            values[name] = value
    return ModelConfig.from_dict(values)


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
        defaults = load_defaults(parsed.config)
        model_config = build_model_config(parsed, defaults)
        T = parsed.T if parsed.T is not None else int(defaults.get("simulate", {}).get("T", 500))
        if T < 1:
            raise UsageError(f"--T must be positive. Got: {T}")
    except (UsageError, ValueError) as e:
        return fail(str(e), EXIT_USAGE)
    except (ConfigurationError, FileNotFoundError) as e:
        return fail(str(e))

    adapter = FileSystemAdapter()
    seed = resolve_seed(parsed.seed)
    try:
        model: GroundTruthModel | None = None
        if parsed.model:
            model = adapter.load_model(parsed.model)
        elif parsed.example == "confounder":
            model = motivational_model()
        response = create_simulation_service().simulate(
            SimulationRequest(T=T, seed=seed, model_config=model_config, model=model)
        )
        if parsed.out_data:
            adapter.save_csv(parsed.out_data, response.data)
        if parsed.out_model:
            adapter.save_model(parsed.out_model, response.model)
    except (
        ConfigurationError,
        FileNotFoundError,
        StationarityRejectionError,
        ExplosiveTrajectoryError,
        ValueError,
        OSError,
    ) as e:
        return fail(str(e))

    print(json.dumps(response.summary(), indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
