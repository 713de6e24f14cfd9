"""Shared CLI plumbing: environment, logging, defaults, exit codes and seeds."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, NoReturn

import numpy as np
from dotenv import load_dotenv

from src.adapters.filesystem_adapter import FileSystemAdapter

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

DEFAULTS_PATH = Path(__file__).resolve().parents[2] / "config" / "lpcmci_defaults.yaml"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class UsageError(Exception):
    """Invalid command line; reported with exit code 1."""


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with code 2."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def configure_runtime(verbose: bool = False) -> None:
    """Load .env and configure the root logger once.

    --verbose wins over LPCMCI_LOG_LEVEL, which wins over the WARNING default.
    """
    load_dotenv()
    level_name = "DEBUG" if verbose else os.environ.get("LPCMCI_LOG_LEVEL", "WARNING").upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        level = logging.WARNING
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    root.setLevel(level)


def load_defaults(path: str | None = None) -> dict[str, Any]:
    """Defaults from the given file, LPCMCI_CONFIG, or the shipped YAML (missing: empty)."""
    chosen = path or os.environ.get("LPCMCI_CONFIG")
    adapter = FileSystemAdapter()
    if chosen:
        return adapter.load_config(chosen)
    if DEFAULTS_PATH.exists():
        return adapter.load_yaml(DEFAULTS_PATH)
    return {}


def resolve_seed(seed: int | None) -> int:
    """The given seed, or a fresh one announced on stderr."""
    if seed is not None:
        return seed
    fresh = int(np.random.SeedSequence().generate_state(1)[0])
    print(f"Using generated seed {fresh}", file=sys.stderr)
    return fresh


def fail(message: str, code: int = EXIT_RUNTIME) -> int:
    print(f"Error: {message}", file=sys.stderr)
    return code


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--verbose", "-v", action="store_true", help="Log at DEBUG level")
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="Defaults file (YAML or JSON; default: $LPCMCI_CONFIG or config/lpcmci_defaults.yaml)",
    )
