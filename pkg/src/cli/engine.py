#!/usr/bin/env python3
"""LPCMCI engine - one command line for all subcommands.

Usage:
    lpcmci simulate ...
    lpcmci discover ...
    lpcmci oracle-check ...
    lpcmci benchmark ...

Run `lpcmci <subcommand> --help` for the flags of each subcommand.
"""

from __future__ import annotations

import sys
from collections.abc import Callable

from src.cli import benchmark, discover, oracle_check, simulate
from src.cli.common import EXIT_OK, EXIT_USAGE, fail

SUBCOMMANDS: dict[str, Callable[[list[str] | None], int]] = {
    "simulate": simulate.main,
    "discover": discover.main,
    "oracle-check": oracle_check.main,
    "benchmark": benchmark.main,
}


def main(args: list[str] | None = None) -> int:
    """Dispatch to a subcommand.

    Returns:
        The subcommand's exit code, or 1 for an unknown subcommand
    """
    argv = list(sys.argv[1:] if args is None else args)
    if not argv:
        print(__doc__, file=sys.stderr)
        return EXIT_USAGE
    if argv[0] in ("-h", "--help"):
        print(__doc__)
        return EXIT_OK
    command, rest = argv[0], argv[1:]
    if command not in SUBCOMMANDS:
        return fail(
            f"unknown subcommand '{command}'; expected one of {', '.join(SUBCOMMANDS)}", EXIT_USAGE
        )
    return SUBCOMMANDS[command](rest)


def run() -> None:
    """Console script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
