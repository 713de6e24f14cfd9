#!/usr/bin/env python3
"""Acceptance Gates - Run the LPCMCI acceptance checks and save a JSON report.

Usage:
    python scripts/run_acceptance.py                 # quick sizes
    python scripts/run_acceptance.py --full --jobs 8 # acceptance sizes
    python scripts/run_acceptance.py --only oracle majority
"""

import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.core.acceptance_gates import GateStatus, create_default_runner  # noqa: E402

STATUS_ICONS = {
    GateStatus.PASS: "[OK]",
    GateStatus.FAIL: "[FAIL]",
    GateStatus.WARN: "[WARN]",
    GateStatus.SKIP: "[SKIP]",
    GateStatus.ERROR: "[ERR]",
}


def main() -> int:
    parser = argparse.ArgumentParser(description="Run LPCMCI acceptance gates")
    parser.add_argument("--full", action="store_true", help="Use the full acceptance sizes")
    parser.add_argument("--seed", type=int, default=0, help="Seed for random models and data")
    parser.add_argument("--jobs", "-j", type=int, default=1, help="Parallel replication workers")
    parser.add_argument("--only", nargs="+", default=None, help="Run only these gates")
    parser.add_argument("--artifacts", default="artifacts", help="Report directory")
    parser.add_argument("--verbose", "-v", action="store_true", help="INFO logging")
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    runner = create_default_runner(
        full=args.full, seed=args.seed, jobs=args.jobs, artifacts_dir=args.artifacts
    )
    try:
        report = runner.run_and_save(
            metadata={"project": "lpcmci-engine", "full": args.full, "seed": args.seed},
            only=args.only,
        )
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    print(f"\nAcceptance Gates: {report.overall_status.value}")
    print(f"Summary: {report.summary}")
    for gate in report.gates:
        print(f"  {STATUS_ICONS.get(gate.status, '[?]')} {gate.name}: {gate.message}")
    return 0 if report.overall_status != GateStatus.FAIL else 1


if __name__ == "__main__":
    sys.exit(main())
