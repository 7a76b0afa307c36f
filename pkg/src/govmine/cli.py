"""Command-line entry point: govmine <stage> --config ... --run-dir ..."""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .pipeline.manifest import PreconditionError
from .pipeline.stages import STAGES, run_all, run_stage

EXIT_OK = 0
EXIT_PRECONDITION = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="govmine",
        description="Mine governed activities and policy internalization from mailing lists.",
    )
    parser.add_argument("stage", choices=STAGES + ["all"], help="pipeline stage to run")
    parser.add_argument("--config", required=True, help="TOML or JSON config file")
    parser.add_argument("--run-dir", required=True, help="artifact directory for this run")
    parser.add_argument(
        "--policy-mode", choices=["full", "reduced"], default=None,
        help="override [policy].mode from the config",
    )
    parser.add_argument(
        "--providers", choices=["fallback", "remote"], default=None,
        help="override [providers].mode from the config",
    )
    parser.add_argument(
        "--baseline-run", default=None,
        help="baseline run directory for the report stage's comparison table",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.policy_mode is not None:
            cfg.policy.mode = args.policy_mode
        if args.providers is not None:
            cfg.providers.mode = args.providers
        if args.stage == "all":
            counts = run_all(cfg, args.run_dir, args.baseline_run)
        else:
            counts = run_stage(args.stage, cfg, args.run_dir, args.baseline_run)
    except (PreconditionError, FileNotFoundError, ValueError) as exc:
        print(f"govmine: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(f"govmine {args.stage}: {counts}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
