"""Command-line entry point: `d2dsim run --preset <name> --out <dir> ...`."""

import argparse
import sys
from dataclasses import replace

from d2dsim.config import ConfigError, RadioConfig, SimulationPlan, load_config
from d2dsim.harness import PRESETS, run_preset


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="d2dsim")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment preset")
    run.add_argument("--config", help="key = value config file (defaults apply if omitted)")
    run.add_argument("--preset", required=True, choices=PRESETS)
    run.add_argument("--out", required=True, help="output directory for CSV files")
    run.add_argument("--seed", type=int, help="override the plan seed")
    run.add_argument("--mode", choices=("sbrra", "hmm"), help="override the allocation mode")
    run.add_argument("--no-sector", action="store_true", help="disable the sector filter")
    run.add_argument("--replications", type=int, help="override the replication count")
    run.add_argument("--jobs", type=int, default=1, help="thread count for replications")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg, plan = load_config(args.config)
        else:
            cfg, plan = RadioConfig(), SimulationPlan()
        if args.seed is not None:
            plan = replace(plan, seed=args.seed)
        if args.mode is not None:
            plan = replace(plan, mode=args.mode)
        if args.no_sector:
            plan = replace(plan, sectored=False)
        if args.replications is not None:
            plan = replace(plan, replications=args.replications)
        paths = run_preset(args.preset, cfg, plan, args.out, jobs=args.jobs)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
