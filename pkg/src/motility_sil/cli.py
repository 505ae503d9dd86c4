"""Command line entry point.

    motility-sil <subcommand> --config <path> [--out <dir>]
    motility-sil sweep --config a.cfg b.cfg ... [--out <root>] [--threads N]

Subcommands name the experiment and must match the config's ``experiment``
key.  The default output root is ./runs, overridable with MOTILITY_SIL_OUT.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, parse_config
from .experiments import run_experiment, run_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motility-sil",
        description="Phase-field cell motility model and its sharp-interface limit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in sorted(EXPERIMENTS):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=None, help="output directory")
    p = sub.add_parser("sweep", help="run several configs through a worker pool")
    p.add_argument("--config", required=True, nargs="+",
                   help="experiment config files")
    p.add_argument("--out", default=None, help="output root directory")
    p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            outs = run_sweep(args.config, out_root=args.out, threads=args.threads)
            for o in outs:
                print(o)
            return 0
        cfg = parse_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(
                f"config declares experiment {cfg.experiment!r} but the "
                f"{args.command!r} subcommand was invoked"
            )
        outdir = run_experiment(args.config, out_dir=args.out)
        print(outdir)
        return 0
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:   # propagate module errors with context
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
