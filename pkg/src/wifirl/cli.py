"""Command line entry point: ``wifirl train|test|plot``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .agents import QTableFormatError
from .config import ConfigError, ExperimentConfig
from .harness import HarnessError, emit_plotdata, test, train


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wifirl", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a SARSA agent")
    t.add_argument("--config", required=True)
    t.add_argument("--seed", type=int)
    t.add_argument("--out-qtable")
    t.add_argument("--out-csv")

    s = sub.add_parser("test", help="run a test sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--qtable", action="append", default=[],
                   help="Q-table file; repeat to compare several agents")
    s.add_argument("--out-csv", required=True)
    s.add_argument("--seed", type=int)

    g = sub.add_parser("plot", help="reshape a results CSV into plot series (JSON)")
    g.add_argument("--csv", required=True)
    g.add_argument("--figure", required=True)
    g.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("WIFIRL_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = ExperimentConfig.load(args.config)
            train(cfg, args.seed, args.out_qtable, args.out_csv)
        elif args.command == "test":
            cfg = ExperimentConfig.load(args.config)
            test(cfg, args.qtable, args.out_csv, args.seed)
        else:
            emit_plotdata(args.csv, args.figure, args.out)
    except (ConfigError, HarnessError, QTableFormatError) as exc:
        print(f"wifirl: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
