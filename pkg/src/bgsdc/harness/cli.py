"""Command-line entry point for the benchmark harness.

Usage: bgsdc <command> [--config FILE] [--out DIR] [--paper-scale]
             [--retain-nodes]

Each command runs one experiment deterministically and writes a CSV
plus a resolved-config sidecar into the output directory. Exit codes:
0 on success, 2 on configuration errors, 3 when a run aborts on
non-finite state.
"""

import argparse
import configparser
import os
import sys

from ..driver import NonFiniteStateError
from .config import ConfigError, load_config
from .experiments import COMMANDS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bgsdc",
        description="Charged-particle integrator benchmark harness.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        cmd = sub.add_parser(name, help=func.__doc__)
        cmd.add_argument("--config", default=None,
                         help="configuration file (INI-style); defaults "
                              "are used when omitted")
        cmd.add_argument("--out", default=".",
                         help="output directory (created if missing)")
        cmd.add_argument("--paper-scale", action="store_true",
                         help="run at full production scale instead of the "
                              "quick desk-scale defaults")
        cmd.add_argument("--retain-nodes", action="store_true",
                         help="keep per-step node data in memory (needed "
                              "only by reflection detection, which enables "
                              "it on its own)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        else:
            cfg = configparser.ConfigParser()
        os.makedirs(args.out, exist_ok=True)
        path = COMMANDS[args.command](
            cfg, args.out, paper_scale=args.paper_scale,
            retain_nodes=args.retain_nodes)
    except ConfigError as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return 2
    except NonFiniteStateError as exc:
        print("numerical abort: %s" % exc, file=sys.stderr)
        return 3
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
