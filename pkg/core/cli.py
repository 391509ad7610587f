#!/usr/bin/env python3

import argparse
import logging
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import settings  # noqa: E402
from app import App  # noqa: E402
from commands import EXIT_ERROR  # noqa: E402
from libs.config import COMMANDS, FORMATS, build_config, load_config  # noqa: E402
from libs.exceptions import ConfigError  # noqa: E402

logger = logging.getLogger('cookiewalk.cli')


def get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cookiewalk",
                                     description="Cookie random walk simulator and exact oracle")
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="command to run, overrides the config's 'command'")
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--replicas", type=int, help="number of replicas")
    parser.add_argument("--horizon", type=int, action="append", dest="horizons",
                        help="horizon, repeat for nested horizons")
    parser.add_argument("--threads", type=int, help="worker count (results do not depend on it)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--skip-invalid", action="store_true", default=None,
                        help="simulate even when the law fails the assumptions")
    parser.add_argument("--format", choices=FORMATS, help="table output format")
    parser.add_argument("--version", action="version", version="%(prog)s {0}".format(settings.VERSION))
    return parser


def main(argv=None) -> int:
    args = get_parser().parse_args(argv)
    overrides = {"command": args.command, "seed": args.seed, "replicas": args.replicas,
                 "horizons": args.horizons, "threads": args.threads, "out": args.out,
                 "skip_invalid": args.skip_invalid, "format": args.format}
    app = App()
    try:
        if args.config:
            config = load_config(args.config, overrides)
        else:
            config = build_config({}, overrides)
    except ConfigError as error:
        logger.error("Invalid configuration: {0}".format(error))
        print("config error: {0}".format(error), file=sys.stderr)
        return EXIT_ERROR
    return app.run(config)


if __name__ == '__main__':
    sys.exit(main())
