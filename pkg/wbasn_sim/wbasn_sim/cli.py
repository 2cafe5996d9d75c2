# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

"""
Command-line entry point.

    wbasn-sim run --scenario walking --runs 5 --out out/
    wbasn-sim validate --config my.conf
"""

import argparse
import logging
import sys
from typing import List, Optional

from wbasn_sim import __version__, hooks
from wbasn_sim.wbasn_sim import api
from wbasn_sim.wbasn_sim.exceptions import ConfigError, OutputError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

SCENARIO_CHOICES = ("walking", "slow", "fast", "all")


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1 (got {value})")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wbasn-sim",
        description=hooks.app_description,
        epilog=f"Set {hooks.threads_env_var} to run seeds in parallel.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="INFO with -v, DEBUG with -vv")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run an experiment and write the output bundle")
    run.add_argument("--config", metavar="PATH", help="config file or manifest.json of a previous run")
    run.add_argument("--scenario", choices=SCENARIO_CHOICES, help="scenario to run (default from config)")
    run.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    run.add_argument("--runs", type=positive_int, help="runs per scenario")
    run.add_argument("--rounds", type=positive_int, help="round cap")
    run.add_argument("--noise", choices=("on", "off"), help="signal noise")
    run.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")

    validate = commands.add_parser("validate", help="check a config and list every violation")
    validate.add_argument("--config", metavar="PATH", help="config file or manifest.json")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.getLogger(hooks.logger_name).setLevel(level)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        result = api.run(
            config_path=args.config,
            scenario=args.scenario,
            seed=args.seed,
            rounds=args.rounds,
            runs=args.runs,
            noise=args.noise,
            out_dir=args.out,
        )
    except ConfigError as e:
        for problem in e.violations:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO

    for name, metrics in result["summary"].items():
        print(f"{name}: " + ", ".join(f"{key}={'censored' if value is None else format(value, 'g')}"
                                      for key, value in metrics.items()))
    print(f"wrote {len(result['files'])} files to {result['out_dir']}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        result = api.validate(args.config)
    except ConfigError as e:
        for problem in e.violations:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_CONFIG

    if result["success"]:
        print(f"{result['source']}: ok")
        return EXIT_OK
    for problem in result["violations"]:
        print(problem)
    return EXIT_CONFIG


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if args.command == "run":
        return cmd_run(args)
    return cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
