"""
The ``meelab`` command line.

.. code-block:: bash

    meelab verify-theorem --config family.json --out results/ --jobs 4
    meelab rearrange density.csv --out results/
    meelab --self-test --out results/
"""
import argparse
import logging
import pathlib
import sys

from meelab import __version__
from meelab import runner
from meelab.config import load_experiment
from meelab.exceptions import MeeLabException

log = logging.getLogger(__name__)

LOG_LEVELS = ("debug", "info", "warning", "error")

CONFIG_COMMANDS = {
    "risk": runner.cmd_risk,
    "optimize": runner.cmd_optimize,
    "verify-theorem": runner.cmd_verify_theorem,
    "approx": runner.cmd_approx,
}


class ArgumentParser(argparse.ArgumentParser):
    """
    Usage errors exit with 1 like every other invalid parameter.
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(parser, config=True, top_level=False):
    # subcommands must not reset values given before the subcommand name
    default = None if top_level else argparse.SUPPRESS
    parser.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        default="warning" if top_level else argparse.SUPPRESS,
        help="logging threshold",
    )
    if config:
        parser.add_argument(
            "--config", required=True, type=pathlib.Path, help="JSON experiment configuration"
        )
    parser.add_argument("--out", type=pathlib.Path, default=default, help="output directory")
    parser.add_argument(
        "--seed", type=int, default=default, help="seed of every stochastic choice"
    )
    parser.add_argument(
        "--jobs", type=int, default=default, help="worker processes for independent cells"
    )


def build_parser():
    parser = ArgumentParser(
        prog="meelab",
        description="Minimum error entropy estimation with Renyi entropy and information potential",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--self-test", action="store_true", help="run the built-in invariant suite and exit"
    )
    _common(parser, config=False, top_level=True)
    subparsers = parser.add_subparsers(dest="command")
    subparsers.add_parser("risk", help="evaluate risks of the error density")
    subparsers.add_parser("optimize", help="optimize shifts for a risk")
    subparsers.add_parser("verify-theorem", help="sweep the information potential ordering")
    subparsers.add_parser("approx", help="follow the smoothing sequence")
    for name in CONFIG_COMMANDS:
        _common(subparsers.choices[name])
    rearrange = subparsers.add_parser("rearrange", help="rearrange an x,value file")
    rearrange.add_argument("input", type=pathlib.Path, help="x,value CSV file")
    rearrange.add_argument(
        "--out", type=pathlib.Path, default=argparse.SUPPRESS, help="output directory"
    )
    rearrange.add_argument("--log-level", choices=LOG_LEVELS, default=argparse.SUPPRESS)
    self_test = subparsers.add_parser("self-test", help="run the built-in invariant suite")
    _common(self_test, config=False)
    return parser


def _dispatch(args):
    if args.self_test or args.command == "self-test":
        return runner.cmd_self_test(args.out or pathlib.Path.cwd(), args.seed or 0, args.jobs or 1)
    if args.command == "rearrange":
        return runner.cmd_rearrange(args.input, args.out or pathlib.Path.cwd())
    config = load_experiment(args.config, out=args.out, seed=args.seed, jobs=args.jobs)
    return CONFIG_COMMANDS[args.command](config)


def main(argv=None):
    """
    Run the command line and return its exit code: 0 on success, 1 for invalid
    parameters or configuration, 2 for numerical failures and 3 for theorem violations.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.self_test and args.command is None:
        parser.error("a command or --self-test is required")
    if args.jobs is not None and args.jobs < 1:
        parser.error("--jobs must be >= 1")
    logging.basicConfig(
        level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        return _dispatch(args)
    except MeeLabException as err:
        log.error("%s", err)
        return err.exit_code
