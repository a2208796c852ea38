"""Command-line entry point for the ``hqmm`` tool."""

import argparse
import math
import sys
from collections.abc import Sequence

from hqmm.cli.commands import run
from hqmm.config import settings
from hqmm.services.block_maps import Architecture
from hqmm.services.qubit_model import SlotConvention
from hqmm.utils.logger import LEVELS, set_level


def _positive_float(text: str) -> float:
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text!r}")
    return value


def _finite_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"expected a seed in [0, 2**64), got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hqmm",
        description="Conventional vs causal hidden quantum Markov models.",
    )
    parser.add_argument("--version", action="version", version=settings.app_version)
    parser.add_argument(
        "--tol", type=_positive_float, default=settings.tolerance, help="numeric tolerance"
    )
    parser.add_argument(
        "--seed", type=_seed, default=settings.seed, help="seed for every random draw"
    )
    parser.add_argument(
        "--log-base",
        choices=["nat", "bit"],
        default=settings.log_base,
        help="unit of reported entropies",
    )
    parser.add_argument(
        "--log-level", type=str.upper, choices=LEVELS, help="override HQMM_LOG_LEVEL"
    )
    architectures = [a.value for a in Architecture]
    conventions = [c.value for c in SlotConvention]
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="check a model file (and optionally effects)")
    validate.add_argument("model")
    validate.add_argument("--effects")

    emit = sub.add_parser("emit-qubit", help="write the qubit model as a model document")
    emit.add_argument("--theta", type=_finite_float, required=True)
    emit.add_argument("--architecture", choices=architectures, default="conventional")
    emit.add_argument("--steps", type=int, default=1)
    emit.add_argument("--convention", choices=conventions, default="first")

    compare = sub.add_parser("compare", help="cylinder values under both architectures")
    compare.add_argument("model")
    compare.add_argument("effects")

    sweep = sub.add_parser("sweep-theta", help="qubit report over a theta grid")
    sweep.add_argument("--min", type=_finite_float, default=settings.theta_grid_min)
    sweep.add_argument("--max", type=_finite_float, default=settings.theta_grid_max)
    sweep.add_argument("--steps", type=int, default=settings.theta_grid_points)
    sweep.add_argument("--convention", choices=conventions, default="first")

    lift = sub.add_parser("lift", help="lift a classical HMM into a model document")
    lift.add_argument("hmm")
    lift.add_argument("--steps", type=int)
    lift.add_argument("--architecture", choices=architectures, default="conventional")

    verify = sub.add_parser("verify-paper", help="claim report for the qubit model")
    which = verify.add_mutually_exclusive_group()
    which.add_argument("--theta", type=_finite_float)
    which.add_argument("--grid", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
