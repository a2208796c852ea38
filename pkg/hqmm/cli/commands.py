"""Subcommand handlers.

Each handler takes the parsed namespace and returns an exit code; ``run``
maps ``InputError`` to 2 and ``NumericFailure`` to 3.
"""

import argparse
import math
import sys
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from hqmm.config import settings
from hqmm.errors import InputError, NumericFailure
from hqmm.models.documents import ClaimRow, CompareRow, SweepRow
from hqmm.services.block_maps import compare_architectures, cylinder_expectation
from hqmm.services.classical_lift import ClassicalHMM, check_equivalence, lift_model, validate_hmm
from hqmm.services.discrimination import (
    ChannelPair,
    diamond_bounds,
    success_probability_bracket,
)
from hqmm.services.model_io import (
    parse_effects,
    parse_hmm,
    parse_model,
    serialize_model,
    write_csv,
)
from hqmm.services.numkernel import convert_entropy
from hqmm.services.qubit_model import (
    QubitModelParams,
    build_model,
    choi_entanglement_analysis,
    initial_state,
    paper_kraus_pair,
    qubit_hqmm,
    separation_effects,
    theta_grid,
    verify_paper_claims,
)
from hqmm.services.quantum_core import kraus_map
from hqmm.utils.logger import logger

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from e


def cmd_validate(args: argparse.Namespace) -> int:
    model = parse_model(_read(args.model), args.tol)
    summary = (
        f"model ok: N={model.hidden_dim} M={model.output_dim} "
        f"steps={len(model.steps)} architecture={model.architecture}"
    )
    if args.effects:
        effects = parse_effects(_read(args.effects), args.tol)
        value = cylinder_expectation(model, effects, args.tol)
        summary += f"; effects ok: {len(effects)} pairs, cylinder value {value!r}"
    logger.info(summary)
    print(summary)
    return EXIT_OK


def cmd_emit_qubit(args: argparse.Namespace) -> int:
    model = qubit_hqmm(args.theta, args.architecture, args.steps, args.convention)
    sys.stdout.write(serialize_model(model) + "\n")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    model = parse_model(_read(args.model), args.tol)
    effects = parse_effects(_read(args.effects), args.tol)
    conv, caus, diff = compare_architectures(model.initial_state, model.steps, effects, args.tol)
    logger.info(f"compare: conventional={conv!r}, causal={caus!r}, difference={diff!r}")
    write_csv(sys.stdout, CompareRow, [CompareRow(conv_prob=conv, caus_prob=caus, prob_diff=diff)])
    return EXIT_OK


def sweep_row(theta: float, convention: str, tol: float, log_base: str) -> SweepRow:
    """Every per-θ quantity of the sweep report."""
    step = build_model(QubitModelParams(theta), convention)
    conv, caus, diff = compare_architectures(initial_state(), [step], separation_effects(1), tol)
    k_f, k_g = paper_kraus_pair(theta)
    pair = ChannelPair(kraus_map([k_f]), kraus_map([k_g]))
    bracket = diamond_bounds(pair, tol)
    success = success_probability_bracket(pair, tol)
    analysis = choi_entanglement_analysis(theta, tol)
    return SweepRow(
        theta=theta,
        conv_prob=conv,
        caus_prob=caus,
        prob_diff=diff,
        choi_trace_norm=bracket.choi_trace_norm,
        diamond_lower=bracket.lower,
        diamond_upper=bracket.upper,
        psucc_lower=success.lower,
        psucc_upper=success.upper,
        entropy_paper_formula=convert_entropy(analysis.paper_entropy, log_base),
        entropy_psiF_computed=convert_entropy(analysis.entropy_f, log_base),
        entropy_psiG_computed=convert_entropy(analysis.entropy_g, log_base),
    )


def cmd_sweep_theta(args: argparse.Namespace) -> int:
    thetas = theta_grid(args.steps, args.min, args.max)
    logger.info(
        f"Sweeping {len(thetas)} theta values in [{args.min!r}, {args.max!r}] "
        f"({args.convention} convention)"
    )

    def row(theta: float) -> SweepRow:
        return sweep_row(float(theta), args.convention, args.tol, args.log_base)

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        rows = list(pool.map(row, thetas))
    rows.sort(key=lambda r: r.theta)
    write_csv(sys.stdout, SweepRow, rows)
    return EXIT_OK


def _resize(hmm: ClassicalHMM, steps: int | None, tol: float) -> ClassicalHMM:
    if steps is None or steps == hmm.steps:
        return hmm
    if steps < 1:
        raise InputError(f"--steps must be at least 1, got {steps}")
    if steps < hmm.steps:
        transitions, emissions = hmm.transitions[:steps], hmm.emissions[:steps]
    elif hmm.steps == 1:
        transitions, emissions = hmm.transitions * steps, hmm.emissions * steps
    else:
        raise InputError(
            f"--steps {steps} exceeds the {hmm.steps} steps of a time-inhomogeneous HMM"
        )
    raw = {"pi": hmm.initial, "transitions": transitions, "emissions": emissions}
    return validate_hmm(raw, tol)


def cmd_lift(args: argparse.Namespace) -> int:
    hmm = _resize(parse_hmm(_read(args.hmm), args.tol), args.steps, args.tol)
    model = lift_model(hmm, args.architecture, args.tol)
    logger.info(f"Lifted HMM (N={hmm.hidden_count}, M={hmm.output_count}, {hmm.steps} steps)")
    logger.info(f"Post-lift equivalence self-check with seed {args.seed}")
    for n in range(hmm.steps):
        report = check_equivalence(hmm, n, tol=args.tol, seed=args.seed)
        if not report.equivalent:
            raise NumericFailure(
                f"lifted step {n} failed the equivalence self-check: "
                f"max |F-G| = {report.max_block_gap:.3e}, "
                f"max explicit gap = {report.max_explicit_gap:.3e}"
            )
    sys.stdout.write(serialize_model(model) + "\n")
    return EXIT_OK


def cmd_verify_paper(args: argparse.Namespace) -> int:
    thetas = theta_grid() if args.grid else [math.pi / 2 if args.theta is None else args.theta]
    rows = [
        ClaimRow(
            claim_id=record.claim_id,
            convention=str(record.convention),
            theta=record.theta,
            computed=record.computed,
            paper_value=record.paper_value,
            abs_deviation=record.abs_deviation,
            status=record.status,
        )
        for theta in thetas
        for record in verify_paper_claims(float(theta), args.tol, args.log_base).records
    ]
    write_csv(sys.stdout, ClaimRow, rows)
    return EXIT_OK


HANDLERS: dict[str, Callable[[argparse.Namespace], int]] = {
    "validate": cmd_validate,
    "emit-qubit": cmd_emit_qubit,
    "compare": cmd_compare,
    "sweep-theta": cmd_sweep_theta,
    "lift": cmd_lift,
    "verify-paper": cmd_verify_paper,
}


def run(args: argparse.Namespace) -> int:
    """Dispatch to the subcommand and map package errors to exit codes."""
    handler = HANDLERS[args.command]
    try:
        return handler(args)
    except InputError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NumericFailure as e:
        logger.error(f"{args.command} numeric failure: {e}")
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
