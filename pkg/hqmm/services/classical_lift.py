"""Classical HMMs, their isometric lifting and the F = G equivalence check.

A classical step (Π, Q) lifts to the isometries
V_H|i⟩ = Σ_j √Π_ij |i, j⟩ and V_HO|j⟩ = Σ_k √Q_jk |j⟩⊗|e_k⟩. Both copy the
hidden label into their first leg, which makes the conventional and causal
blocks coincide:

    ⟨i|F_{a,b}(a')|j⟩ = a_ij · (√Q b √Qᵀ)_ij · (√Π a' √Πᵀ)_ij
"""

import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from hqmm.config import settings
from hqmm.errors import InputError
from hqmm.services.block_maps import (
    Architecture,
    EffectSequence,
    HQMMModel,
    HQMMStep,
    causal_block,
    conventional_block,
    cylinder_expectation,
)
from hqmm.services.numkernel import (
    ComplexMatrix,
    DimensionMismatchError,
    as_matrix,
    frozen,
    max_abs,
    random_hermitian,
    resolve_tol,
)
from hqmm.services.quantum_core import (
    DensityOperator,
    Effect,
    TransitionExpectation,
    isometry_expectation,
)
from hqmm.utils.logger import logger


class HMMValidationError(InputError):
    """Raised when an HMM has a negative entry, a bad row sum or bad shapes."""

    pass


@dataclass(frozen=True)
class ClassicalHMM:
    """Validated (π, Π_n, Q^(n)); build with ``validate_hmm``."""

    initial: np.ndarray
    transitions: tuple[np.ndarray, ...]
    emissions: tuple[np.ndarray, ...]

    @property
    def hidden_count(self) -> int:
        return self.initial.shape[0]

    @property
    def output_count(self) -> int:
        return self.emissions[0].shape[1]

    @property
    def steps(self) -> int:
        return len(self.transitions)

    @classmethod
    def homogeneous(
        cls,
        pi: Sequence[float],
        transition: Sequence[Sequence[float]],
        emission: Sequence[Sequence[float]],
        steps: int,
        tol: float | None = None,
    ) -> "ClassicalHMM":
        if steps < 1:
            raise HMMValidationError(f"step count must be at least 1, got {steps}")
        raw = {"pi": pi, "transitions": [transition] * steps, "emissions": [emission] * steps}
        return validate_hmm(raw, tol)


@dataclass(frozen=True)
class DiagonalObservable:
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InputError(f"observable weights must be a non-empty vector, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InputError("observable weights must be finite")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def matrix(self) -> ComplexMatrix:
        return as_matrix(np.diag(self.weights))


@dataclass(frozen=True)
class EquivalenceReport:
    max_block_gap: float
    max_explicit_gap: float
    trials: int
    seed: int
    tolerance: float

    @property
    def equivalent(self) -> bool:
        return max(self.max_block_gap, self.max_explicit_gap) <= self.tolerance


def _real_matrix(data: Any, name: str) -> np.ndarray:
    try:
        m = np.array(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise HMMValidationError(f"{name} is not a real matrix: {e}") from e
    if m.ndim != 2 or m.size == 0:
        raise HMMValidationError(f"{name} must be a non-empty matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise HMMValidationError(f"{name} has non-finite entries")
    return m


def _check_stochastic(m: np.ndarray, name: str, tol: float) -> np.ndarray:
    negative = np.argwhere(m < 0)
    if negative.size:
        i, j = negative[0]
        raise HMMValidationError(f"{name} has negative entry {float(m[i, j])!r} at ({i}, {j})")
    for i, total in enumerate(m.sum(axis=1)):
        if abs(total - 1.0) > tol:
            raise HMMValidationError(f"{name} row {i} sums to {total:.12g}")
    m.flags.writeable = False
    return m


def validate_hmm(raw: Any, tol: float | None = None) -> ClassicalHMM:
    """Validate a mapping (or document) with keys ``pi``, ``transitions``, ``emissions``."""
    tol = resolve_tol(tol)
    if isinstance(raw, ClassicalHMM):
        raw = {"pi": raw.initial, "transitions": raw.transitions, "emissions": raw.emissions}
    elif not isinstance(raw, Mapping):
        raw = {k: getattr(raw, k, None) for k in ("pi", "transitions", "emissions")}

    pi = _real_matrix([raw.get("pi")], "pi")
    _check_stochastic(pi, "pi", tol)
    pi = pi[0]
    transitions = raw.get("transitions")
    emissions = raw.get("emissions")
    for name, seq in (("transitions", transitions), ("emissions", emissions)):
        if not isinstance(seq, Sequence | np.ndarray):
            raise HMMValidationError(f"{name} must be a list of matrices")
    if len(transitions) == 0:
        raise HMMValidationError("HMM needs at least one transition matrix")
    if len(transitions) != len(emissions):
        raise HMMValidationError(
            f"{len(transitions)} transition matrices but {len(emissions)} emission matrices"
        )

    n = pi.shape[0]
    pis: list[np.ndarray] = []
    qs: list[np.ndarray] = []
    m_out: int | None = None
    for step, (t_raw, e_raw) in enumerate(zip(transitions, emissions, strict=True)):
        t = _real_matrix(t_raw, f"transition {step}")
        if t.shape != (n, n):
            raise HMMValidationError(f"transition {step} has shape {t.shape}, expected ({n}, {n})")
        q = _real_matrix(e_raw, f"emission {step}")
        m_out = q.shape[1] if m_out is None else m_out
        if q.shape != (n, m_out):
            raise HMMValidationError(
                f"emission {step} has shape {q.shape}, expected ({n}, {m_out})"
            )
        pis.append(_check_stochastic(t, f"transition {step}", tol))
        qs.append(_check_stochastic(q, f"emission {step}", tol))
    return ClassicalHMM(initial=pi, transitions=tuple(pis), emissions=tuple(qs))


def _stochastic(data: Any, name: str, tol: float | None) -> np.ndarray:
    return _check_stochastic(_real_matrix(data, name), name, resolve_tol(tol))


def lift_transition(pi: Any, tol: float | None = None) -> TransitionExpectation:
    """V|i⟩ = Σ_j √Π_ij |i, j⟩."""
    p = _stochastic(pi, "transition", tol)
    n = p.shape[0]
    if p.shape != (n, n):
        raise HMMValidationError(f"transition must be square, got shape {p.shape}")
    v = np.zeros((n * n, n), dtype=np.complex128)
    for i in range(n):
        v[i * n : (i + 1) * n, i] = np.sqrt(p[i])
    return isometry_expectation(v, n, n, tol)


def lift_emission(q: Any, tol: float | None = None) -> TransitionExpectation:
    """V|j⟩ = Σ_k √Q_jk |j⟩⊗|e_k⟩."""
    e = _stochastic(q, "emission", tol)
    n, m = e.shape
    v = np.zeros((n * m, n), dtype=np.complex128)
    for j in range(n):
        v[j * m : (j + 1) * m, j] = np.sqrt(e[j])
    return isometry_expectation(v, n, m, tol)


def _step_index(hmm: ClassicalHMM, n: int) -> int:
    if not 0 <= n < hmm.steps:
        raise InputError(f"step {n} out of range for an HMM with {hmm.steps} steps")
    return n


def lift_step(hmm: ClassicalHMM, n: int) -> HQMMStep:
    n = _step_index(hmm, n)
    return HQMMStep(
        hidden=lift_transition(hmm.transitions[n]), emission=lift_emission(hmm.emissions[n])
    )


def lift_model(
    hmm: ClassicalHMM,
    architecture: Architecture | str = Architecture.CONVENTIONAL,
    tol: float | None = None,
) -> HQMMModel:
    """Lifted model with initial state diag(π)."""
    initial = DensityOperator(as_matrix(np.diag(hmm.initial)), tol)
    steps = tuple(lift_step(hmm, n) for n in range(hmm.steps))
    return HQMMModel(initial, steps, Architecture(architecture))


def explicit_block(
    hmm: ClassicalHMM, n: int, a: np.ndarray, b: np.ndarray, a_next: np.ndarray
) -> ComplexMatrix:
    """a ⊙ (√Q b √Qᵀ) ⊙ (√Π a' √Πᵀ), entrywise."""
    n = _step_index(hmm, n)
    sq_pi = np.sqrt(hmm.transitions[n])
    sq_q = np.sqrt(hmm.emissions[n])
    a, b, a_next = np.asarray(a), np.asarray(b), np.asarray(a_next)
    big_n, big_m = hmm.hidden_count, hmm.output_count
    for name, m, side in (("a", a, big_n), ("b", b, big_m), ("a_next", a_next, big_n)):
        if m.shape != (side, side):
            raise DimensionMismatchError(f"{name} must have side {side}, got shape {m.shape}")
    outer_a = sq_pi @ a_next @ sq_pi.T
    outer_b = sq_q @ b @ sq_q.T
    return frozen(np.asarray(a * outer_b * outer_a, dtype=np.complex128))


def explicit_block_element(
    hmm: ClassicalHMM,
    n: int,
    i: int,
    j: int,
    a: np.ndarray,
    b: np.ndarray,
    a_next: np.ndarray,
) -> complex:
    side = hmm.hidden_count
    if not (0 <= i < side and 0 <= j < side):
        raise InputError(f"index ({i}, {j}) out of range for N = {side}")
    return complex(explicit_block(hmm, n, a, b, a_next)[i, j])


def block_gap(step: HQMMStep, a: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    """‖F_{a,b}(X) − G_{a,b}(X)‖_∞."""
    return max_abs(conventional_block(step, a, b, x) - causal_block(step, a, b, x))


def check_equivalence(
    hmm: ClassicalHMM,
    n: int,
    trials: int | None = None,
    tol: float | None = None,
    seed: int | None = None,
    step: HQMMStep | None = None,
) -> EquivalenceReport:
    """Compare F, G and the explicit formula on random Hermitian observables.

    ``step`` replaces the lifted step of ``hmm`` (to check non-copying lifts).
    """
    tol = resolve_tol(tol)
    trials = settings.equivalence_trials if trials is None else trials
    seed = settings.seed if seed is None else seed
    if trials < 1:
        raise InputError(f"trials must be positive, got {trials}")
    if not 0 <= seed < 2**64:
        raise InputError(f"seed must lie in [0, 2**64), got {seed}")
    step = lift_step(hmm, n) if step is None else step
    big_n, big_m = hmm.hidden_count, hmm.output_count

    rng = np.random.default_rng(seed)
    draws = [
        (random_hermitian(rng, big_n), random_hermitian(rng, big_m), random_hermitian(rng, big_n))
        for _ in range(trials)
    ]

    def run(draw: tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]) -> tuple[float, float]:
        a, b, a_next = draw
        f = conventional_block(step, a, b, a_next)
        g = causal_block(step, a, b, a_next)
        e = explicit_block(hmm, n, a, b, a_next)
        return max_abs(f - g), max(max_abs(f - e), max_abs(g - e))

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        gaps = list(pool.map(run, draws))

    report = EquivalenceReport(
        max_block_gap=max(g for g, _ in gaps),
        max_explicit_gap=max(e for _, e in gaps),
        trials=trials,
        seed=seed,
        tolerance=tol,
    )
    logger.info(
        f"Equivalence check step {n}: {trials} trials, seed {seed}, "
        f"max |F-G| = {report.max_block_gap:.3e}, max explicit gap = {report.max_explicit_gap:.3e}"
    )
    return report


ObservablePair = tuple[Sequence[float] | DiagonalObservable, Sequence[float] | DiagonalObservable]


def _weights(x: Sequence[float] | DiagonalObservable, side: int, name: str) -> np.ndarray:
    w = x.weights if isinstance(x, DiagonalObservable) else DiagonalObservable(x).weights
    if w.shape != (side,):
        raise DimensionMismatchError(f"{name} needs {side} weights, got {w.shape[0]}")
    return w


def classical_forward(hmm: ClassicalHMM, observables: Sequence[ObservablePair]) -> float:
    """Forward recursion in real arithmetic.

    v_{n+1} = 1, v_m = α^m ⊙ (Q^m β^m) ⊙ (Π^m v_{m+1}), result π·v_0.
    Steps beyond the observables contribute nothing (identity weights).
    """
    if len(observables) > hmm.steps:
        raise DimensionMismatchError(
            f"{len(observables)} observable pairs exceed the HMM horizon of {hmm.steps} steps"
        )
    big_n, big_m = hmm.hidden_count, hmm.output_count
    v = np.ones(big_n)
    for m in reversed(range(len(observables))):
        alpha = _weights(observables[m][0], big_n, f"hidden observable {m}")
        beta = _weights(observables[m][1], big_m, f"output observable {m}")
        v = alpha * (hmm.emissions[m] @ beta) * (hmm.transitions[m] @ v)
    return float(hmm.initial @ v)


def corollary_check(
    hmm: ClassicalHMM, observables: Sequence[ObservablePair], tol: float | None = None
) -> bool:
    """Lifted cylinder expectation with diagonal effects equals the forward oracle.

    Weights must lie in [0, 1] so the diagonal matrices are effects.
    """
    tol = resolve_tol(tol)
    big_n, big_m = hmm.hidden_count, hmm.output_count
    pairs: list[tuple[Effect, Effect]] = []
    for m, (alpha, beta) in enumerate(observables):
        pair = []
        for name, w, side in (("hidden", alpha, big_n), ("output", beta, big_m)):
            weights = _weights(w, side, f"{name} observable {m}")
            if np.any(weights < 0.0) or np.any(weights > 1.0):
                raise InputError(f"{name} observable {m} has weights outside [0, 1]")
            pair.append(Effect(DiagonalObservable(weights).matrix(), tol))
        pairs.append((pair[0], pair[1]))
    effects = EffectSequence(tuple(pairs))
    expected = classical_forward(hmm, observables)

    ok = True
    for arch in Architecture:
        value = cylinder_expectation(lift_model(hmm, arch, tol), effects, tol)
        gap = abs(value - expected)
        if not math.isfinite(gap) or gap >= tol:
            logger.warning(
                f"corollary check failed for {arch}: |{value!r} - {expected!r}| = {gap:.3e}"
            )
            ok = False
    return ok
