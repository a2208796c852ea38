"""Block maps of the conventional and causal architectures.

The conventional block F_{a,b}(X) = E_H(E_HO(a⊗b) ⊗ X) emits before the hidden
chain advances; the causal block G_{a,b}(X) = E_HO(E_H(a⊗X) ⊗ b) advances first.
Cylinder probabilities are always evaluated by Heisenberg composition of
these blocks; the dual-map formulas below exist as cross-checks.
"""

from collections.abc import Sequence
from dataclasses import dataclass, replace
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of :class:`enum.StrEnum` (Python 3.11+)."""

        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

import numpy as np

from hqmm.errors import InputError, NumericFailure
from hqmm.services.numkernel import (
    ComplexMatrix,
    DimensionMismatchError,
    as_matrix,
    dagger,
    frozen,
    identity,
    kron,
    partial_trace,
    resolve_tol,
)
from hqmm.services.quantum_core import (
    DensityOperator,
    Effect,
    KrausMap,
    TransitionExpectation,
    apply_heisenberg,
    validate_effect,
)
from hqmm.utils.logger import logger
from hqmm.utils.validators import has_shape


class EffectLengthError(InputError):
    """Raised when an effect sequence is longer than the model horizon."""

    pass


class StepMismatchError(InputError):
    """Raised when steps, effects or the initial state disagree on N or M."""

    pass


class Architecture(StrEnum):
    CONVENTIONAL = "conventional"
    CAUSAL = "causal"


@dataclass(frozen=True)
class HQMMStep:
    """One time slice: hidden expectation (N, N) and emission expectation (N, M)."""

    hidden: TransitionExpectation
    emission: TransitionExpectation

    def __post_init__(self) -> None:
        if self.hidden.d_a != self.hidden.d_b:
            raise StepMismatchError(
                f"hidden expectation must map N⊗N to N, got d_a={self.hidden.d_a}, "
                f"d_b={self.hidden.d_b}"
            )
        if self.emission.d_a != self.hidden.d_a:
            raise StepMismatchError(
                f"emission hidden side {self.emission.d_a} differs from hidden side "
                f"{self.hidden.d_a}"
            )

    @property
    def hidden_dim(self) -> int:
        return self.hidden.d_a

    @property
    def output_dim(self) -> int:
        return self.emission.d_b


@dataclass(frozen=True)
class HQMMModel:
    initial_state: DensityOperator
    steps: tuple[HQMMStep, ...]
    architecture: Architecture

    def __post_init__(self) -> None:
        if not self.steps:
            raise StepMismatchError("model needs at least one step")
        n, m = self.steps[0].hidden_dim, self.steps[0].output_dim
        for idx, step in enumerate(self.steps):
            if (step.hidden_dim, step.output_dim) != (n, m):
                raise StepMismatchError(
                    f"step {idx} has (N, M) = ({step.hidden_dim}, {step.output_dim}), "
                    f"expected ({n}, {m})"
                )
        if self.initial_state.side != n:
            raise StepMismatchError(
                f"initial state side {self.initial_state.side} differs from N = {n}"
            )
        object.__setattr__(self, "architecture", Architecture(self.architecture))

    @classmethod
    def homogeneous(
        cls,
        initial_state: DensityOperator,
        step: HQMMStep,
        count: int,
        architecture: Architecture | str,
    ) -> "HQMMModel":
        """The same step repeated ``count`` times."""
        if count < 1:
            raise InputError(f"step count must be at least 1, got {count}")
        return cls(initial_state, (step,) * count, Architecture(architecture))

    @property
    def hidden_dim(self) -> int:
        return self.steps[0].hidden_dim

    @property
    def output_dim(self) -> int:
        return self.steps[0].output_dim

    def with_architecture(self, architecture: Architecture | str) -> "HQMMModel":
        return replace(self, architecture=Architecture(architecture))


@dataclass(frozen=True)
class EffectSequence:
    """Per-step (hidden, output) effect pairs; steps past the end are identities."""

    pairs: tuple[tuple[Effect, Effect], ...]

    def __post_init__(self) -> None:
        for idx, pair in enumerate(self.pairs):
            if len(pair) != 2 or not all(isinstance(e, Effect) for e in pair):
                raise InputError(f"effect pair {idx} must hold two Effect values")

    def __len__(self) -> int:
        return len(self.pairs)

    @classmethod
    def identities(cls, hidden_dim: int, output_dim: int, length: int) -> "EffectSequence":
        pair = (Effect(identity(hidden_dim)), Effect(identity(output_dim)))
        return cls((pair,) * length)

    @classmethod
    def from_matrices(
        cls, pairs: Sequence[tuple[object, object]], tol: float | None = None
    ) -> "EffectSequence":
        validated = []
        for idx, (hidden, output) in enumerate(pairs):
            try:
                validated.append((validate_effect(hidden, tol), validate_effect(output, tol)))
            except InputError as e:
                raise type(e)(f"effect pair {idx}: {e}") from e
        return cls(tuple(validated))


@dataclass(frozen=True)
class Superoperator:
    """Linear map on operators under row-major vectorisation.

    Column ``c*dim_in + d`` of ``matrix`` holds vec(Φ(|c⟩⟨d|)).
    """

    dim_in: int
    dim_out: int
    matrix: ComplexMatrix

    def apply(self, x: object) -> ComplexMatrix:
        x = as_matrix(x)
        if not has_shape(x, self.dim_in, self.dim_in):
            raise DimensionMismatchError(
                f"superoperator input must have side {self.dim_in}, got shape {x.shape}"
            )
        out = (self.matrix @ x.reshape(-1)).reshape(self.dim_out, self.dim_out)
        return frozen(out)


def kraus_superoperator(m: KrausMap) -> Superoperator:
    """The Schrödinger action ρ ↦ Σ KρK† as a Superoperator."""
    matrix = sum(np.kron(k, np.conj(k)) for k in m.kraus)
    return Superoperator(dim_in=m.dim_in, dim_out=m.dim_out, matrix=frozen(np.asarray(matrix)))


def _operand(x: Effect | np.ndarray, side: int, role: str) -> ComplexMatrix:
    m = x.matrix if isinstance(x, Effect) else as_matrix(x)
    if not has_shape(m, side, side):
        raise DimensionMismatchError(f"{role} must have side {side}, got shape {m.shape}")
    return m


def conventional_block(
    step: HQMMStep, a: Effect | np.ndarray, b: Effect | np.ndarray, x: np.ndarray
) -> ComplexMatrix:
    """F_{a,b}(X) = E_H(E_HO(a⊗b) ⊗ X)."""
    n, m = step.hidden_dim, step.output_dim
    a, b, x = _operand(a, n, "a"), _operand(b, m, "b"), _operand(x, n, "X")
    emitted = apply_heisenberg(step.emission, kron(a, b))
    return apply_heisenberg(step.hidden, kron(emitted, x))


def causal_block(
    step: HQMMStep, a: Effect | np.ndarray, b: Effect | np.ndarray, x: np.ndarray
) -> ComplexMatrix:
    """G_{a,b}(X) = E_HO(E_H(a⊗X) ⊗ b)."""
    n, m = step.hidden_dim, step.output_dim
    a, b, x = _operand(a, n, "a"), _operand(b, m, "b"), _operand(x, n, "X")
    advanced = apply_heisenberg(step.hidden, kron(a, x))
    return apply_heisenberg(step.emission, kron(advanced, b))


def apply_block(
    step: HQMMStep,
    a: Effect | np.ndarray,
    b: Effect | np.ndarray,
    x: np.ndarray,
    architecture: Architecture | str,
) -> ComplexMatrix:
    if Architecture(architecture) is Architecture.CONVENTIONAL:
        return conventional_block(step, a, b, x)
    return causal_block(step, a, b, x)


def block_superoperator(
    step: HQMMStep,
    a: Effect | np.ndarray,
    b: Effect | np.ndarray,
    architecture: Architecture | str,
) -> Superoperator:
    """X ↦ F_{a,b}(X) or G_{a,b}(X), assembled column by column from matrix units."""
    n = step.hidden_dim
    matrix = np.zeros((n * n, n * n), dtype=np.complex128)
    for c in range(n):
        for d in range(n):
            unit = np.zeros((n, n), dtype=np.complex128)
            unit[c, d] = 1.0
            matrix[:, c * n + d] = apply_block(step, a, b, unit, architecture).reshape(-1)
    return Superoperator(dim_in=n, dim_out=n, matrix=frozen(matrix))


def canonical_dual(s: Superoperator) -> Superoperator:
    """Adjoint for the bilinear pairing: Tr(dual(ρ)X) = Tr(ρ S(X))."""
    s4 = s.matrix.reshape(s.dim_out, s.dim_out, s.dim_in, s.dim_in)
    d4 = s4.transpose(3, 2, 1, 0)
    matrix = d4.reshape(s.dim_in * s.dim_in, s.dim_out * s.dim_out).copy()
    return Superoperator(dim_in=s.dim_out, dim_out=s.dim_in, matrix=frozen(matrix))


def superoperator_choi(s: Superoperator) -> ComplexMatrix:
    """Σ_cd |c⟩⟨d| ⊗ Φ(|c⟩⟨d|), the convention of ``quantum_core.choi``."""
    s4 = s.matrix.reshape(s.dim_out, s.dim_out, s.dim_in, s.dim_in)
    side = s.dim_in * s.dim_out
    return frozen(s4.transpose(2, 0, 3, 1).reshape(side, side).copy())


def _state(rho: DensityOperator | np.ndarray, side: int) -> ComplexMatrix:
    m = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho)
    if not has_shape(m, side, side):
        raise DimensionMismatchError(f"ρ must have side {side}, got shape {m.shape}")
    return m


def lemma_dual_conventional(
    step: HQMMStep, a: Effect | np.ndarray, b: Effect | np.ndarray, rho: DensityOperator
) -> ComplexMatrix:
    """Σ_α Tr_{H_n}[K_α ρ K_α† (E_HO(a⊗b) ⊗ I)], an operator on the next hidden space."""
    n, m = step.hidden_dim, step.output_dim
    a, b = _operand(a, n, "a"), _operand(b, m, "b")
    rho_m = _state(rho, n)
    weight = kron(apply_heisenberg(step.emission, kron(a, b)), identity(n))
    out = np.zeros((n, n), dtype=np.complex128)
    for k in step.hidden.map.kraus:
        out += partial_trace(k @ rho_m @ dagger(k) @ weight, n, n, "first")
    return frozen(out)


def lemma_dual_causal(
    step: HQMMStep, a: Effect | np.ndarray, b: Effect | np.ndarray, rho: DensityOperator
) -> ComplexMatrix:
    """Σ_β Tr_{H_n}[L_β ρ L_β† (E_H(a⊗I) ⊗ b)].

    The result lives on the output register (side M); its trace equals Tr(ρ G_{a,b}(I)).
    """
    n, m = step.hidden_dim, step.output_dim
    a, b = _operand(a, n, "a"), _operand(b, m, "b")
    rho_m = _state(rho, n)
    weight = kron(apply_heisenberg(step.hidden, kron(a, identity(n))), b)
    out = np.zeros((m, m), dtype=np.complex128)
    for k in step.emission.map.kraus:
        out += partial_trace(k @ rho_m @ dagger(k) @ weight, n, m, "first")
    return frozen(out)


def cylinder_expectation(
    model: HQMMModel, effects: EffectSequence, tol: float | None = None
) -> float:
    """ρ₀(B⁰_{a₀,b₀} ∘ ⋯ ∘ Bⁿ_{aₙ,bₙ}(I)) with B chosen by the model architecture."""
    tol = resolve_tol(tol)
    if len(effects) > len(model.steps):
        raise EffectLengthError(
            f"{len(effects)} effect pairs exceed the model horizon of {len(model.steps)} steps"
        )
    n, m = model.hidden_dim, model.output_dim
    for idx, (a, b) in enumerate(effects.pairs):
        if a.side != n or b.side != m:
            raise StepMismatchError(
                f"effect pair {idx} has sides ({a.side}, {b.side}), expected ({n}, {m})"
            )

    y = identity(n)
    for step, (a, b) in reversed(list(zip(model.steps, effects.pairs, strict=False))):
        y = apply_block(step, a, b, y, model.architecture)

    value = float(np.real(np.trace(model.initial_state.matrix @ y)))
    if not -tol <= value <= 1.0 + tol:
        raise NumericFailure(f"cylinder expectation {value!r} outside [0, 1] (tol {tol:.1e})")
    return value


def compare_architectures(
    initial: DensityOperator,
    steps: Sequence[HQMMStep],
    effects: EffectSequence,
    tol: float | None = None,
) -> tuple[float, float, float]:
    """(conventional value, causal value, absolute difference)."""
    model = HQMMModel(initial, tuple(steps), Architecture.CONVENTIONAL)
    conv = cylinder_expectation(model, effects, tol)
    caus = cylinder_expectation(model.with_architecture(Architecture.CAUSAL), effects, tol)
    logger.debug(f"compare: conventional={conv!r} causal={caus!r}")
    return conv, caus, abs(conv - caus)
