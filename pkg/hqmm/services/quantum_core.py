"""States, effects and completely positive maps in Kraus form."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from hqmm.errors import InputError
from hqmm.services.numkernel import (
    ComplexMatrix,
    DimensionMismatchError,
    NotDensityError,
    as_matrix,
    dagger,
    frozen,
    hermitian_eig,
    max_abs,
    resolve_tol,
)
from hqmm.utils.validators import has_shape, is_positive_int, is_square


class EffectError(InputError):
    """Raised when a matrix has an eigenvalue outside [0, 1]."""

    pass


class NotIsometryError(InputError):
    """Raised when V†V deviates from the identity."""

    pass


class NotUnitalError(InputError):
    """Raised when a Kraus family does not satisfy Σ V†V = I."""

    pass


def _square(m: object, what: str) -> ComplexMatrix:
    m = as_matrix(m)
    if not is_square(m):
        raise DimensionMismatchError(f"{what} must be square, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class Effect:
    """Operator 0 ≼ e ≼ I, checked on construction within ``tolerance``."""

    matrix: ComplexMatrix
    tolerance: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        tol = resolve_tol(self.tolerance)
        m = _square(self.matrix, "effect")
        evals = hermitian_eig(m, tol).eigenvalues
        if evals[0] < -tol:
            raise EffectError(
                f"effect has eigenvalue {float(evals[0])!r} below 0 (tol {tol:.1e})"
            )
        if evals[-1] > 1.0 + tol:
            raise EffectError(
                f"effect has eigenvalue {float(evals[-1])!r} above 1 (tol {tol:.1e})"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def side(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DensityOperator:
    """Positive trace-one operator, checked on construction within ``tolerance``."""

    matrix: ComplexMatrix
    tolerance: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        tol = resolve_tol(self.tolerance)
        m = _square(self.matrix, "density operator")
        evals = hermitian_eig(m, tol).eigenvalues
        if evals[0] < -tol:
            raise NotDensityError(
                f"density operator not positive: eigenvalue {float(evals[0])!r}"
            )
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > tol:
            raise NotDensityError(f"density operator trace {trace.real!r} deviates from 1")
        object.__setattr__(self, "matrix", m)

    @property
    def side(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class KrausMap:
    """CP map ρ ↦ Σ KρK† with every K of shape dim_out × dim_in."""

    dim_in: int
    dim_out: int
    kraus: tuple[ComplexMatrix, ...]

    @property
    def rank(self) -> int:
        return len(self.kraus)

    def apply(self, rho: np.ndarray) -> ComplexMatrix:
        """Schrödinger action Σ KρK†."""
        out = sum(k @ rho @ dagger(k) for k in self.kraus)
        return frozen(np.asarray(out, dtype=np.complex128))

    def apply_dual(self, x: np.ndarray) -> ComplexMatrix:
        """Heisenberg action Σ K†XK."""
        out = sum(dagger(k) @ x @ k for k in self.kraus)
        return frozen(np.asarray(out, dtype=np.complex128))


@dataclass(frozen=True)
class TransitionExpectation:
    """Unital CP map B(C^d_a ⊗ C^d_b) → B(C^d_a) stored by its Kraus family.

    Output legs are ordered (time-n hidden) ⊗ (time-(n+1) hidden) for hidden
    expectations and (hidden) ⊗ (output) for emission expectations.
    """

    map: KrausMap
    d_a: int
    d_b: int


def validate_effect(e: object, tol: float | None = None) -> Effect:
    """Check 0 ≼ e ≼ I within ``tol``."""
    return Effect(_square(e, "effect"), tol)


def validate_density(rho: object, tol: float | None = None) -> DensityOperator:
    """Check Hermiticity, positivity and unit trace within ``tol``."""
    return DensityOperator(_square(rho, "density operator"), tol)


def pure_state(vector: object) -> DensityOperator:
    """|v⟩⟨v| for a vector normalised here."""
    v = as_matrix(vector).reshape(-1, 1)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise NotDensityError("pure state needs a non-zero vector")
    v = v / norm
    return DensityOperator(frozen(v @ dagger(v)))


def kraus_map(
    kraus: Sequence[object], dim_in: int | None = None, dim_out: int | None = None
) -> KrausMap:
    """Freeze a Kraus family, checking every operator shares one shape."""
    if len(kraus) == 0:
        raise InputError("Kraus family must be non-empty")
    ops = tuple(as_matrix(k) for k in kraus)
    rows, cols = ops[0].shape
    dim_out = rows if dim_out is None else dim_out
    dim_in = cols if dim_in is None else dim_in
    if not (is_positive_int(dim_in) and is_positive_int(dim_out)):
        raise DimensionMismatchError(f"Kraus dimensions must be positive, got {dim_in}, {dim_out}")
    for idx, k in enumerate(ops):
        if not has_shape(k, dim_out, dim_in):
            raise DimensionMismatchError(
                f"Kraus operator {idx} has shape {k.shape}, expected ({dim_out}, {dim_in})"
            )
    return KrausMap(dim_in=dim_in, dim_out=dim_out, kraus=ops)


def unitality_residual(m: KrausMap) -> float:
    """‖Σ V†V − I‖_∞."""
    gram = sum(dagger(k) @ k for k in m.kraus)
    return max_abs(gram - np.eye(m.dim_in))


def check_unital(m: KrausMap, tol: float | None = None) -> bool:
    return unitality_residual(m) <= resolve_tol(tol)


def _expectation(m: KrausMap, d_a: int, d_b: int) -> None:
    if not (is_positive_int(d_a) and is_positive_int(d_b)):
        raise DimensionMismatchError(f"expectation sides must be positive, got {d_a}, {d_b}")
    if m.dim_in != d_a or m.dim_out != d_a * d_b:
        raise DimensionMismatchError(
            f"Kraus shape ({m.dim_out}, {m.dim_in}) does not fit d_a={d_a}, d_b={d_b}: "
            f"expected ({d_a * d_b}, {d_a})"
        )


def transition_expectation(
    kraus: Sequence[object] | KrausMap, d_a: int, d_b: int, tol: float | None = None
) -> TransitionExpectation:
    m = kraus if isinstance(kraus, KrausMap) else kraus_map(kraus)
    _expectation(m, d_a, d_b)
    residual = unitality_residual(m)
    if residual > resolve_tol(tol):
        raise NotUnitalError(f"map not unital: residual {residual:.1e}")
    return TransitionExpectation(map=m, d_a=d_a, d_b=d_b)


def isometry_expectation(
    v: object, d_a: int, d_b: int, tol: float | None = None
) -> TransitionExpectation:
    """Single-Kraus expectation X ↦ V†XV."""
    m = kraus_map([v])
    _expectation(m, d_a, d_b)
    residual = unitality_residual(m)
    if residual > resolve_tol(tol):
        raise NotIsometryError(f"V is not an isometry: ‖V†V − I‖_∞ = {residual:.3e}")
    return TransitionExpectation(map=m, d_a=d_a, d_b=d_b)


def apply_heisenberg(e: TransitionExpectation, x: object) -> ComplexMatrix:
    """Σ V†XV, an operator of side d_a."""
    x = as_matrix(x)
    side = e.d_a * e.d_b
    if not has_shape(x, side, side):
        raise DimensionMismatchError(
            f"Heisenberg input must have side {side}, got shape {x.shape}"
        )
    return e.map.apply_dual(x)


def apply_schrodinger(e: TransitionExpectation, rho: DensityOperator) -> DensityOperator:
    """Σ VρV†, a density operator of side d_a·d_b."""
    if rho.side != e.d_a:
        raise DimensionMismatchError(
            f"Schrödinger input must have side {e.d_a}, got {rho.side}"
        )
    return DensityOperator(e.map.apply(rho.matrix), rho.tolerance)


def duality_residual(e: TransitionExpectation, rho: DensityOperator, x: object) -> float:
    """|Tr(E_*(ρ)X) − Tr(ρE(X))|."""
    x = as_matrix(x)
    lhs = np.trace(apply_schrodinger(e, rho).matrix @ x)
    rhs = np.trace(rho.matrix @ apply_heisenberg(e, x))
    return float(abs(lhs - rhs))


def choi(m: KrausMap) -> ComplexMatrix:
    """(id ⊗ Φ)(|Ω⟩⟨Ω|) with the unnormalised |Ω⟩ = Σ|i⟩⊗|i⟩."""
    side = m.dim_in * m.dim_out
    j = np.zeros((side, side), dtype=np.complex128)
    for k in m.kraus:
        # (I⊗K)|Ω⟩ has entry K[o, i] at index i*dim_out + o
        vec = k.T.reshape(-1, 1)
        j += vec @ dagger(vec)
    return frozen(j)
