"""Dense complex linear algebra at small dimensions.

Matrices are read-only ``complex128`` ndarrays; every function returns a fresh
array. ``max_abs`` is the norm written ‖·‖_∞ throughout the package (largest
absolute entry).
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from hqmm.config import settings
from hqmm.errors import InputError, NumericFailure
from hqmm.utils.logger import logger
from hqmm.utils.validators import is_finite_array, is_positive_int, is_square

ComplexMatrix = np.ndarray
Factor = Literal["first", "second"]


class DimensionMismatchError(InputError):
    """Raised when operand sides do not fit the requested operation."""

    pass


class NonFiniteError(InputError):
    """Raised when a NaN or infinite entry reaches a constructor."""

    pass


class NotHermitianError(InputError):
    """Raised when a matrix is not Hermitian within tolerance."""

    pass


class NotDensityError(InputError):
    """Raised when a matrix is not a density operator within tolerance."""

    pass


class ConvergenceError(NumericFailure):
    """Raised when the Jacobi iteration exceeds its sweep budget."""

    pass


@dataclass(frozen=True)
class HermitianEigenResult:
    eigenvalues: np.ndarray
    eigenvectors: ComplexMatrix


def frozen(m: np.ndarray) -> ComplexMatrix:
    m.flags.writeable = False
    return m


def resolve_tol(tol: float | None) -> float:
    return settings.tolerance if tol is None else tol


def complex_scalar(re: float, im: float = 0.0) -> complex:
    """Build a finite complex scalar."""
    if not (math.isfinite(re) and math.isfinite(im)):
        raise NonFiniteError(f"complex scalar must be finite, got ({re}, {im})")
    return complex(re, im)


def as_matrix(data: object) -> ComplexMatrix:
    """Copy ``data`` into a read-only complex matrix.

    A 1-D input is read as a column vector.
    """
    m = np.array(data, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatchError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not is_finite_array(m):
        raise NonFiniteError("matrix contains NaN or infinite entries")
    return frozen(m)


def identity(d: int) -> ComplexMatrix:
    return frozen(np.eye(d, dtype=np.complex128))


def max_abs(m: np.ndarray) -> float:
    """Largest absolute entry (the ‖·‖_∞ of this package)."""
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def dagger(m: np.ndarray) -> ComplexMatrix:
    return frozen(np.conj(np.asarray(m)).T.copy())


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Tensor product; entry ((i*b.rows+k), (j*b.cols+l)) is a[i,j]*b[k,l]."""
    return frozen(np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)))


def partial_trace(m: ComplexMatrix, dim_a: int, dim_b: int, which: Factor) -> ComplexMatrix:
    """Trace out the ``which`` factor of an operator on C^dim_a ⊗ C^dim_b."""
    if not (is_positive_int(dim_a) and is_positive_int(dim_b)):
        raise DimensionMismatchError(f"factor dimensions must be positive, got {dim_a}, {dim_b}")
    m = np.asarray(m)
    side = dim_a * dim_b
    if not is_square(m) or m.shape[0] != side:
        raise DimensionMismatchError(
            f"partial trace expects a square matrix of side {side} ({dim_a}x{dim_b}), "
            f"got shape {m.shape}"
        )
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if which == "first":
        out = np.einsum("ikil->kl", t)
    elif which == "second":
        out = np.einsum("ikjk->ij", t)
    else:
        raise InputError(f"which must be 'first' or 'second', got {which!r}")
    return frozen(np.array(out, dtype=np.complex128))


def _jacobi_rotation(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] in place with a complex Jacobi rotation."""
    apq = a[p, q]
    r = abs(apq)
    if r == 0.0:
        return
    phase = apq / r
    app = a[p, p].real
    aqq = a[q, q].real
    theta = (aqq - app) / (2.0 * r)
    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    # W = diag(1, conj(phase)) @ [[c, s], [-s, c]]
    w = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=np.complex128)
    idx = [p, q]
    a[:, idx] = a[:, idx] @ w
    a[idx, :] = np.conj(w).T @ a[idx, :]
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ w


def _off_diagonal_mass(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(a: ComplexMatrix, tol: float | None = None) -> HermitianEigenResult:
    """Diagonalise a Hermitian matrix with cyclic complex Jacobi sweeps.

    Eigenvalues are ascending; eigenvectors are the columns of the result.
    Within a degenerate cluster the eigenvector order is unspecified.
    """
    tol = resolve_tol(tol)
    a = np.asarray(a, dtype=np.complex128)
    if not is_square(a):
        raise DimensionMismatchError(f"eigendecomposition needs a square matrix, got {a.shape}")
    if not is_finite_array(a):
        raise NonFiniteError("matrix contains NaN or infinite entries")
    asymmetry = max_abs(a - np.conj(a).T)
    if asymmetry > tol:
        raise NotHermitianError(
            f"matrix is not Hermitian: ‖A − A†‖_∞ = {asymmetry:.3e} > {tol:.1e}"
        )

    n = a.shape[0]
    work = (a + np.conj(a).T) / 2.0
    vecs = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(work)))
    threshold = max(1e-3 * tol * scale, 64 * np.finfo(float).eps * scale)

    sweeps = 0
    while _off_diagonal_mass(work) > threshold:
        if sweeps >= settings.jacobi_max_sweeps:
            raise ConvergenceError(
                f"Jacobi iteration did not converge after {sweeps} sweeps "
                f"(off-diagonal mass {_off_diagonal_mass(work):.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotation(work, vecs, p, q)
        sweeps += 1
    logger.debug(f"Jacobi converged in {sweeps} sweeps (side {n})")

    eigenvalues = np.real(np.diag(work)).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return HermitianEigenResult(
        eigenvalues=frozen(eigenvalues[order]),
        eigenvectors=frozen(vecs[:, order].copy()),
    )


def eigenvalues_hermitian(a: ComplexMatrix, tol: float | None = None) -> np.ndarray:
    return hermitian_eig(a, tol).eigenvalues


def trace_norm_hermitian(a: ComplexMatrix, tol: float | None = None) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return math.fsum(np.abs(eigenvalues_hermitian(a, tol)))


def von_neumann_entropy(rho: ComplexMatrix, tol: float | None = None) -> float:
    """Entropy −Σ λ log λ in nats; eigenvalues at or below ``tol`` contribute 0."""
    tol = resolve_tol(tol)
    rho = np.asarray(rho)
    evals = eigenvalues_hermitian(rho, tol)
    if evals[0] < -tol:
        raise NotDensityError(f"negative eigenvalue {evals[0]:.3e} below −{tol:.1e}")
    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > tol:
        raise NotDensityError(f"trace {trace!r} deviates from 1 by more than {tol:.1e}")
    kept = evals[evals > tol]
    s = float(-np.sum(kept * np.log(kept)))
    return min(max(s, 0.0), math.log(rho.shape[0]))


def binary_entropy(p: float) -> float:
    """−p log p − (1−p) log(1−p) with 0 log 0 = 0."""
    return -sum(x * math.log(x) for x in (p, 1.0 - p) if x > 0.0)


def convert_entropy(value_nats: float, base: str) -> float:
    if base == "nat":
        return value_nats
    if base == "bit":
        return value_nats / math.log(2)
    raise InputError(f"log base must be 'nat' or 'bit', got {base!r}")


def random_hermitian(rng: np.random.Generator, d: int) -> ComplexMatrix:
    """Complex standard-normal entries, Hermitised as (X + X†)/2."""
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return frozen((x + np.conj(x).T) / 2.0)
