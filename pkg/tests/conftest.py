"""Shared fixtures and random generators for the test suites."""

import numpy as np
import pytest

from hqmm.services.block_maps import HQMMStep
from hqmm.services.classical_lift import ClassicalHMM, validate_hmm
from hqmm.services.quantum_core import (
    DensityOperator,
    KrausMap,
    TransitionExpectation,
    kraus_map,
    transition_expectation,
)

SEED = 20240917


def complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """rows × cols matrix with orthonormal columns."""
    q, _ = np.linalg.qr(complex_gaussian(rng, rows, cols))
    return q


def random_expectation(
    rng: np.random.Generator, d_a: int, d_b: int, rank: int = 2
) -> TransitionExpectation:
    """Unital expectation whose Kraus family stacks into one isometry."""
    side = d_a * d_b
    v = random_isometry(rng, rank * side, d_a)
    kraus = [v[r * side : (r + 1) * side] for r in range(rank)]
    return transition_expectation(kraus, d_a, d_b)


def random_step(rng: np.random.Generator, n: int, m: int, rank: int = 2) -> HQMMStep:
    return HQMMStep(
        hidden=random_expectation(rng, n, n, rank), emission=random_expectation(rng, n, m, rank)
    )


def random_kraus_map(rng: np.random.Generator, dim_in: int, dim_out: int, rank: int) -> KrausMap:
    """Generic CP map, not trace-preserving."""
    return kraus_map([complex_gaussian(rng, dim_out, dim_in) for _ in range(rank)])


def random_channel(rng: np.random.Generator, dim_in: int, dim_out: int, rank: int) -> KrausMap:
    v = random_isometry(rng, rank * dim_out, dim_in)
    return kraus_map([v[r * dim_out : (r + 1) * dim_out] for r in range(rank)])


def random_density_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    g = complex_gaussian(rng, d, d)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_density(rng: np.random.Generator, d: int) -> DensityOperator:
    return DensityOperator(random_density_matrix(rng, d))


def random_psd(rng: np.random.Generator, d: int) -> np.ndarray:
    g = complex_gaussian(rng, d, d)
    return g @ g.conj().T


def random_stochastic(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Row-stochastic matrix, with some exact zeros."""
    p = rng.random((rows, cols))
    p[rng.random((rows, cols)) < 0.2] = 0.0
    p[np.arange(rows), rng.integers(0, cols, rows)] += 0.1
    return p / p.sum(axis=1, keepdims=True)


def random_hmm(rng: np.random.Generator, n: int, m: int, steps: int) -> ClassicalHMM:
    return validate_hmm(
        {
            "pi": random_stochastic(rng, 1, n)[0],
            "transitions": [random_stochastic(rng, n, n) for _ in range(steps)],
            "emissions": [random_stochastic(rng, n, m) for _ in range(steps)],
        }
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


@pytest.fixture
def example_hmm() -> ClassicalHMM:
    """Two hidden states, two outputs, one step."""
    return ClassicalHMM.homogeneous(
        [0.6, 0.4], [[0.7, 0.3], [0.4, 0.6]], [[0.9, 0.1], [0.2, 0.8]], steps=1
    )
