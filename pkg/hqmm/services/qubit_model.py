"""The two-level HQMM driven by an x-rotation, its Kraus/Choi objects and claim report.

The hidden step is the single-Kraus isometry built from
U = cos(θ/2) I − i sin(θ/2) σ_x, the emission is the sharp measurement
V|j⟩ = |j⟩⊗|e_j⟩. Two readings of where U|ψ⟩ is written are supported: the
``first`` slot convention V|ψ⟩ = U|ψ⟩⊗|0⟩ and the ``second`` slot convention
V|ψ⟩ = |0⟩⊗U|ψ⟩.
"""

import math
from dataclasses import dataclass
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

from hqmm.config import settings
from hqmm.errors import InputError
from hqmm.services.block_maps import (
    Architecture,
    EffectSequence,
    HQMMModel,
    HQMMStep,
    block_superoperator,
    canonical_dual,
    compare_architectures,
    kraus_superoperator,
)
from hqmm.services.discrimination import ChannelPair, choi_difference_trace_norm, diamond_bounds
from hqmm.services.numkernel import (
    ComplexMatrix,
    NonFiniteError,
    as_matrix,
    binary_entropy,
    convert_entropy,
    dagger,
    eigenvalues_hermitian,
    frozen,
    identity,
    kron,
    max_abs,
    partial_trace,
    resolve_tol,
    von_neumann_entropy,
)
from hqmm.services.quantum_core import (
    DensityOperator,
    Effect,
    apply_heisenberg,
    isometry_expectation,
    kraus_map,
)
from hqmm.utils.logger import logger

SIGMA_X = as_matrix([[0, 1], [1, 0]])
KET0 = as_matrix([1, 0])
PROJ0 = as_matrix([[1, 0], [0, 0]])

CLAIM_REGISTRY: tuple[str, ...] = (
    "emission_effect_projection",
    "conventional_dual_marginal",
    "causal_dual_marginal",
    "one_step_duals_differ",
    "cylinder_separation",
    "kraus_conventional",
    "kraus_causal",
    "choi_vectors",
    "choi_states_differ",
    "diamond_distance_positive",
    "choi_reduced_spectrum",
    "choi_entanglement_entropy",
    "entropy_strict_bound",
)


class SlotConvention(StrEnum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class QubitModelParams:
    theta: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta):
            raise NonFiniteError(f"theta must be finite, got {self.theta!r}")


@dataclass(frozen=True)
class ClaimRecord:
    """One checked statement.

    ``abs_deviation`` is the quantity the status was decided on: the residual
    for equality claims, the witnessed gap for inequality claims.
    """

    claim_id: str
    convention: SlotConvention
    theta: float
    computed: str
    paper_value: str
    abs_deviation: float
    status: str
    tolerance: float


@dataclass(frozen=True)
class ClaimReport:
    records: tuple[ClaimRecord, ...]

    def get(self, claim_id: str, convention: SlotConvention | str) -> ClaimRecord:
        for record in self.records:
            if record.claim_id == claim_id and record.convention == convention:
                return record
        raise KeyError((claim_id, convention))

    @property
    def mismatches(self) -> tuple[ClaimRecord, ...]:
        return tuple(r for r in self.records if r.status == "mismatch")


@dataclass(frozen=True)
class EntanglementAnalysis:
    entropy_f: float
    entropy_g: float
    schmidt_f: tuple[float, ...]
    schmidt_g: tuple[float, ...]
    paper_entropy: float
    tolerance: float

    @staticmethod
    def _rank(coefficients: tuple[float, ...], tol: float) -> int:
        return sum(1 for c in coefficients if c * c > tol)

    @property
    def schmidt_rank_f(self) -> int:
        return self._rank(self.schmidt_f, self.tolerance)

    @property
    def schmidt_rank_g(self) -> int:
        return self._rank(self.schmidt_g, self.tolerance)


def build_unitary(theta: float) -> ComplexMatrix:
    """cos(θ/2) I − i sin(θ/2) σ_x."""
    QubitModelParams(theta)
    return frozen(math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * SIGMA_X)


def hidden_isometry(theta: float, convention: SlotConvention | str) -> ComplexMatrix:
    u = build_unitary(theta)
    if SlotConvention(convention) is SlotConvention.FIRST:
        return kron(u, KET0)
    return kron(KET0, u)


def sharp_emission() -> ComplexMatrix:
    """V|j⟩ = |j⟩⊗|e_j⟩."""
    v = np.zeros((4, 2), dtype=np.complex128)
    v[0, 0] = v[3, 1] = 1.0
    return frozen(v)


def build_model(
    params: QubitModelParams, convention: SlotConvention | str = SlotConvention.FIRST
) -> HQMMStep:
    hidden = isometry_expectation(hidden_isometry(params.theta, convention), 2, 2)
    emission = isometry_expectation(sharp_emission(), 2, 2)
    return HQMMStep(hidden=hidden, emission=emission)


def initial_state() -> DensityOperator:
    return DensityOperator(PROJ0)


def separation_effects(length: int = 1) -> EffectSequence:
    """(I, |e₀⟩⟨e₀|) followed by identity pairs."""
    if length < 1:
        raise InputError(f"effect sequence length must be at least 1, got {length}")
    first = (Effect(identity(2)), Effect(PROJ0))
    rest = EffectSequence.identities(2, 2, length - 1).pairs
    return EffectSequence((first, *rest))


def qubit_hqmm(
    theta: float,
    architecture: Architecture | str = Architecture.CONVENTIONAL,
    steps: int = 1,
    convention: SlotConvention | str = SlotConvention.FIRST,
) -> HQMMModel:
    step = build_model(QubitModelParams(theta), convention)
    return HQMMModel.homogeneous(initial_state(), step, steps, architecture)


def theta_grid(
    points: int | None = None, lo: float | None = None, hi: float | None = None
) -> np.ndarray:
    """Evenly spaced θ values, ascending, both endpoints included."""
    points = settings.theta_grid_points if points is None else points
    lo = settings.theta_grid_min if lo is None else lo
    hi = settings.theta_grid_max if hi is None else hi
    if points < 2:
        raise InputError(f"theta grid needs at least 2 points, got {points}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InputError(f"theta grid needs finite min < max, got [{lo}, {hi}]")
    return np.linspace(lo, hi, points)


def paper_kraus_pair(theta: float) -> tuple[ComplexMatrix, ComplexMatrix]:
    """(K_F, K_G) = (|0⟩⟨0|U, U|0⟩⟨0|)."""
    u = build_unitary(theta)
    return frozen(PROJ0 @ u), frozen(u @ PROJ0)


def choi_vectors(theta: float) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Ψ_F = c|00⟩ − i s|10⟩ and Ψ_G = c|00⟩ − i s|01⟩ as 4×1 columns."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    psi_f = np.array([[c], [0.0], [-1j * s], [0.0]], dtype=np.complex128)
    psi_g = np.array([[c], [-1j * s], [0.0], [0.0]], dtype=np.complex128)
    return frozen(psi_f), frozen(psi_g)


def kraus_choi_vector(k: ComplexMatrix) -> ComplexMatrix:
    """(I⊗K)|Ω⟩ for |Ω⟩ = Σ|i⟩⊗|i⟩."""
    return frozen(np.asarray(k).T.reshape(-1, 1).copy())


def _reduced(psi: ComplexMatrix) -> ComplexMatrix:
    # trace out the output factor of |Ψ⟩⟨Ψ|
    return partial_trace(psi @ dagger(psi), 2, 2, "second")


def choi_entanglement_analysis(theta: float, tol: float | None = None) -> EntanglementAnalysis:
    tol = resolve_tol(tol)
    psi_f, psi_g = choi_vectors(theta)
    reduced_f, reduced_g = _reduced(psi_f), _reduced(psi_g)

    def schmidt(reduced: ComplexMatrix) -> tuple[float, ...]:
        evals = eigenvalues_hermitian(reduced, tol)
        return tuple(float(math.sqrt(max(x, 0.0))) for x in evals[::-1])

    return EntanglementAnalysis(
        entropy_f=von_neumann_entropy(reduced_f, tol),
        entropy_g=von_neumann_entropy(reduced_g, tol),
        schmidt_f=schmidt(reduced_f),
        schmidt_g=schmidt(reduced_g),
        paper_entropy=binary_entropy(math.cos(theta / 2) ** 2),
        tolerance=tol,
    )


def _num(x: float) -> str:
    return f"{x:.17g}"


def _mat(m: np.ndarray) -> str:
    def entry(z: complex) -> str:
        z = complex(z)
        if z.imag == 0.0:
            return f"{z.real:.6g}"
        return f"{z.real:.6g}{z.imag:+.6g}i"

    rows = ("[" + " ".join(entry(z) for z in row) + "]" for row in np.asarray(m))
    return "[" + " ".join(rows) + "]"


def _one_step_duals(step: HQMMStep, rho: ComplexMatrix) -> tuple[ComplexMatrix, ComplexMatrix]:
    duals = []
    for arch in (Architecture.CONVENTIONAL, Architecture.CAUSAL):
        dual = canonical_dual(block_superoperator(step, identity(2), PROJ0, arch))
        duals.append(dual.apply(rho))
    return duals[0], duals[1]


def _claims_for(
    theta: float, convention: SlotConvention, tol: float, log_base: str
) -> list[ClaimRecord]:
    step = build_model(QubitModelParams(theta), convention)
    u = build_unitary(theta)
    psi_theta = u @ KET0
    k_f, k_g = paper_kraus_pair(theta)
    psi_f, psi_g = choi_vectors(theta)
    records: list[ClaimRecord] = []

    def equal(claim_id: str, computed: str, paper: str, residual: float) -> None:
        status = "match" if residual <= tol else "mismatch"
        records.append(
            ClaimRecord(claim_id, convention, theta, computed, paper, residual, status, tol)
        )

    def positive(claim_id: str, computed: str, paper: str, gap: float) -> None:
        status = "match" if gap > tol else "mismatch"
        records.append(ClaimRecord(claim_id, convention, theta, computed, paper, gap, status, tol))

    projected = apply_heisenberg(step.emission, kron(identity(2), PROJ0))
    equal("emission_effect_projection", _mat(projected), _mat(PROJ0), max_abs(projected - PROJ0))

    f_star, g_star = _one_step_duals(step, PROJ0)
    target = psi_theta @ dagger(psi_theta)
    equal("conventional_dual_marginal", _mat(f_star), _mat(target), max_abs(f_star - target))
    # proportional to |0⟩⟨0|: everything outside the (0, 0) entry vanishes
    equal(
        "causal_dual_marginal",
        _mat(g_star),
        "c*|0><0|",
        max_abs(g_star - g_star[0, 0] * PROJ0),
    )
    positive(
        "one_step_duals_differ",
        f"max|F*-G*| = {_num(max_abs(f_star - g_star))}",
        "F* != G*",
        max_abs(f_star - g_star),
    )

    conv, caus, diff = compare_architectures(
        initial_state(), [step], separation_effects(1), tol
    )
    positive("cylinder_separation", f"({_num(conv)}; {_num(caus)})", "conv != caus", diff)

    for claim_id, arch, k in (
        ("kraus_conventional", Architecture.CONVENTIONAL, k_f),
        ("kraus_causal", Architecture.CAUSAL, k_g),
    ):
        dual = canonical_dual(block_superoperator(step, PROJ0, PROJ0, arch))
        expected = kraus_superoperator(kraus_map([k]))
        equal(
            claim_id,
            f"dual on |0><0| = {_mat(dual.apply(PROJ0))}",
            f"K = {_mat(k)}",
            max_abs(dual.matrix - expected.matrix),
        )

    derived_f, derived_g = kraus_choi_vector(k_f), kraus_choi_vector(k_g)
    equal(
        "choi_vectors",
        f"{_mat(derived_f.T)} {_mat(derived_g.T)}",
        f"{_mat(psi_f.T)} {_mat(psi_g.T)}",
        max(max_abs(derived_f - psi_f), max_abs(derived_g - psi_g)),
    )

    pair = ChannelPair(kraus_map([k_f]), kraus_map([k_g]))
    norm = choi_difference_trace_norm(pair, tol)
    positive("choi_states_differ", _num(norm), "omega_F != omega_G", norm)

    bracket = diamond_bounds(pair, tol)
    positive(
        "diamond_distance_positive",
        f"[{_num(bracket.lower)}; {_num(bracket.upper)}]",
        "lower > 0",
        bracket.lower,
    )

    c2 = math.cos(theta / 2) ** 2
    claimed = np.sort([c2, 1.0 - c2])
    spectra = [eigenvalues_hermitian(_reduced(psi), tol) for psi in (psi_f, psi_g)]
    equal(
        "choi_reduced_spectrum",
        " ".join(_mat(np.atleast_2d(s)) for s in spectra),
        _mat(np.atleast_2d(claimed)),
        max(float(np.max(np.abs(s - claimed))) for s in spectra),
    )

    analysis = choi_entanglement_analysis(theta, tol)
    paper_h = convert_entropy(analysis.paper_entropy, log_base)
    s_f = convert_entropy(analysis.entropy_f, log_base)
    s_g = convert_entropy(analysis.entropy_g, log_base)
    equal(
        "choi_entanglement_entropy",
        f"S_F = {_num(s_f)}; S_G = {_num(s_g)}; schmidt ranks "
        f"{analysis.schmidt_rank_f}/{analysis.schmidt_rank_g}",
        _num(paper_h),
        max(abs(s_f - paper_h), abs(s_g - paper_h)),
    )

    bound = convert_entropy(math.log(2), log_base)
    positive(
        "entropy_strict_bound",
        _num(paper_h),
        f"0 < h < {_num(bound)}",
        min(paper_h, bound - paper_h),
    )
    return records


def verify_paper_claims(
    theta: float, tol: float | None = None, log_base: str | None = None
) -> ClaimReport:
    """Recompute every registered claim under both slot conventions.

    Mismatches are data: they are logged as warnings and never raised.
    """
    tol = resolve_tol(tol)
    log_base = settings.log_base if log_base is None else log_base
    theta = QubitModelParams(float(theta)).theta
    if not 0.0 < abs(theta) < math.pi:
        logger.warning(f"theta={theta!r} is outside 0 < |θ| < π; separation claims cannot hold")

    records: list[ClaimRecord] = []
    for convention in SlotConvention:
        records.extend(_claims_for(theta, convention, tol, log_base))

    report = ClaimReport(tuple(records))
    for record in report.mismatches:
        logger.warning(
            f"claim {record.claim_id} ({record.convention}) mismatch at theta={theta!r}: "
            f"computed {record.computed} vs {record.paper_value}"
        )
    logger.info(
        f"Checked {len(CLAIM_REGISTRY)} claims x {len(SlotConvention)} conventions at "
        f"theta={theta!r}: {len(report.mismatches)} mismatches"
    )
    return report

