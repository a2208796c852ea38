"""Choi-difference trace norms and the diamond / success-probability brackets.

For maps with input dimension d the diamond distance satisfies
‖J₁ − J₂‖₁ / d ≤ ‖Φ₁ − Φ₂‖_⋄ ≤ ‖J₁ − J₂‖₁, and the optimal one-shot success
probability for telling two channels apart is 1/2 + ‖Φ₁ − Φ₂‖_⋄ / 4.
"""

from dataclasses import dataclass

from hqmm.errors import InputError
from hqmm.services.numkernel import resolve_tol, trace_norm_hermitian
from hqmm.services.quantum_core import KrausMap, check_unital, choi
from hqmm.utils.logger import logger


class ChannelPairError(InputError):
    """Raised when two maps do not share input and output dimensions."""

    pass


@dataclass(frozen=True)
class ChannelPair:
    first: KrausMap
    second: KrausMap

    def __post_init__(self) -> None:
        a, b = self.first, self.second
        if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
            raise ChannelPairError(
                f"maps differ in shape: ({a.dim_in} → {a.dim_out}) vs ({b.dim_in} → {b.dim_out})"
            )

    @property
    def d_in(self) -> int:
        return self.first.dim_in


@dataclass(frozen=True)
class DiamondBracket:
    lower: float
    upper: float
    choi_trace_norm: float
    d_in: int


@dataclass(frozen=True)
class SuccessBracket:
    """One-shot success probability bracket; ``advisory`` marks non-channel inputs."""

    lower: float
    upper: float
    advisory: bool


def choi_difference_trace_norm(pair: ChannelPair, tol: float | None = None) -> float:
    return trace_norm_hermitian(choi(pair.first) - choi(pair.second), tol)


def diamond_bounds(pair: ChannelPair, tol: float | None = None) -> DiamondBracket:
    norm = choi_difference_trace_norm(pair, tol)
    return DiamondBracket(
        lower=norm / pair.d_in, upper=norm, choi_trace_norm=norm, d_in=pair.d_in
    )


def _clamp(p: float) -> float:
    return min(max(p, 0.5), 1.0)


def success_probability_bracket(pair: ChannelPair, tol: float | None = None) -> SuccessBracket:
    tol = resolve_tol(tol)
    bracket = diamond_bounds(pair, tol)
    advisory = not (check_unital(pair.first, tol) and check_unital(pair.second, tol))
    if advisory:
        logger.warning(
            "Success bracket computed for maps that are not trace-preserving; "
            "the one-shot interpretation assumes channels"
        )
    return SuccessBracket(
        lower=_clamp(0.5 + bracket.lower / 4.0),
        upper=_clamp(0.5 + bracket.upper / 4.0),
        advisory=advisory,
    )
