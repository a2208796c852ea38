"""JSON documents read and written by the CLI, and CSV report rows.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists of them. Field order of the row models is the CSV column order.
"""

from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, PositiveInt

SCHEMA_VERSION = 1

ComplexNumber = tuple[FiniteFloat, FiniteFloat]
MatrixLiteral = Annotated[list[list[ComplexNumber]], Field(min_length=1)]
RealMatrix = Annotated[list[list[FiniteFloat]], Field(min_length=1)]


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION


class StepDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hidden_kraus: Annotated[list[MatrixLiteral], Field(min_length=1)]
    emission_kraus: Annotated[list[MatrixLiteral], Field(min_length=1)]


class ModelDocument(_Document):
    hidden_dim: PositiveInt
    output_dim: PositiveInt
    initial_state: MatrixLiteral
    steps: Annotated[list[StepDocument], Field(min_length=1)]
    architecture: Literal["conventional", "causal"]


class EffectPairDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hidden: MatrixLiteral
    output: MatrixLiteral


class EffectsDocument(_Document):
    effects: list[EffectPairDocument]


class HMMDocument(_Document):
    pi: Annotated[list[FiniteFloat], Field(min_length=1)]
    transitions: Annotated[list[RealMatrix], Field(min_length=1)]
    emissions: Annotated[list[RealMatrix], Field(min_length=1)]


class CompareRow(BaseModel):
    conv_prob: float
    caus_prob: float
    prob_diff: float


class SweepRow(BaseModel):
    theta: float
    conv_prob: float
    caus_prob: float
    prob_diff: float
    choi_trace_norm: float
    diamond_lower: float
    diamond_upper: float
    psucc_lower: float
    psucc_upper: float
    entropy_paper_formula: float
    entropy_psiF_computed: float  # noqa: N815
    entropy_psiG_computed: float  # noqa: N815


class ClaimRow(BaseModel):
    claim_id: str
    convention: str
    theta: float
    computed: str
    paper_value: str
    abs_deviation: float
    status: str
