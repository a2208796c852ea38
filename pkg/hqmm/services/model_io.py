"""Reading and writing model, effects and HMM documents; CSV report output."""

import csv
import json
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from typing import IO, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from hqmm.config import settings
from hqmm.errors import HQMMError, InputError, NumericFailure
from hqmm.models.documents import (
    EffectPairDocument,
    EffectsDocument,
    HMMDocument,
    ModelDocument,
    StepDocument,
)
from hqmm.services.block_maps import Architecture, EffectSequence, HQMMModel, HQMMStep
from hqmm.services.classical_lift import ClassicalHMM, validate_hmm
from hqmm.services.numkernel import ComplexMatrix, as_matrix
from hqmm.services.quantum_core import transition_expectation, validate_density
from hqmm.utils.logger import logger

DocumentT = TypeVar("DocumentT", bound=BaseModel)


class DocumentParseError(InputError):
    """Raised when a document cannot be turned into a validated value."""

    pass


def _load(text: str | bytes, document: type[DocumentT]) -> DocumentT:
    try:
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        data = json.loads(text)
    except UnicodeDecodeError as e:
        raise DocumentParseError(f"document is not valid UTF-8: {e}") from e
    except json.JSONDecodeError as e:
        raise DocumentParseError(
            f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    except ValueError as e:
        raise DocumentParseError(f"invalid JSON: {e}") from e
    except RecursionError as e:
        raise DocumentParseError("document nesting is too deep") from e

    try:
        return document.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}"
            for err in e.errors()
        )
        raise DocumentParseError(f"{document.__name__} schema error: {problems}") from e


def _matrix(literal: list[list[tuple[float, float]]], what: str) -> ComplexMatrix:
    widths = {len(row) for row in literal}
    if len(widths) != 1 or 0 in widths:
        raise DocumentParseError(f"{what} has ragged or empty rows")
    parts = np.array(literal, dtype=float)
    # assign parts separately so signed zeros survive a round trip
    out = np.empty(parts.shape[:2], dtype=np.complex128)
    out.real = parts[..., 0]
    out.imag = parts[..., 1]
    return as_matrix(out)


def _literal(m: np.ndarray) -> list[list[tuple[float, float]]]:
    return [[(float(z.real), float(z.imag)) for z in row] for row in np.asarray(m)]


@contextmanager
def _guard(prefix: str) -> Iterator[None]:
    """Re-raise input failures inside a parse as DocumentParseError prefixed by ``prefix``.

    NumericFailure passes through unchanged.
    """
    try:
        yield
    except (DocumentParseError, NumericFailure):
        raise
    except (HQMMError, ValueError, TypeError, ArithmeticError) as e:
        raise DocumentParseError(f"{prefix} {e}") from e


def parse_model(text: str | bytes, tol: float | None = None) -> HQMMModel:
    doc = _load(text, ModelDocument)
    n, m = doc.hidden_dim, doc.output_dim

    with _guard("initial_state:"):
        initial = validate_density(_matrix(doc.initial_state, "initial_state"), tol)
    if initial.side != n:
        raise DocumentParseError(f"initial_state has side {initial.side}, expected {n}")

    steps: list[HQMMStep] = []
    for idx, step_doc in enumerate(doc.steps):
        with _guard(f"step {idx} hidden"):
            kraus = [_matrix(k, f"step {idx} hidden Kraus") for k in step_doc.hidden_kraus]
            hidden = transition_expectation(kraus, n, n, tol)
        with _guard(f"step {idx} emission"):
            kraus = [_matrix(k, f"step {idx} emission Kraus") for k in step_doc.emission_kraus]
            emission = transition_expectation(kraus, n, m, tol)
        with _guard(f"step {idx}:"):
            steps.append(HQMMStep(hidden=hidden, emission=emission))

    with _guard("model:"):
        model = HQMMModel(initial, tuple(steps), Architecture(doc.architecture))
    logger.debug(f"Parsed model: N={n}, M={m}, {len(steps)} steps, {model.architecture}")
    return model


def serialize_model(model: HQMMModel) -> str:
    doc = ModelDocument(
        hidden_dim=model.hidden_dim,
        output_dim=model.output_dim,
        initial_state=_literal(model.initial_state.matrix),
        steps=[
            StepDocument(
                hidden_kraus=[_literal(k) for k in step.hidden.map.kraus],
                emission_kraus=[_literal(k) for k in step.emission.map.kraus],
            )
            for step in model.steps
        ],
        architecture=model.architecture.value,
    )
    return doc.model_dump_json(indent=2)


def parse_effects(text: str | bytes, tol: float | None = None) -> EffectSequence:
    doc = _load(text, EffectsDocument)
    pairs = []
    for idx, pair in enumerate(doc.effects):
        with _guard(f"effect pair {idx}:"):
            hidden = _matrix(pair.hidden, f"effect {idx} hidden")
            pairs.append((hidden, _matrix(pair.output, f"effect {idx} output")))
    with _guard("effects:"):
        return EffectSequence.from_matrices(pairs, tol)


def serialize_effects(effects: EffectSequence) -> str:
    doc = EffectsDocument(
        effects=[
            EffectPairDocument(hidden=_literal(a.matrix), output=_literal(b.matrix))
            for a, b in effects.pairs
        ]
    )
    return doc.model_dump_json(indent=2)


def parse_hmm(text: str | bytes, tol: float | None = None) -> ClassicalHMM:
    doc = _load(text, HMMDocument)
    with _guard("hmm:"):
        return validate_hmm(doc, tol)


def serialize_hmm(hmm: ClassicalHMM) -> str:
    doc = HMMDocument(
        pi=hmm.initial.tolist(),
        transitions=[t.tolist() for t in hmm.transitions],
        emissions=[q.tolist() for q in hmm.emissions],
    )
    return doc.model_dump_json(indent=2)


def format_number(value: float, digits: int | None = None) -> str:
    """'.' decimal, no grouping, ``digits`` significant digits."""
    digits = settings.csv_digits if digits is None else digits
    return f"{value:.{digits}g}"


def write_csv(stream: IO[str], row_type: type[BaseModel], rows: Iterable[BaseModel]) -> int:
    """Write a header plus one line per row, LF-terminated; returns the row count."""
    columns = list(row_type.model_fields)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    count = 0
    for row in rows:
        values = row.model_dump()
        writer.writerow(
            format_number(values[c]) if isinstance(values[c], float) else values[c]
            for c in columns
        )
        count += 1
    return count
