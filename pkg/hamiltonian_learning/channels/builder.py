"""Declarative construction of gate channels from Lindblad segments."""
from typing import List, Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator

from logger import get_logger
from ..qcore import pauli_operator
from .superoperators import (LindbladSpec, PiecewiseGenerator, Superoperator, lambda_noise,
                             lindblad_generator, magnus2_propagator)

logger = get_logger(__name__)


class HamiltonianTerm(BaseModel):
    """coefficient * P for a Pauli label P such as ``XX``."""
    label: str = Field(..., description="Pauli label, one character per qubit")
    coefficient: float = Field(..., description="Real coefficient (energy units)")


class CollapseTerm(BaseModel):
    """Jump operator built from a label in {I, X, Y, Z, +, -} with rate gamma."""
    label: str = Field(..., description="Operator label, one character per qubit")
    rate: float = Field(..., ge=0.0, description="Rate gamma (1/time)")


class SegmentSpec(BaseModel):
    duration: float = Field(..., gt=0.0, description="Segment duration")
    hamiltonian: List[HamiltonianTerm] = Field(default_factory=list)
    collapse: List[CollapseTerm] = Field(default_factory=list)


class ChannelBuildSpec(BaseModel):
    """
    A piecewise-constant Lindblad schedule on ``qubits`` qubits.

    ``output`` selects whether the full gate channel or its reduction to the
    single-qubit SWAP noise map is produced.
    """
    qubits: int = Field(2, ge=1, le=4)
    segments: List[SegmentSpec] = Field(..., min_length=1)
    output: Literal["gate", "lambda-noise"] = Field("gate")

    @model_validator(mode="after")
    def _check_labels(self) -> "ChannelBuildSpec":
        for segment in self.segments:
            for term in [*segment.hamiltonian, *segment.collapse]:
                if len(term.label) != self.qubits:
                    raise ValueError(f"label {term.label!r} does not cover {self.qubits} qubits")
        if self.output == "lambda-noise" and self.qubits != 2:
            raise ValueError("lambda-noise output needs a two-qubit gate")
        return self


def segment_lindblad_spec(segment: SegmentSpec, qubits: int) -> LindbladSpec:
    dim = 2 ** qubits
    hamiltonian = np.zeros((dim, dim), dtype=complex)
    for term in segment.hamiltonian:
        hamiltonian += term.coefficient * pauli_operator(term.label)
    return LindbladSpec(
        hamiltonian=hamiltonian,
        collapse_operators=[pauli_operator(c.label) for c in segment.collapse],
        rates=[c.rate for c in segment.collapse],
    )


def build_channel(spec: ChannelBuildSpec) -> Superoperator:
    """Second-order Magnus propagator of the schedule, flagged and checked trace-preserving."""
    schedule = PiecewiseGenerator(segments=[
        (lindblad_generator(segment_lindblad_spec(segment, spec.qubits)), segment.duration)
        for segment in spec.segments
    ])
    gate = magnus2_propagator(schedule).flagged(trace_preserving=True, completely_positive=False).validate()
    logger.info(f"Built {spec.qubits}-qubit channel from {len(spec.segments)} segment(s)")
    if spec.output == "lambda-noise":
        return lambda_noise(gate).validate()
    return gate
