"""
Simulated QLE / IQLE experiments.

The same code plays both roles: the untrusted system (evaluated once at the
true parameters to draw a datum) and the trusted simulator (evaluated over the
whole particle cloud to obtain likelihoods). Evaluation is batched over an
(M, d) array of parameters.
"""
from typing import Literal, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, model_validator

from exceptions import DimensionMismatch, InvalidDesign, UnsupportedChannelError
from logger import get_logger
from ..channels import Superoperator, is_trace_preserving, tensor_superops
from ..models import HamiltonianFamily, build_hamiltonian, build_hamiltonians
from ..qcore import (apply_unitary, evolve_states, expm_hermitian, plus_state,
                     random_local_clifford, spectral_norm, stabilizer_state)

logger = get_logger(__name__)

PSI0 = 0
PSI0_PERP = 1


class InitialStateSpec(BaseModel):
    """|+>^n, or C|0...0> for a random local Clifford C drawn from ``seed``."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["plus", "random-local-clifford"] = Field("plus")
    seed: Optional[int] = Field(None, ge=0, description="Seed of the Clifford draw")

    @model_validator(mode="after")
    def _check_seed(self) -> "InitialStateSpec":
        if self.kind == "random-local-clifford" and self.seed is None:
            raise ValueError("random-local-clifford initial states need a seed")
        return self


class ExperimentDesign(BaseModel):
    """One QLE or IQLE experiment: evolution time, inversion parameters, state and measurement."""
    model_config = ConfigDict(frozen=True)

    protocol: Literal["QLE", "IQLE"] = Field("IQLE")
    t: float = Field(..., gt=0.0, description="Evolution time (inverse energy units)")
    x_minus: Optional[Tuple[float, ...]] = Field(None, description="Inversion parameters (IQLE only)")
    initial_state: InitialStateSpec = Field(default_factory=InitialStateSpec)
    measurement: Literal["two-outcome", "product-basis"] = Field("two-outcome")

    @model_validator(mode="after")
    def _check_inversion(self) -> "ExperimentDesign":
        if (self.protocol == "IQLE") != (self.x_minus is not None):
            raise ValueError("x_minus must be given exactly when protocol is IQLE")
        return self

    def outcome_count(self, n: int) -> int:
        return 2 if self.measurement == "two-outcome" else 2 ** n


class OutcomeDatum(BaseModel):
    """Observed outcome: 0 = psi0, 1 = psi0-perp (two-outcome) or a basis index."""
    model_config = ConfigDict(frozen=True)

    outcome: int = Field(..., ge=0)
    design: Optional[ExperimentDesign] = None


class NoiseConfig(BaseModel):
    """
    Noise acting on an experiment.

    ``channel`` is either a single-qubit SWAP noise map (4x4, applied to each
    system qubit) or a channel on the whole register (4**n x 4**n).
    ``assumed_known`` tells the trusted simulator to model the noise too.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    depolarizing: float = Field(0.0, ge=0.0, le=1.0, description="Depolarizing strength N")
    channel: Optional[Superoperator] = Field(None, description="SWAP noise channel")
    assumed_known: bool = Field(True, description="Simulator knows the noise model")

    @model_validator(mode="after")
    def _check_channel(self) -> "NoiseConfig":
        if self.channel is not None and not is_trace_preserving(self.channel):
            raise ValueError("noise channel must be trace-preserving")
        return self

    def as_modelled(self) -> "NoiseConfig":
        """The noise the trusted simulator uses when computing likelihoods."""
        return self if self.assumed_known else NoiseConfig()


class LikelihoodMode(BaseModel):
    """Exact likelihoods, or frequencies from n_samples simulated draws."""
    model_config = ConfigDict(frozen=True)

    mode: Literal["exact", "sampled"] = Field("exact")
    n_samples: int = Field(160, ge=1, description="Draws per particle in sampled mode")


def initial_state(design: ExperimentDesign, n: int) -> np.ndarray:
    spec = design.initial_state
    if spec.kind == "plus":
        return plus_state(n)
    clifford = random_local_clifford(n, np.random.default_rng(spec.seed))
    return stabilizer_state(clifford, n)


def register_channel(noise: NoiseConfig, n: int) -> np.ndarray:
    """Supermatrix of the configured SWAP noise on the full n-qubit register."""
    if n != 2:
        raise UnsupportedChannelError(f"SWAP channel noise is supported for n = 2 only, got n = {n}", n=n)
    channel = noise.channel
    if channel.dim_in == 4:
        return tensor_superops(channel, channel).matrix
    if channel.dim_in == 4 ** n and channel.dim_out == 4 ** n:
        return channel.matrix
    raise DimensionMismatch(f"Channel of shape {channel.matrix.shape} does not act on {n} qubits")


def _inverse_evolution(design: ExperimentDesign, design_family: HamiltonianFamily) -> np.ndarray:
    """exp(+i H(x_minus) t); a phase vector for diagonal families."""
    h_minus = build_hamiltonian(design_family, design.x_minus)
    if h_minus.ndim == 1:
        return np.exp(1j * h_minus * design.t)
    return expm_hermitian(h_minus, -design.t)


def _depolarize(probabilities: np.ndarray, strength: float, n: int, measurement: str) -> np.ndarray:
    if strength == 0.0:
        return probabilities
    dim = 2 ** n
    if measurement == "two-outcome":
        p0 = probabilities[:, PSI0] * (1.0 - strength) + strength / dim
        return np.stack([p0, 1.0 - p0], axis=1)
    return probabilities * (1.0 - strength) + strength / dim


def outcome_distributions(
    xs: np.ndarray,
    design: ExperimentDesign,
    noise: NoiseConfig,
    family: HamiltonianFamily,
    design_family: Optional[HamiltonianFamily] = None,
) -> np.ndarray:
    """
    Outcome probabilities for every parameter row.

    Args:
        xs: (M, d) parameters of ``family`` (the evolving system)
        design: Experiment design
        noise: Noise applied to this evaluation
        family: Family generating the forward evolution exp(-i H(x) t)
        design_family: Family of ``design.x_minus`` (defaults to ``family``)

    Returns:
        (M, K) probabilities, rows summing to one
    """
    design_family = design_family or family
    n = family.n
    if design_family.n != n:
        raise InvalidDesign(f"Design acts on {design_family.n} qubits, system has {n}")
    if design.x_minus is not None and len(design.x_minus) != design_family.d:
        raise InvalidDesign(f"x_minus has {len(design.x_minus)} entries, {design_family.id} needs {design_family.d}")

    psi0 = initial_state(design, n)
    states = evolve_states(build_hamiltonians(family, xs), design.t, psi0)
    inverse = _inverse_evolution(design, design_family) if design.protocol == "IQLE" else None

    if noise.channel is not None:
        if inverse is None:
            raise InvalidDesign("SWAP channel noise only applies to IQLE experiments")
        probabilities = _channel_probabilities(states, psi0, inverse, register_channel(noise, n), design)
    else:
        if inverse is not None:
            states = apply_unitary(inverse, states)
        if design.measurement == "two-outcome":
            overlap = np.abs(np.einsum("mi,i->m", states, psi0.conj())) ** 2
            overlap = np.clip(overlap, 0.0, 1.0)
            probabilities = np.stack([overlap, 1.0 - overlap], axis=1)
        else:
            probabilities = np.abs(states) ** 2

    probabilities = _depolarize(probabilities, noise.depolarizing, n, design.measurement)
    probabilities = np.clip(probabilities, 0.0, 1.0)
    return probabilities / probabilities.sum(axis=1, keepdims=True)


def _channel_probabilities(
    states: np.ndarray, psi0: np.ndarray, inverse: np.ndarray, channel: np.ndarray, design: ExperimentDesign
) -> np.ndarray:
    m, dim = states.shape
    rhos = np.einsum("mi,mj->mij", states, states.conj()).reshape(m, dim * dim)
    rhos = np.einsum("ab,mb->ma", channel, rhos).reshape(m, dim, dim)
    if inverse.ndim == 1:
        rhos = rhos * inverse[np.newaxis, :, np.newaxis] * inverse.conj()[np.newaxis, np.newaxis, :]
    else:
        rhos = np.einsum("ij,mjk,lk->mil", inverse, rhos, inverse.conj())
    if design.measurement == "two-outcome":
        overlap = np.clip(np.real(np.einsum("i,mij,j->m", psi0.conj(), rhos, psi0)), 0.0, 1.0)
        return np.stack([overlap, 1.0 - overlap], axis=1)
    return np.clip(np.real(np.einsum("mii->mi", rhos)), 0.0, 1.0)


def outcome_distribution(
    x,
    design: ExperimentDesign,
    noise: NoiseConfig,
    family: HamiltonianFamily,
    design_family: Optional[HamiltonianFamily] = None,
) -> np.ndarray:
    """Outcome probabilities for a single parameter vector."""
    xs = np.asarray(x, dtype=float)[np.newaxis, :]
    return outcome_distributions(xs, design, noise, family, design_family)[0]


def sample_outcome(
    distribution: np.ndarray, rng: np.random.Generator, design: Optional[ExperimentDesign] = None
) -> OutcomeDatum:
    """Draw one outcome index by weight; rounding error below zero is clipped."""
    p = np.clip(np.asarray(distribution, dtype=float), 0.0, None)
    index = int(rng.choice(len(p), p=p / p.sum()))
    return OutcomeDatum(outcome=index, design=design)


def estimate_likelihoods(
    particles: np.ndarray,
    observed: OutcomeDatum,
    design: ExperimentDesign,
    noise: NoiseConfig,
    family: HamiltonianFamily,
    mode: LikelihoodMode = LikelihoodMode(),
    rng: Optional[np.random.Generator] = None,
    design_family: Optional[HamiltonianFamily] = None,
    n_jobs: int = 1,
) -> np.ndarray:
    """
    Pr(observed | x_j) for every particle.

    Exact mode reads the simulated distribution. Sampled mode returns the
    fraction of ``mode.n_samples`` simulated draws that reproduce the datum;
    particle j uses its own substream spawned from one seed drawn from ``rng``,
    so the values do not depend on how particles are split across workers.
    """
    if observed.outcome >= design.outcome_count(family.n):
        raise InvalidDesign(f"Outcome {observed.outcome} is not valid for {design.measurement} measurement")

    chunks = np.array_split(particles, max(1, min(n_jobs, len(particles))))
    if len(chunks) == 1:
        distributions = outcome_distributions(particles, design, noise, family, design_family)
    else:
        parts = Parallel(n_jobs=len(chunks), prefer="threads")(
            delayed(outcome_distributions)(chunk, design, noise, family, design_family) for chunk in chunks
        )
        distributions = np.concatenate(parts, axis=0)
    exact = distributions[:, observed.outcome]
    if mode.mode == "exact":
        return exact

    if rng is None:
        raise InvalidDesign("Sampled likelihood estimation needs a random generator")
    children = np.random.SeedSequence(int(rng.integers(2 ** 63))).spawn(len(exact))
    counts = np.array([
        np.random.default_rng(child).binomial(mode.n_samples, p) for child, p in zip(children, exact)
    ])
    return counts / mode.n_samples


def likelihood_error_bound(
    h: np.ndarray, h_tilde: np.ndarray, t: float, outcome: Literal["echo", "any"] = "echo"
) -> float:
    """
    Bound on |Pr(D|H) - Pr(D|H~)| from modelling H by H~.

    For the echo outcome D = exp(-i H~ t)|psi0> (the IQLE psi0 outcome when the
    inversion uses H~) the bound is ||H - H~||^2 t^2. Any other outcome only
    gets the first-order bound 2 ||H - H~|| t.
    """
    distance = spectral_norm(h - h_tilde) * t
    return distance ** 2 if outcome == "echo" else 2.0 * distance
