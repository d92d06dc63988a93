"""
The QHL outer loop.

Each experiment: pick a design with the particle guess heuristic, draw one
outcome from the untrusted system at x_true, score every particle with the
trusted simulator, update, and resample when the ESS drops.
"""
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from exceptions import ConfigError, DegenerateCloud, ZeroEvidence
from logger import get_logger
from ..harness.metrics import quadratic_loss
from ..likelihood import (ExperimentDesign, InitialStateSpec, NoiseConfig, OutcomeDatum,
                          estimate_likelihoods, outcome_distribution, outcome_distributions, sample_outcome)
from ..models import (HamiltonianFamily, build_hamiltonians, hamiltonian_distance, sample_prior,
                      shared_coordinates)
from ..qcore import spectral_norms
from ..smc import (ParticleCloud, bayes_update_log, effective_sample_size, init_cloud,
                   liu_west_resample, posterior_summary)
from .config import QHLConfig

logger = get_logger(__name__)

MIN_DISTANCE = 1e-12
MAX_REDRAWS = 50

DesignPolicy = Callable[[ParticleCloud, HamiltonianFamily, np.random.Generator], Tuple[np.ndarray, float]]


class ExperimentRecord(BaseModel):
    index: int = Field(..., ge=1, description="Number of experiments performed so far")
    design: ExperimentDesign
    outcome: int = Field(..., ge=0)
    loss: float = Field(..., ge=0.0, description="Quadratic loss of the posterior mean")
    log_evidence: float = Field(..., description="log Z of this datum")
    ess: float = Field(..., description="Effective sample size before the update")
    resampled: bool = False
    retried: bool = Field(False, description="The first design gave zero evidence")
    posterior_mean: List[float]


class TrialTrace(BaseModel):
    """Per-experiment history of one trial plus the final Bayes estimate."""
    seed: int
    family: str
    truth_family: str
    x_true: List[float]
    records: List[ExperimentRecord] = Field(default_factory=list)
    estimate: List[float] = Field(default_factory=list)
    aborted: bool = False
    abort_reason: Optional[str] = None

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    @property
    def log_evidences(self) -> np.ndarray:
        return np.array([r.log_evidence for r in self.records])


def particle_guess(
    cloud: ParticleCloud, family: HamiltonianFamily, rng: np.random.Generator
) -> Tuple[np.ndarray, float]:
    """
    Particle guess heuristic.

    Draws x_minus and x' by weight and sets t = 1 / ||H(x_minus) - H(x')||,
    redrawing x' while the two Hamiltonians coincide. When the redraws run
    out, x' is drawn by weight among the particles whose Hamiltonian differs
    from H(x_minus).

    Returns:
        (x_minus, t)

    Raises:
        DegenerateCloud: Fewer than two particles, or all particles give the same Hamiltonian
    """
    if cloud.size < 2:
        raise DegenerateCloud("The particle guess heuristic needs at least two particles", size=cloud.size)
    x_minus = cloud.locations[rng.choice(cloud.size, p=cloud.weights)]
    for _ in range(MAX_REDRAWS):
        x_prime = cloud.locations[rng.choice(cloud.size, p=cloud.weights)]
        distance = hamiltonian_distance(family, x_minus, x_prime)
        if distance >= MIN_DISTANCE:
            return x_minus.copy(), 1.0 / distance

    # H is linear in x, so H(x) - H(x_minus) = H(x - x_minus)
    distances = spectral_norms(build_hamiltonians(family, cloud.locations - x_minus))
    distinct = np.flatnonzero(distances >= MIN_DISTANCE)
    if distinct.size == 0:
        raise DegenerateCloud("Every particle gives the same Hamiltonian", size=cloud.size)
    weights = cloud.weights[distinct]
    total = weights.sum()
    pick = distinct[rng.choice(distinct.size, p=weights / total if total > 0 else None)]
    logger.debug(f"Drew x' among {distinct.size} distinct particle(s) after {MAX_REDRAWS} redraws")
    return x_minus.copy(), 1.0 / distances[pick]


def make_design(config: QHLConfig, x_minus: np.ndarray, t: float, rng: np.random.Generator) -> ExperimentDesign:
    if config.initial_state == "random-local-clifford":
        state = InitialStateSpec(kind="random-local-clifford", seed=int(rng.integers(2 ** 31)))
    else:
        state = InitialStateSpec()
    return ExperimentDesign(
        protocol=config.protocol,
        t=t,
        x_minus=tuple(float(v) for v in x_minus) if config.protocol == "IQLE" else None,
        initial_state=state,
        measurement=config.measurement,
    )


def draw_truth(config: QHLConfig, rng: np.random.Generator) -> np.ndarray:
    if config.truth.x_true is not None:
        return np.asarray(config.truth.x_true, dtype=float)
    return sample_prior(config.truth_family, rng)


def simulate_datum(
    x_true: np.ndarray,
    design: ExperimentDesign,
    noise: NoiseConfig,
    truth_family: HamiltonianFamily,
    design_family: HamiltonianFamily,
    rng: np.random.Generator,
) -> OutcomeDatum:
    """One outcome of the untrusted system."""
    distribution = outcome_distribution(x_true, design, noise, truth_family, design_family=design_family)
    return sample_outcome(distribution, rng, design)


def _experiment(
    config: QHLConfig,
    cloud: ParticleCloud,
    x_true: np.ndarray,
    noise: NoiseConfig,
    policy: DesignPolicy,
    rng: np.random.Generator,
) -> Tuple[ParticleCloud, ExperimentDesign, OutcomeDatum, float]:
    x_minus, t = policy(cloud, config.family, rng)
    design = make_design(config, x_minus, t, rng)
    datum = simulate_datum(x_true, design, noise, config.truth_family, config.family, rng)
    likelihoods = estimate_likelihoods(
        cloud.locations, datum, design, noise.as_modelled(), config.family,
        mode=config.likelihood, rng=rng, n_jobs=config.threads,
    )
    updated, log_z = bayes_update_log(cloud, likelihoods)
    return updated, design, datum, log_z


def qhl_run(
    config: QHLConfig,
    *,
    initial_cloud: Optional[ParticleCloud] = None,
    design_policy: Optional[DesignPolicy] = None,
) -> TrialTrace:
    """
    Run one QHL trial.

    Args:
        config: Trial configuration; ``config.seed`` fixes every random draw
        initial_cloud: Replaces the prior cloud
        design_policy: Replaces the particle guess heuristic

    Returns:
        TrialTrace with one record per experiment (fewer when aborted)
    """
    rng = np.random.default_rng(config.seed)
    noise = config.noise.resolve()
    policy = design_policy or particle_guess
    x_true = draw_truth(config, rng)
    k = shared_coordinates(config.truth_family, config.family)
    cloud = initial_cloud if initial_cloud is not None else init_cloud(config.family, config.particles, rng)
    trace = TrialTrace(
        seed=config.seed, family=config.family.id, truth_family=config.truth_family.id,
        x_true=[float(v) for v in x_true],
    )
    logger.info(f"QHL trial seed={config.seed}: {config.family.id} n={config.family.n}, "
                f"M={cloud.size}, N_exp={config.experiments}")

    for index in range(1, config.experiments + 1):
        ess = effective_sample_size(cloud)
        retried = False
        try:
            try:
                cloud, design, datum, log_z = _experiment(config, cloud, x_true, noise, policy, rng)
            except ZeroEvidence:
                logger.warning(f"Zero evidence at experiment {index}; retrying with a fresh design")
                retried = True
                cloud, design, datum, log_z = _experiment(config, cloud, x_true, noise, policy, rng)
        except ZeroEvidence as e:
            logger.warning(f"Aborting trial seed={config.seed} at experiment {index}: {e.message}")
            trace.aborted = True
            trace.abort_reason = e.message
            break

        resampled = effective_sample_size(cloud) < config.resample_threshold * cloud.size
        if resampled:
            cloud = liu_west_resample(cloud, config.resample_a, rng)
        mean = posterior_summary(cloud).mean
        loss = quadratic_loss(mean[:k], x_true[:k])
        trace.records.append(ExperimentRecord(
            index=index, design=design, outcome=datum.outcome, loss=loss, log_evidence=log_z,
            ess=ess, resampled=resampled, retried=retried, posterior_mean=[float(v) for v in mean],
        ))
        logger.debug(f"experiment {index}: t={design.t:.4g} outcome={datum.outcome} loss={loss:.3e} ess={ess:.1f}")

    trace.estimate = [float(v) for v in posterior_summary(cloud).mean]
    if trace.records:
        logger.info(f"QHL trial seed={config.seed} finished: final loss {trace.records[-1].loss:.3e}")
    return trace


def marginal_likelihood_trace(trace: TrialTrace) -> np.ndarray:
    """Cumulative log Pr(D_1..D_k | model) for k = 1..N."""
    return np.cumsum(trace.log_evidences)


def replay_log_likelihood(
    x,
    family: HamiltonianFamily,
    data: Sequence[Tuple[ExperimentDesign, int, HamiltonianFamily]],
    noise: NoiseConfig,
) -> float:
    """
    sum_k log Pr(D_k | x) over recorded (design, outcome, design family) triples.

    Returns -inf when some datum is impossible at x.
    """
    x = np.asarray(x, dtype=float)[np.newaxis, :]
    total = 0.0
    for design, outcome, design_family in data:
        p = outcome_distributions(x, design, noise, family, design_family=design_family)[0, outcome]
        if p <= 0.0:
            return float("-inf")
        total += float(np.log(p))
    return total


def trace_data(trace: TrialTrace, family: HamiltonianFamily) -> List[Tuple[ExperimentDesign, int, HamiltonianFamily]]:
    return [(r.design, r.outcome, family) for r in trace.records]


def bic_score(max_loglik: float, d: int, n: int) -> float:
    """max log-likelihood - (d / 2) ln N."""
    if n < 1:
        raise ConfigError(f"BIC needs at least one datum, got N = {n}")
    return max_loglik - 0.5 * d * np.log(n)


def aic_score(max_loglik: float, d: int) -> float:
    return max_loglik - d
