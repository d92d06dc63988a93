"""
Online Bayes-factor model selection.

Two QHL clouds, a null and an alternate model, see the same designs and the
same outcomes. The model currently favoured by the posterior odds picks the
next design.
"""
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from exceptions import ConfigError, ZeroEvidence
from logger import get_logger
from ..harness.metrics import quadratic_loss
from ..likelihood import ExperimentDesign, NoiseConfig, OutcomeDatum, estimate_likelihoods
from ..models import HamiltonianFamily, shared_coordinates
from ..smc import (ParticleCloud, bayes_update_log, effective_sample_size, init_cloud,
                   liu_west_resample, posterior_summary)
from .config import QHLConfig
from .qhl import bic_score, draw_truth, make_design, particle_guess, replay_log_likelihood, simulate_datum

logger = get_logger(__name__)

Role = Literal["null", "alt"]
LN10 = float(np.log(10.0))


class ModelSelectRecord(BaseModel):
    index: int = Field(..., ge=1)
    driver: Role = Field(..., description="Model whose cloud chose this design")
    design: ExperimentDesign
    outcome: int = Field(..., ge=0)
    log_evidence_null: float
    log_evidence_alt: float
    log_odds: float = Field(..., description="ln Pr(alt | D) / Pr(null | D) after this datum")
    loss_null: float = Field(..., ge=0.0)
    loss_alt: float = Field(..., ge=0.0)

    @property
    def log10_odds(self) -> float:
        return self.log_odds / LN10


class ModelSelectTrace(BaseModel):
    seed: int
    null_family: str
    alt_family: str
    x_true: List[float]
    log_prior_odds: float = 0.0
    records: List[ModelSelectRecord] = Field(default_factory=list)
    bic_null: Optional[float] = None
    bic_alt: Optional[float] = None
    aborted: bool = False
    abort_reason: Optional[str] = None

    @property
    def log_odds(self) -> np.ndarray:
        return np.array([r.log_odds for r in self.records])

    @property
    def log10_odds(self) -> np.ndarray:
        return self.log_odds / LN10


class _Arm:
    """One model's cloud with its own random stream and running log evidence."""

    def __init__(self, role: Role, config: QHLConfig, truth_family: HamiltonianFamily):
        self.role = role
        self.config = config
        self.family = config.family
        self.rng = np.random.default_rng(config.seed)
        self.cloud: ParticleCloud = init_cloud(config.family, config.particles, self.rng)
        self.noise = config.noise.resolve().as_modelled()
        self.shared = shared_coordinates(truth_family, config.family)
        self.log_evidence = 0.0

    def likelihoods(self, datum: OutcomeDatum, design: ExperimentDesign,
                    design_family: HamiltonianFamily) -> np.ndarray:
        return estimate_likelihoods(
            self.cloud.locations, datum, design, self.noise, self.family,
            mode=self.config.likelihood, rng=self.rng, design_family=design_family,
            n_jobs=self.config.threads,
        )

    def commit(self, cloud: ParticleCloud, log_z: float) -> None:
        if effective_sample_size(cloud) < self.config.resample_threshold * cloud.size:
            cloud = liu_west_resample(cloud, self.config.resample_a, self.rng)
        self.cloud = cloud
        self.log_evidence += log_z

    def loss(self, x_true: np.ndarray) -> float:
        mean = posterior_summary(self.cloud).mean
        return quadratic_loss(mean[:self.shared], x_true[:self.shared])


def _check_same_truth(config_null: QHLConfig, config_alt: QHLConfig) -> None:
    if config_null.truth_family != config_alt.truth_family:
        raise ConfigError("Both models must describe the same true system",
                          null=config_null.truth_family.id, alt=config_alt.truth_family.id)
    if config_null.truth.x_true != config_alt.truth.x_true:
        raise ConfigError("Both models must use the same x_true")
    physical = {"depolarizing", "channel_path", "channel_build", "channel_role"}
    if config_null.noise.model_dump(include=physical) != config_alt.noise.model_dump(include=physical):
        raise ConfigError("Both models must see the same untrusted-system noise")


def _step(
    driver: _Arm, arms: Tuple[_Arm, _Arm], x_true: np.ndarray, truth_noise: NoiseConfig,
    truth_family: HamiltonianFamily, rng: np.random.Generator,
):
    x_minus, t = particle_guess(driver.cloud, driver.family, rng)
    design = make_design(driver.config, x_minus, t, rng)
    datum = simulate_datum(x_true, design, truth_noise, truth_family, driver.family, rng)
    updates = [bayes_update_log(arm.cloud, arm.likelihoods(datum, design, driver.family)) for arm in arms]
    return design, datum, updates


def model_select_run(
    config_null: QHLConfig,
    config_alt: QHLConfig,
    n_exp: int,
    rng: np.random.Generator,
    log_prior_odds: float = 0.0,
) -> ModelSelectTrace:
    """
    Run the null and alternate models side by side.

    Each cloud resamples with a stream seeded from its own config, while
    ``rng`` draws x_true, designs and outcomes. The model with fewer
    parameters (the null model on ties) drives first; roles switch whenever
    the cumulative log odds favour the other model strictly.

    Args:
        config_null: Null model configuration
        config_alt: Alternate model configuration
        n_exp: Number of experiments
        rng: Shared stream for the untrusted system and designs
        log_prior_odds: ln Pr(alt) / Pr(null)

    Returns:
        ModelSelectTrace with the cumulative log odds after each datum
    """
    if n_exp < 1:
        raise ConfigError(f"Model selection needs at least one experiment, got {n_exp}")
    _check_same_truth(config_null, config_alt)
    truth_family = config_null.truth_family
    truth_noise = config_null.noise.resolve()
    x_true = draw_truth(config_null, rng)

    null = _Arm("null", config_null, truth_family)
    alt = _Arm("alt", config_alt, truth_family)
    driver = null if null.family.d <= alt.family.d else alt
    trace = ModelSelectTrace(
        seed=config_null.seed, null_family=null.family.id, alt_family=alt.family.id,
        x_true=[float(v) for v in x_true], log_prior_odds=log_prior_odds,
    )
    data = []
    logger.info(f"Model selection: null={null.family.id} (d={null.family.d}) vs "
                f"alt={alt.family.id} (d={alt.family.d}), N_exp={n_exp}")

    for index in range(1, n_exp + 1):
        try:
            try:
                design, datum, updates = _step(driver, (null, alt), x_true, truth_noise, truth_family, rng)
            except ZeroEvidence:
                logger.warning(f"Zero evidence at experiment {index}; retrying with a fresh design")
                design, datum, updates = _step(driver, (null, alt), x_true, truth_noise, truth_family, rng)
        except ZeroEvidence as e:
            logger.warning(f"Aborting model selection at experiment {index}: {e.message}")
            trace.aborted = True
            trace.abort_reason = e.message
            break

        (cloud_null, log_z_null), (cloud_alt, log_z_alt) = updates
        null.commit(cloud_null, log_z_null)
        alt.commit(cloud_alt, log_z_alt)
        data.append((design, datum.outcome, driver.family))

        log_odds = log_prior_odds + (alt.log_evidence - null.log_evidence)
        trace.records.append(ModelSelectRecord(
            index=index, driver=driver.role, design=design, outcome=datum.outcome,
            log_evidence_null=log_z_null, log_evidence_alt=log_z_alt, log_odds=log_odds,
            loss_null=null.loss(x_true), loss_alt=alt.loss(x_true),
        ))
        if driver is null and log_odds > 0.0:
            driver = alt
            logger.debug(f"experiment {index}: alternate model takes over design")
        elif driver is alt and log_odds < 0.0:
            driver = null
            logger.debug(f"experiment {index}: null model takes over design")

    if data:
        trace.bic_null = _bic(null, data)
        trace.bic_alt = _bic(alt, data)
        logger.info(f"Model selection finished: log10 odds {trace.records[-1].log10_odds:.2f}")
    return trace


def _bic(arm: _Arm, data) -> float:
    mean = posterior_summary(arm.cloud).mean
    return bic_score(replay_log_likelihood(mean, arm.family, data, arm.noise), arm.family.d, len(data))
