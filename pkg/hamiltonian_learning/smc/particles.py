"""
Weighted particle approximation of the posterior over Hamiltonian parameters.

Clouds are values: every operation returns a new ParticleCloud.
"""
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import erf, logsumexp
from scipy.stats import chi2

from exceptions import ConfigError, DegenerateCovariance, DimensionMismatch, SingularCovariance, ZeroEvidence
from logger import get_logger
from ..models import HamiltonianFamily, sample_prior

logger = get_logger(__name__)

NORMALIZATION_ATOL = 1e-12
LOG_UNDERFLOW = float(np.log(np.finfo(float).tiny))
MAX_CONDITION = 1e12
VARIANCE_FLOOR = 1e-20


class ParticleCloud(BaseModel):
    """M particle locations (M x d) with normalized weights."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    locations: np.ndarray = Field(..., description="(M, d) particle locations")
    weights: np.ndarray = Field(..., description="(M,) normalized weights")

    @model_validator(mode="after")
    def _check_cloud(self) -> "ParticleCloud":
        if self.locations.ndim != 2 or self.locations.shape[0] < 1:
            raise ValueError("locations must be an (M, d) array with M >= 1")
        if self.weights.shape != (self.locations.shape[0],):
            raise ValueError("one weight per particle is required")
        if not (np.all(np.isfinite(self.locations)) and np.all(np.isfinite(self.weights))):
            raise ValueError("particle cloud contains NaN or Inf")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > NORMALIZATION_ATOL:
            raise ValueError("weights must be non-negative and sum to one")
        return self

    @property
    def size(self) -> int:
        return self.locations.shape[0]

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    @classmethod
    def uniform(cls, locations: np.ndarray) -> "ParticleCloud":
        locations = np.atleast_2d(np.asarray(locations, dtype=float))
        m = locations.shape[0]
        return cls(locations=locations, weights=np.full(m, 1.0 / m))


class PosteriorSummary(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray = Field(..., description="Posterior mean (d,)")
    covariance: np.ndarray = Field(..., description="Posterior covariance (d, d)")


def init_cloud(family: HamiltonianFamily, m: int, rng: np.random.Generator) -> ParticleCloud:
    """M prior draws with weights 1/M."""
    if m < 1:
        raise ConfigError(f"A particle cloud needs at least one particle, got {m}")
    return ParticleCloud.uniform(sample_prior(family, rng, size=m))


def bayes_update_log(cloud: ParticleCloud, likelihoods: np.ndarray) -> Tuple[ParticleCloud, float]:
    """
    Bayes update carried out in log space.

    Returns:
        (updated cloud, log Z) where Z = sum_i w_i p_i is the evidence of the datum
    """
    p = np.asarray(likelihoods, dtype=float)
    if p.shape != (cloud.size,):
        raise DimensionMismatch(f"Expected {cloud.size} likelihoods, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise DimensionMismatch("Likelihoods must be finite and non-negative")
    with np.errstate(divide="ignore"):
        log_joint = np.log(cloud.weights) + np.log(p)
    log_z = float(logsumexp(log_joint))
    if not np.isfinite(log_z) or log_z <= LOG_UNDERFLOW:
        raise ZeroEvidence("Observed datum has vanishing likelihood under every particle", log_evidence=log_z)
    weights = np.exp(log_joint - log_z)
    weights /= weights.sum()
    return ParticleCloud(locations=cloud.locations, weights=weights), log_z


def bayes_update(cloud: ParticleCloud, likelihoods: np.ndarray) -> Tuple[ParticleCloud, float]:
    """w_i <- w_i p_i / Z; returns the updated cloud and Z."""
    updated, log_z = bayes_update_log(cloud, likelihoods)
    return updated, float(np.exp(log_z))


def effective_sample_size(cloud: ParticleCloud) -> float:
    return float(1.0 / np.sum(cloud.weights ** 2))


def systematic_resample_indices(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Low-variance ancestor selection from one uniform offset."""
    m = len(weights)
    positions = (rng.random() + np.arange(m)) / m
    indices = np.searchsorted(np.cumsum(weights), positions, side="right")
    return np.minimum(indices, m - 1)


def posterior_summary(cloud: ParticleCloud) -> PosteriorSummary:
    """Weighted mean and (biased, weight-normalized) covariance."""
    mean = cloud.weights @ cloud.locations
    centered = cloud.locations - mean
    covariance = (centered * cloud.weights[:, np.newaxis]).T @ centered
    covariance = 0.5 * (covariance + covariance.T)
    return PosteriorSummary(mean=mean, covariance=covariance)


def _noise_factor(covariance: np.ndarray) -> np.ndarray:
    """Cholesky factor, regularized once by eps*I."""
    try:
        return np.linalg.cholesky(covariance)
    except np.linalg.LinAlgError:
        pass
    d = covariance.shape[0]
    epsilon = 1e-12 * np.trace(covariance) / d
    if epsilon > 0:
        try:
            factor = np.linalg.cholesky(covariance + epsilon * np.eye(d))
            logger.warning(f"Regularized resampling covariance with eps = {epsilon:.3e}")
            return factor
        except np.linalg.LinAlgError:
            pass
    raise DegenerateCovariance("Resampling covariance has no Cholesky factor", epsilon=float(epsilon))


def liu_west_resample(cloud: ParticleCloud, a: float, rng: np.random.Generator) -> ParticleCloud:
    """
    Liu-West resampling.

    New particles are a * x_j + (1 - a) * mu + N(0, (1 - a^2) Sigma) with
    ancestors x_j chosen by systematic resampling, so the first two moments
    of the posterior are kept in expectation.

    Args:
        cloud: Weighted cloud
        a: Mixing parameter in (0, 1]; a = 1 only resamples ancestors
        rng: Generator for ancestors and perturbations

    Returns:
        Equal-weight cloud of the same size
    """
    if not 0.0 < a <= 1.0:
        raise ConfigError(f"Liu-West parameter a must lie in (0, 1], got {a}")
    summary = posterior_summary(cloud)
    ancestors = cloud.locations[systematic_resample_indices(cloud.weights, rng)]
    locations = a * ancestors + (1.0 - a) * summary.mean
    if a < 1.0:
        covariance = (1.0 - a ** 2) * summary.covariance
        noise = rng.standard_normal(locations.shape)
        try:
            locations = locations + noise @ _noise_factor(covariance).T
        except DegenerateCovariance as e:
            logger.warning(f"{e.message}; perturbing with a per-coordinate variance floor")
            scale = np.sqrt(np.maximum(np.diag(covariance), VARIANCE_FLOOR))
            locations = locations + noise * scale
    return ParticleCloud.uniform(locations)


class CredibleEllipsoid(BaseModel):
    """{x : (x - mu)^T Sigma^-1 (x - mu) <= Z^2}."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray
    precision: np.ndarray
    z: float

    @property
    def dim(self) -> int:
        return len(self.mean)

    @property
    def coverage(self) -> float:
        """Nominal coverage erf(Z / sqrt 2) ** d."""
        return float(erf(self.z / np.sqrt(2.0)) ** self.dim)

    @property
    def exact_coverage(self) -> float:
        """Gaussian coverage of the ellipsoid, the chi-squared CDF of Z^2 with d dof."""
        return float(chi2.cdf(self.z ** 2, self.dim))

    def mahalanobis_squared(self, points: np.ndarray) -> np.ndarray:
        centered = np.atleast_2d(points) - self.mean
        return np.einsum("mi,ij,mj->m", centered, self.precision, centered)

    def contains(self, points: np.ndarray) -> np.ndarray:
        inside = self.mahalanobis_squared(points) <= self.z ** 2
        return inside if np.ndim(points) > 1 else bool(inside[0])


def credible_ellipsoid(summary: PosteriorSummary, z: float) -> CredibleEllipsoid:
    covariance = summary.covariance
    d = covariance.shape[0]
    if not np.isfinite(np.linalg.cond(covariance)) or np.linalg.cond(covariance) > MAX_CONDITION:
        epsilon = 1e-12 * np.trace(covariance) / d
        if not epsilon > 0:
            raise SingularCovariance("Posterior covariance is zero; no credible region")
        covariance = covariance + epsilon * np.eye(d)
    try:
        precision = np.linalg.inv(covariance)
    except np.linalg.LinAlgError:
        raise SingularCovariance("Posterior covariance could not be inverted")
    if not np.all(np.isfinite(precision)):
        raise SingularCovariance("Posterior covariance could not be inverted")
    return CredibleEllipsoid(mean=summary.mean, precision=precision, z=float(z))
