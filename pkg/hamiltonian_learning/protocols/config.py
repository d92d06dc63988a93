"""Run configuration for QHL trials."""
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from exceptions import ConfigError
from logger import get_logger
from ..channels import ChannelBuildSpec, Superoperator, build_channel, lambda_noise, load_superop
from ..likelihood import LikelihoodMode, NoiseConfig
from ..models import HamiltonianFamily

logger = get_logger(__name__)

# Supermatrix shape each non-gate role expects (register channels act on two qubits).
ROLE_SHAPES = {"lambda-noise": (4, 4), "register": (16, 16)}


class NoiseSettings(BaseModel):
    """
    Declarative noise: depolarizing strength plus an optional SWAP channel,
    read from a channel file or built from a Lindblad schedule.
    """
    depolarizing: float = Field(0.0, ge=0.0, le=1.0, description="Depolarizing strength N")
    channel_path: Optional[str] = Field(None, description="Channel file produced by channel-build")
    channel_build: Optional[ChannelBuildSpec] = Field(None, description="Schedule built in-process")
    channel_role: Literal["swap-gate", "lambda-noise", "register"] = Field(
        "swap-gate",
        description="swap-gate: 16x16 gate reduced to lambda-noise; lambda-noise: 4x4 map; register: whole-register channel",
    )
    assumed_known: bool = Field(True, description="Trusted simulator models the noise")

    @model_validator(mode="after")
    def _check_source(self) -> "NoiseSettings":
        if self.channel_path is not None and self.channel_build is not None:
            raise ValueError("give either channel_path or channel_build, not both")
        return self

    def _channel(self) -> Optional[Superoperator]:
        if self.channel_path is not None:
            channel = load_superop(self.channel_path)
        elif self.channel_build is not None:
            channel = build_channel(self.channel_build)
        else:
            return None
        shape = channel.matrix.shape
        if self.channel_role == "swap-gate":
            if shape == (4, 4):
                # already reduced by channel-build --output lambda-noise
                return channel
            if shape == (16, 16):
                return lambda_noise(channel)
        elif shape == ROLE_SHAPES[self.channel_role]:
            return channel
        raise ConfigError(f"A {shape[0]}x{shape[1]} channel cannot be used as {self.channel_role}",
                          role=self.channel_role, shape=list(shape))

    def resolve(self) -> NoiseConfig:
        try:
            return NoiseConfig(
                depolarizing=self.depolarizing,
                channel=self._channel(),
                assumed_known=self.assumed_known,
            )
        except ValueError as e:
            raise ConfigError(f"Invalid noise configuration: {e}")


class TruthSpec(BaseModel):
    """The untrusted system: its family (defaults to the model family) and x_true (sampled when absent)."""
    family: Optional[HamiltonianFamily] = Field(None, description="Family of the true Hamiltonian")
    x_true: Optional[List[float]] = Field(None, description="Fixed true parameters")


class QHLConfig(BaseModel):
    """Everything that determines one QHL trial, seeds included."""
    family: HamiltonianFamily = Field(..., description="Model family used by the trusted simulator")
    truth: TruthSpec = Field(default_factory=TruthSpec)
    particles: int = Field(2000, ge=2, description="Number of SMC particles M")
    experiments: int = Field(100, ge=1, description="Number of experiments N_exp")
    protocol: Literal["QLE", "IQLE"] = Field("IQLE")
    initial_state: Literal["plus", "random-local-clifford"] = Field("plus")
    measurement: Literal["two-outcome", "product-basis"] = Field("two-outcome")
    likelihood: LikelihoodMode = Field(default_factory=LikelihoodMode)
    noise: NoiseSettings = Field(default_factory=NoiseSettings)
    resample_a: float = Field(0.9, gt=0.0, le=1.0, description="Liu-West mixing parameter a")
    resample_threshold: float = Field(0.5, gt=0.0, le=1.0, description="Resample when ESS < threshold * M")
    seed: int = Field(0, ge=0, description="Seed of the trial's random stream")
    threads: int = Field(1, ge=1, description="Workers for per-particle likelihood evaluation")

    @model_validator(mode="after")
    def _check_truth(self) -> "QHLConfig":
        truth_family = self.truth_family
        if truth_family.n != self.family.n:
            raise ValueError("truth and model families must act on the same number of qubits")
        if self.truth.x_true is not None and len(self.truth.x_true) != truth_family.d:
            raise ValueError(f"x_true needs {truth_family.d} entries for {truth_family.id}")
        return self

    @property
    def truth_family(self) -> HamiltonianFamily:
        return self.truth.family or self.family

    def with_seed(self, seed: int) -> "QHLConfig":
        return self.model_copy(update={"seed": seed})


def resolve_channel_paths(config: dict, base_dir: Path) -> dict:
    """Make a relative noise.channel_path relative to the recipe's directory."""
    noise = config.get("noise") or {}
    path = noise.get("channel_path")
    if path and not Path(path).is_absolute():
        noise = {**noise, "channel_path": str((base_dir / path).resolve())}
        return {**config, "noise": noise}
    return config
