"""
Seeded batches of trials and the datasets they produce.

A sweep runs ``trials`` QHL trials per variant; trial i uses the seed
derived from (base_seed, i), so any single trial can be rerun alone.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, model_validator

from exceptions import EXIT_IO, EXIT_NUMERICAL, QHLError
from logger import get_logger
from ..protocols import (ModelSelectTrace, QHLConfig, TrialTrace, TruthSpec, draw_truth,
                         model_select_run, qhl_run)
from ..storage import atomic_write_text
from .metrics import GammaFit, fit_gamma, quantile_bands
from .recipes import deep_merge

logger = get_logger(__name__)


def derive_trial_seed(base_seed: int, trial_index: int) -> int:
    """Stable 64-bit seed for trial ``trial_index`` of a sweep seeded with ``base_seed``."""
    state = np.random.SeedSequence([base_seed, trial_index]).generate_state(1, dtype=np.uint64)
    return int(state[0])


class SweepVariant(BaseModel):
    name: str = Field(..., pattern=r"^[A-Za-z0-9_.-]+$", description="Used in output file names")
    overrides: Dict[str, Any] = Field(default_factory=dict, description="Deep-merged into the base config")


class SweepSpec(BaseModel):
    """A batch of QHL trials, optionally over several config variants."""
    name: str = Field(..., pattern=r"^[A-Za-z0-9_.-]+$")
    base: QHLConfig
    variants: List[SweepVariant] = Field(default_factory=list)
    trials: int = Field(..., ge=1)
    base_seed: int = Field(0, ge=0)
    fit_range: Optional[Tuple[int, int]] = Field(None, description="Inclusive experiment range for gamma fits")
    threads: int = Field(1, ge=1, description="Trials run concurrently")

    @model_validator(mode="after")
    def _check_variants(self) -> "SweepSpec":
        names = [v.name for v in self.variants]
        if len(names) != len(set(names)):
            raise ValueError("variant names must be unique")
        if self.fit_range is not None:
            first, last = self.fit_range
            if not 1 <= first < last <= self.base.experiments:
                raise ValueError(f"fit_range must lie within 1..{self.base.experiments}")
        # fail before any trial runs: overrides must validate and noise channels must load
        for _, config in self.variant_configs():
            config.noise.resolve()
        return self

    def variant_configs(self) -> List[Tuple[str, QHLConfig]]:
        if not self.variants:
            return [("base", self.base)]
        base = self.base.model_dump()
        return [(v.name, QHLConfig.model_validate(deep_merge(base, v.overrides))) for v in self.variants]


class VariantResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    dataset: pd.DataFrame
    traces: List[TrialTrace]
    fit: Optional[GammaFit] = None


class SweepResult(BaseModel):
    name: str
    variants: List[VariantResult]

    def fits_frame(self) -> pd.DataFrame:
        rows = [{"variant": v.name, **v.fit.model_dump(exclude={"dropped"}), "dropped": len(v.fit.dropped)}
                for v in self.variants if v.fit is not None]
        return pd.DataFrame(rows, columns=["variant", "a", "gamma", "first", "last", "residual", "dropped"])


def _run_trial(config: QHLConfig) -> TrialTrace:
    try:
        return qhl_run(config)
    except QHLError as e:
        if e.exit_code != EXIT_NUMERICAL:
            raise
        logger.warning(f"Trial seed={config.seed} failed: {e.message}")
        # x_true is the first draw of the trial stream
        x_true = draw_truth(config, np.random.default_rng(config.seed))
        return TrialTrace(
            seed=config.seed, family=config.family.id, truth_family=config.truth_family.id,
            x_true=[float(v) for v in x_true], aborted=True, abort_reason=e.message,
        )


def loss_matrix(traces: List[TrialTrace], n_exp: int) -> np.ndarray:
    """(trials, n_exp) losses; aborted trials are NaN after their last record."""
    losses = np.full((len(traces), n_exp), np.nan)
    for row, trace in enumerate(traces):
        values = trace.losses
        losses[row, :len(values)] = values
    return losses


def band_dataset(values: np.ndarray, column: str) -> pd.DataFrame:
    """Per-experiment median and interquartile band of a (trials, N) matrix."""
    median, q25, q75 = quantile_bands(values)
    return pd.DataFrame({
        "experiment_index": np.arange(1, values.shape[1] + 1),
        column: median,
        "q25": q25,
        "q75": q75,
        "n_trials": np.count_nonzero(np.isfinite(values), axis=0),
    })


def write_dataset(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    return atomic_write_text(path, frame.to_csv(index=False))


def read_dataset(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise QHLError(f"Could not read dataset {path}: {e}", EXIT_IO, path=str(path))


def fit_dataset(frame: pd.DataFrame, fit_range: Optional[Tuple[int, int]] = None,
                column: str = "median_loss") -> GammaFit:
    return fit_gamma(frame[column].to_numpy(), frame["experiment_index"].to_numpy(), fit_range)


def _write_traces(directory: Path, traces: List[BaseModel]) -> None:
    for index, trace in enumerate(traces):
        atomic_write_text(directory / f"trial_{index:04d}.json", trace.model_dump_json(indent=2) + "\n")


def run_sweep(spec: SweepSpec, out_dir: Optional[Union[str, Path]] = None,
              threads: Optional[int] = None) -> SweepResult:
    """
    Run every variant of a sweep.

    Args:
        spec: Validated sweep
        out_dir: When given, datasets go to ``out_dir/<name>/`` as
            ``<variant>.csv``, ``gamma.csv`` and ``traces/<variant>/trial_NNNN.json``
        threads: Concurrent trials (defaults to ``spec.threads``)

    Returns:
        SweepResult with one dataset per variant
    """
    workers = threads or spec.threads
    seeds = [derive_trial_seed(spec.base_seed, i) for i in range(spec.trials)]
    results = []
    for name, config in spec.variant_configs():
        logger.info(f"Sweep {spec.name}/{name}: {spec.trials} trial(s) on {workers} worker(s)")
        traces = Parallel(n_jobs=workers)(delayed(_run_trial)(config.with_seed(seed)) for seed in seeds)
        aborted = sum(trace.aborted for trace in traces)
        if aborted:
            logger.warning(f"Sweep {spec.name}/{name}: {aborted} trial(s) aborted and flagged")
        dataset = band_dataset(loss_matrix(traces, config.experiments), "median_loss")
        try:
            fit = fit_dataset(dataset, spec.fit_range)
        except QHLError as e:
            logger.warning(f"No gamma fit for {spec.name}/{name}: {e.message}")
            fit = None
        results.append(VariantResult(name=name, dataset=dataset, traces=traces, fit=fit))

    result = SweepResult(name=spec.name, variants=results)
    if out_dir is not None:
        target = Path(out_dir) / spec.name
        for variant in results:
            write_dataset(variant.dataset, target / f"{variant.name}.csv")
            _write_traces(target / "traces" / variant.name, variant.traces)
        write_dataset(result.fits_frame(), target / "gamma.csv")
        logger.info(f"Wrote sweep {spec.name} to {target}")
    return result


class ModelSelectSpec(BaseModel):
    """Model-selection trials: null vs alternate against one true system."""
    name: str = Field(..., pattern=r"^[A-Za-z0-9_.-]+$")
    truth: Optional[TruthSpec] = Field(None, description="Applied to both models when given")
    null: QHLConfig
    alt: QHLConfig
    experiments: int = Field(..., ge=1)
    trials: int = Field(..., ge=1)
    base_seed: int = Field(0, ge=0)
    log_prior_odds: float = Field(0.0, description="ln Pr(alt) / Pr(null)")
    threads: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _share_truth(self) -> "ModelSelectSpec":
        if self.truth is not None:
            self.null = QHLConfig.model_validate({**self.null.model_dump(), "truth": self.truth.model_dump()})
            self.alt = QHLConfig.model_validate({**self.alt.model_dump(), "truth": self.truth.model_dump()})
        if self.null.truth_family != self.alt.truth_family:
            raise ValueError("null and alt must share the true system; set a top-level truth")
        self.null.noise.resolve()
        self.alt.noise.resolve()
        return self


class ModelSelectResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    dataset: pd.DataFrame
    traces: List[ModelSelectTrace]


def _run_model_selection_trial(spec: ModelSelectSpec, trial_seed: int) -> ModelSelectTrace:
    rng = np.random.default_rng(derive_trial_seed(trial_seed, 1))
    config_null = spec.null.with_seed(trial_seed)
    config_alt = spec.alt.with_seed(trial_seed)
    try:
        return model_select_run(config_null, config_alt, spec.experiments, rng, spec.log_prior_odds)
    except QHLError as e:
        if e.exit_code != EXIT_NUMERICAL:
            raise
        logger.warning(f"Model-selection trial seed={trial_seed} failed: {e.message}")
        return ModelSelectTrace(
            seed=trial_seed, null_family=spec.null.family.id, alt_family=spec.alt.family.id,
            x_true=[float(v) for v in draw_truth(config_null, np.random.default_rng(derive_trial_seed(trial_seed, 1)))],
            log_prior_odds=spec.log_prior_odds, aborted=True, abort_reason=e.message,
        )


def run_model_selection_sweep(spec: ModelSelectSpec, out_dir: Optional[Union[str, Path]] = None,
                              threads: Optional[int] = None) -> ModelSelectResult:
    """
    Median and interquartile band of log10 posterior odds (alt vs null) across trials.

    Both clouds of trial i are seeded with the derived trial seed; the
    untrusted system and the designs draw from a second derived stream.
    """
    workers = threads or spec.threads
    seeds = [derive_trial_seed(spec.base_seed, i) for i in range(spec.trials)]
    logger.info(f"Model selection {spec.name}: {spec.trials} trial(s) on {workers} worker(s)")
    traces = Parallel(n_jobs=workers)(delayed(_run_model_selection_trial)(spec, seed) for seed in seeds)

    odds = np.full((len(traces), spec.experiments), np.nan)
    for row, trace in enumerate(traces):
        values = trace.log10_odds
        odds[row, :len(values)] = values
    dataset = band_dataset(odds, "median_log10_odds")
    result = ModelSelectResult(name=spec.name, dataset=dataset, traces=traces)

    if out_dir is not None:
        target = Path(out_dir) / spec.name
        write_dataset(dataset, target / "odds.csv")
        _write_traces(target / "traces", traces)
        logger.info(f"Wrote model selection {spec.name} to {target}")
    return result
