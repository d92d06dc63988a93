from .config import NoiseSettings, TruthSpec, QHLConfig, resolve_channel_paths
from .qhl import (
    ExperimentRecord, TrialTrace, particle_guess, make_design, draw_truth, simulate_datum,
    qhl_run, marginal_likelihood_trace, replay_log_likelihood, trace_data, bic_score, aic_score,
)
from .model_selection import ModelSelectRecord, ModelSelectTrace, model_select_run

__all__ = [
    'NoiseSettings', 'TruthSpec', 'QHLConfig', 'resolve_channel_paths',
    'ExperimentRecord', 'TrialTrace', 'particle_guess', 'make_design', 'draw_truth', 'simulate_datum',
    'qhl_run', 'marginal_likelihood_trace', 'replay_log_likelihood', 'trace_data', 'bic_score', 'aic_score',
    'ModelSelectRecord', 'ModelSelectTrace', 'model_select_run',
]
