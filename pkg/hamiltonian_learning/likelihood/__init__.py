from .simulator import (
    PSI0, PSI0_PERP, InitialStateSpec, ExperimentDesign, OutcomeDatum, NoiseConfig, LikelihoodMode,
    initial_state, register_channel, outcome_distributions, outcome_distribution,
    sample_outcome, estimate_likelihoods, likelihood_error_bound,
)

__all__ = [
    'PSI0', 'PSI0_PERP', 'InitialStateSpec', 'ExperimentDesign', 'OutcomeDatum', 'NoiseConfig', 'LikelihoodMode',
    'initial_state', 'register_channel', 'outcome_distributions', 'outcome_distribution',
    'sample_outcome', 'estimate_likelihoods', 'likelihood_error_bound',
]
