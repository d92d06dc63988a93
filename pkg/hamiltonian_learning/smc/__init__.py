from .particles import (
    ParticleCloud, PosteriorSummary, CredibleEllipsoid,
    init_cloud, bayes_update, bayes_update_log, effective_sample_size,
    systematic_resample_indices, liu_west_resample, posterior_summary, credible_ellipsoid,
)

__all__ = [
    'ParticleCloud', 'PosteriorSummary', 'CredibleEllipsoid',
    'init_cloud', 'bayes_update', 'bayes_update_log', 'effective_sample_size',
    'systematic_resample_indices', 'liu_west_resample', 'posterior_summary', 'credible_ellipsoid',
]
