"""
Sweeps, recipes and datasets.

Only the metrics are re-exported here; ``recipes`` and ``sweep`` depend on
``protocols`` and are imported by module path.
"""
from .metrics import GammaFit, quadratic_loss, fit_gamma, quantile_bands

__all__ = ['GammaFit', 'quadratic_loss', 'fit_gamma', 'quantile_bands']
