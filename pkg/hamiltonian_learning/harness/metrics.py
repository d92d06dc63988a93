"""Loss, learning-rate fits and quantile bands."""
import warnings
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from exceptions import DimensionMismatch, NonPositiveLoss
from logger import get_logger

logger = get_logger(__name__)


def quadratic_loss(x_hat, x_true) -> float:
    """sum_j (x_hat_j - x_true_j)^2."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x_hat.shape != x_true.shape:
        raise DimensionMismatch(f"Cannot compare parameters of shape {x_hat.shape} and {x_true.shape}")
    return float(np.sum((x_hat - x_true) ** 2))


class GammaFit(BaseModel):
    """Least-squares fit of loss ~ A exp(-gamma N)."""
    a: float = Field(..., gt=0.0, description="Prefactor A")
    gamma: float = Field(..., description="Learning rate gamma")
    first: int = Field(..., description="First experiment index in the fit")
    last: int = Field(..., description="Last experiment index in the fit")
    residual: float = Field(..., ge=0.0, description="RMS residual of ln(loss)")
    dropped: List[int] = Field(default_factory=list, description="Indices dropped for non-positive loss")


def fit_gamma(
    losses,
    experiments: Optional[np.ndarray] = None,
    fit_range: Optional[Tuple[int, int]] = None,
) -> GammaFit:
    """
    Fit ln(loss) = ln A - gamma N by least squares.

    Args:
        losses: Loss trace, usually the median over trials
        experiments: Experiment index of each loss (defaults to 1..len(losses))
        fit_range: Inclusive (first, last) experiment indices to fit

    Returns:
        GammaFit; points with non-positive or missing loss are dropped and listed
    """
    losses = np.asarray(losses, dtype=float)
    experiments = np.arange(1, len(losses) + 1) if experiments is None else np.asarray(experiments)
    if experiments.shape != losses.shape:
        raise DimensionMismatch("One experiment index per loss is required")
    first, last = fit_range if fit_range is not None else (int(experiments.min()), int(experiments.max()))
    in_range = (experiments >= first) & (experiments <= last)
    usable = in_range & np.isfinite(losses) & (losses > 0)
    dropped = [int(n) for n in experiments[in_range & ~usable]]
    if dropped:
        logger.warning(f"Dropped {len(dropped)} non-positive loss point(s) from the gamma fit")
    if np.count_nonzero(usable) < 2:
        raise NonPositiveLoss(
            "Need at least two positive losses to fit A exp(-gamma N)",
            details={"first": first, "last": last, "dropped": dropped},
        )

    n = experiments[usable].astype(float)
    log_loss = np.log(losses[usable])
    slope, intercept = np.polyfit(n, log_loss, 1)
    residual = float(np.sqrt(np.mean((log_loss - (intercept + slope * n)) ** 2)))
    return GammaFit(a=float(np.exp(intercept)), gamma=float(-slope), first=first, last=last,
                    residual=residual, dropped=dropped)


def quantile_bands(losses) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Median and interquartile band per column of a (trials, experiments) matrix.

    NaN entries (aborted trials) are ignored; an all-NaN column yields NaN.
    """
    losses = np.atleast_2d(np.asarray(losses, dtype=float))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        q25, median, q75 = np.nanquantile(losses, [0.25, 0.5, 0.75], axis=0)
    return median, q25, q75
