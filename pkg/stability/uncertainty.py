"""
Uncertainty Bound
Linear bound |dF_A| <= alpha1 |Pdot_e| + alpha0 on the feedforward error,
fitted from closed-loop samples by least squares and a prediction interval.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

logger = logging.getLogger(__name__)

MIN_SAMPLES = 10


class DegenerateRegressorError(ValueError):
    """Raised when the samples cannot support a linear fit."""


@dataclass(frozen=True)
class UncertaintyBound:
    """
    Fitted feedforward-error bound.

    Attributes:
        alpha0: Intercept of the bound (N)
        alpha1: Slope on velocity error (N*s/m)
        confidence: Prediction-interval confidence in (0, 1)
        sample_count: Samples used in the fit
        slope: Raw OLS slope before clamping
        intercept: Raw OLS intercept
        residual_std: Residual standard error
        slope_interval: Two-sided confidence interval on the OLS slope
    """
    alpha0: float
    alpha1: float
    confidence: float = 0.99
    sample_count: int = 0
    slope: float = float('nan')
    intercept: float = float('nan')
    residual_std: float = float('nan')
    slope_interval: Tuple[float, float] = (float('nan'), float('nan'))

    def __post_init__(self):
        if self.alpha0 < 0 or self.alpha1 < 0:
            raise ValueError(f"alpha0 and alpha1 must be non-negative, got {self.alpha0}, {self.alpha1}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1), got {self.confidence}")

    def evaluate(self, norm_Pde) -> np.ndarray:
        """Bound value at the given velocity-error norms."""
        return self.alpha1 * np.asarray(norm_Pde, dtype=float) + self.alpha0

    def coverage(self, norm_Pde, norm_dFA) -> float:
        """Fraction of (|Pdot_e|, |dF_A|) pairs lying under the bound."""
        y = np.asarray(norm_dFA, dtype=float)
        if y.size == 0:
            return float('nan')
        return float(np.mean(y <= self.evaluate(norm_Pde)))

    def as_dict(self) -> dict:
        data = asdict(self)
        data['slope_interval'] = list(self.slope_interval)
        return data

    def to_json(self, filepath) -> Path:
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.as_dict(), f, indent=2)
        return path

    @classmethod
    def from_json(cls, filepath) -> 'UncertaintyBound':
        with open(filepath, 'r') as f:
            data = json.load(f)
        data['slope_interval'] = tuple(data.get('slope_interval', (float('nan'),) * 2))
        return cls(**data)

    def __repr__(self) -> str:
        return (f"UncertaintyBound(alpha0={self.alpha0:.4g}, alpha1={self.alpha1:.4g}, "
                f"confidence={self.confidence}, n={self.sample_count})")


def _columns(samples) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, pd.DataFrame):
        missing = {'norm_Pde', 'norm_dFA'} - set(samples.columns)
        if missing:
            raise ValueError(f"Samples are missing columns: {sorted(missing)}")
        x = samples['norm_Pde'].to_numpy(dtype=float)
        y = samples['norm_dFA'].to_numpy(dtype=float)
    else:
        x, y = (np.asarray(a, dtype=float) for a in samples)
    if x.shape != y.shape:
        raise ValueError(f"Regressor and response lengths differ: {x.shape} vs {y.shape}")
    keep = np.isfinite(x) & np.isfinite(y)
    return x[keep], y[keep]


def fit_uncertainty_bound(
    samples: Union[pd.DataFrame, Tuple[np.ndarray, np.ndarray]],
    confidence: float = 0.99,
) -> UncertaintyBound:
    """
    Fit alpha1 by OLS and alpha0 from the upper prediction bound.

    alpha1 is the OLS slope of |dF_A| on |Pdot_e|, clamped at zero. alpha0 is
    the intercept plus the prediction-interval half-width
    t_{(1+c)/2, n-2} * s * sqrt(1 + 1/n), i.e. the interval evaluated at the
    sample-mean abscissa. A negative slope is replaced by a constant fit
    (alpha1 = 0, n-1 degrees of freedom).

    Args:
        samples: DataFrame with norm_Pde and norm_dFA columns, or an (x, y) pair
        confidence: Prediction-interval confidence

    Returns:
        UncertaintyBound

    Raises:
        DegenerateRegressorError: Fewer than 10 finite samples or no spread in |Pdot_e|
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    x, y = _columns(samples)
    n = len(x)
    if n < MIN_SAMPLES:
        raise DegenerateRegressorError(f"Need at least {MIN_SAMPLES} samples, got {n}")
    if np.ptp(x) <= 0:
        raise DegenerateRegressorError("Velocity-error samples have zero spread")

    fit = stats.linregress(x, y)
    residuals = y - (fit.intercept + fit.slope * x)
    dof = n - 2
    s = float(np.sqrt(np.sum(residuals ** 2) / dof))
    q = float(stats.t.ppf(0.5 * (1.0 + confidence), dof))
    slope_half = q * float(fit.stderr)
    slope_interval = (float(fit.slope - slope_half), float(fit.slope + slope_half))

    if fit.slope >= 0:
        alpha1 = float(fit.slope)
        alpha0 = float(fit.intercept) + q * s * np.sqrt(1.0 + 1.0 / n)
    else:
        logger.warning(f"Negative OLS slope {fit.slope:.4g} clamped to zero; using a constant fit")
        alpha1 = 0.0
        s = float(np.std(y, ddof=1))
        q = float(stats.t.ppf(0.5 * (1.0 + confidence), n - 1))
        alpha0 = float(np.mean(y)) + q * s * np.sqrt(1.0 + 1.0 / n)

    bound = UncertaintyBound(
        alpha0=max(float(alpha0), 0.0),
        alpha1=alpha1,
        confidence=confidence,
        sample_count=n,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        residual_std=s,
        slope_interval=slope_interval,
    )
    logger.info(f"Uncertainty bound fitted on {n} samples: alpha0={bound.alpha0:.4g}, "
                f"alpha1={bound.alpha1:.4g} ({confidence:.0%} prediction interval)")
    return bound
