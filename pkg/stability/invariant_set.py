"""
Invariant Set
Convergent error set sized by the feedforward uncertainty bound and the
position gains:

    V_lim = max(sigma_max(K_P), 1) * (alpha0^2 / (m^2 sigma_min(K_P)^2)
                                      + alpha0^2 / (m sigma_min(K_D) - alpha1)^2)

The set is drawn in the (|P_e|, |Pdot_e|) plane as the level set
1/2 sigma_min(K_P) |P_e|^2 + 1/2 |Pdot_e|^2 = V_lim.
"""

import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from control.gains import Gains
from stability.uncertainty import UncertaintyBound

logger = logging.getLogger(__name__)


class RobustConditionError(ValueError):
    """Raised when m * min-diag(K_D) does not exceed alpha1."""

    def __init__(self, required_kd: float, actual_kd: float):
        super().__init__(
            f"Robust gain condition violated: min-diag(K_D)={actual_kd:.6g} must exceed "
            f"alpha1/m={required_kd:.6g}"
        )
        self.required_kd = required_kd
        self.actual_kd = actual_kd


@dataclass(frozen=True)
class InvariantSet:
    """
    Convergent error set.

    Attributes:
        V_lim: Lyapunov level bounding the set
        position_axis_sq: Squared semi-axis along |P_e|, 2 V_lim / sigma_min(K_P)
        velocity_axis_sq: Squared semi-axis along |Pdot_e|, 2 V_lim
        position_threshold: alpha0 / (m sigma_min(K_P))
        velocity_threshold: alpha0 / (m sigma_min(K_D) - alpha1)
        gains: Generating gains
        bound: Generating uncertainty bound
        m: Vehicle mass (kg)
    """
    V_lim: float
    position_axis_sq: float
    velocity_axis_sq: float
    position_threshold: float
    velocity_threshold: float
    gains: Gains
    bound: UncertaintyBound
    m: float

    def ellipse_value(self, norm_Pe, norm_Pde) -> np.ndarray:
        """Left side of |P_e|^2/a + |Pdot_e|^2/b = 1 (inf for the collapsed set)."""
        norm_Pe = np.asarray(norm_Pe, dtype=float)
        norm_Pde = np.asarray(norm_Pde, dtype=float)
        if self.V_lim == 0:
            return np.where((norm_Pe == 0) & (norm_Pde == 0), 0.0, np.inf)
        return norm_Pe ** 2 / self.position_axis_sq + norm_Pde ** 2 / self.velocity_axis_sq

    def contains(self, norm_Pe, norm_Pde) -> np.ndarray:
        return self.ellipse_value(norm_Pe, norm_Pde) <= 1.0

    def boundary(self, points: int = 181) -> pd.DataFrame:
        """Quarter-ellipse boundary points for plotting."""
        angle = np.linspace(0.0, 0.5 * np.pi, points)
        return pd.DataFrame({
            'norm_Pe': np.sqrt(self.position_axis_sq) * np.cos(angle),
            'norm_Pde': np.sqrt(self.velocity_axis_sq) * np.sin(angle),
        })

    def as_dict(self) -> dict:
        return {
            'V_lim': self.V_lim,
            'position_axis_sq': self.position_axis_sq,
            'velocity_axis_sq': self.velocity_axis_sq,
            'position_threshold': self.position_threshold,
            'velocity_threshold': self.velocity_threshold,
            'm': self.m,
            'gains': self.gains.as_dict(),
            'bound': self.bound.as_dict(),
        }

    def to_json(self, filepath) -> Path:
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.as_dict(), f, indent=2)
        return path

    def __repr__(self) -> str:
        return (f"InvariantSet(V_lim={self.V_lim:.4g}, |P_e|^2/{self.position_axis_sq:.4g} + "
                f"|Pdot_e|^2/{self.velocity_axis_sq:.4g} <= 1)")


def error_thresholds(gains: Gains, bound: UncertaintyBound, m: float) -> Tuple[float, float]:
    """
    Error norms beyond which V strictly decreases.

    Returns:
        (alpha0 / (m sigma_min(K_P)), alpha0 / (m sigma_min(K_D) - alpha1))

    Raises:
        RobustConditionError: If m sigma_min(K_D) <= alpha1
    """
    if m <= 0:
        raise ValueError(f"Mass must be positive, got {m}")
    damping_margin = m * gains.sigma_min_KD - bound.alpha1
    if damping_margin <= 0:
        raise RobustConditionError(required_kd=bound.alpha1 / m, actual_kd=gains.sigma_min_KD)
    return bound.alpha0 / (m * gains.sigma_min_KP), bound.alpha0 / damping_margin


def compute_invariant_set(gains: Gains, bound: UncertaintyBound, m: float) -> InvariantSet:
    """
    Build the convergent error set for a gain set and uncertainty bound.

    Args:
        gains: Outer-loop gains
        bound: Fitted uncertainty bound
        m: Vehicle mass (kg)

    Returns:
        InvariantSet

    Raises:
        RobustConditionError: If the robust gain condition fails
    """
    pos_thr, vel_thr = error_thresholds(gains, bound, m)
    V_lim = max(gains.sigma_max_KP, 1.0) * (pos_thr ** 2 + vel_thr ** 2)
    inv_set = InvariantSet(
        V_lim=float(V_lim),
        position_axis_sq=float(2.0 * V_lim / gains.sigma_min_KP),
        velocity_axis_sq=float(2.0 * V_lim),
        position_threshold=float(pos_thr),
        velocity_threshold=float(vel_thr),
        gains=gains,
        bound=bound,
        m=float(m),
    )
    logger.info(f"Invariant set for {gains.label}: {inv_set}")
    return inv_set


def set_size_sweep(
    alpha0_values: Iterable[float],
    alpha1_values: Iterable[float],
    kp_min_values: Iterable[float],
    kd_min_values: Iterable[float],
    m: float,
    kp_max: Optional[float] = None,
) -> pd.DataFrame:
    """
    Evaluate V_lim over a grid of bounds and gains.

    Gains are diagonal with one axis at the minimum value; the other two sit
    at kp_max (default: equal to the minimum). Grid points violating the
    robust condition get V_lim = NaN.

    Returns:
        DataFrame with alpha0, alpha1, kp_min, kd_min, V_lim, robust columns
    """
    rows = []
    for alpha0, alpha1, kp_min, kd_min in itertools.product(
        alpha0_values, alpha1_values, kp_min_values, kd_min_values
    ):
        kp_top = kp_min if kp_max is None else max(kp_max, kp_min)
        gains = Gains(
            K_PX=[kp_min, kp_top, kp_top],
            K_DX=[kd_min, kd_min, kd_min],
            kappa_P=1.0,
            kappa_D=1.0,
            label='grid',
        )
        bound = UncertaintyBound(alpha0=alpha0, alpha1=alpha1)
        try:
            pos_thr, vel_thr = error_thresholds(gains, bound, m)
            V_lim = max(gains.sigma_max_KP, 1.0) * (pos_thr ** 2 + vel_thr ** 2)
            robust = True
        except RobustConditionError:
            V_lim, robust = np.nan, False
        rows.append({'alpha0': alpha0, 'alpha1': alpha1, 'kp_min': kp_min,
                     'kd_min': kd_min, 'V_lim': V_lim, 'robust': robust})
    logger.debug(f"Set-size sweep evaluated {len(rows)} grid points")
    return pd.DataFrame(rows)
