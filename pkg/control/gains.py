"""
Controller Gains
Diagonal outer-loop position and inner-loop attitude gains.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)


def _diagonal(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(3, float(arr))
    elif arr.ndim == 2:
        arr = np.diag(arr).copy()
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a scalar, a 3-vector or a 3x3 diagonal matrix")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"{name} diagonal entries must be positive, got {arr.tolist()}")
    return arr


@dataclass(frozen=True)
class Gains:
    """
    Cascade controller gains, stored as diagonals.

    Attributes:
        K_PX: Position gain diagonal (1/s^2)
        K_DX: Velocity gain diagonal (1/s)
        kappa_P: Attitude gain diagonal (1/s^2)
        kappa_D: Attitude-rate gain diagonal (1/s)
        label: Name used in logs and sweep indexes
    """
    K_PX: np.ndarray
    K_DX: np.ndarray
    kappa_P: np.ndarray
    kappa_D: np.ndarray
    label: str = "gains"

    def __post_init__(self):
        object.__setattr__(self, 'K_PX', _diagonal(self.K_PX, 'K_PX'))
        object.__setattr__(self, 'K_DX', _diagonal(self.K_DX, 'K_DX'))
        object.__setattr__(self, 'kappa_P', _diagonal(self.kappa_P, 'kappa_P'))
        object.__setattr__(self, 'kappa_D', _diagonal(self.kappa_D, 'kappa_D'))

    @classmethod
    def from_natural_frequency(
        cls,
        omega_n: float,
        zeta: float,
        inner_omega_n: float = 15.0,
        inner_zeta: float = 0.8,
        label: Optional[str] = None,
    ) -> 'Gains':
        """
        Gains placing each error channel at (omega_n, zeta).

        K_P = omega_n^2 I, K_D = 2*zeta*omega_n I
        """
        if omega_n <= 0 or zeta <= 0 or inner_omega_n <= 0 or inner_zeta <= 0:
            raise ValueError("Natural frequencies and damping ratios must be positive")
        return cls(
            K_PX=omega_n ** 2,
            K_DX=2.0 * zeta * omega_n,
            kappa_P=inner_omega_n ** 2,
            kappa_D=2.0 * inner_zeta * inner_omega_n,
            label=label or f"wn{omega_n:g}_z{zeta:g}",
        )

    @property
    def K_P(self) -> np.ndarray:
        return np.diag(self.K_PX)

    @property
    def K_D(self) -> np.ndarray:
        return np.diag(self.K_DX)

    @property
    def sigma_min_KP(self) -> float:
        return float(np.min(self.K_PX))

    @property
    def sigma_max_KP(self) -> float:
        return float(np.max(self.K_PX))

    @property
    def sigma_min_KD(self) -> float:
        return float(np.min(self.K_DX))

    def satisfies_robust(self, alpha1: float, m: float) -> bool:
        """Robust gain condition min-diag(K_DX) > alpha1 / m."""
        return self.sigma_min_KD > alpha1 / m

    def as_dict(self) -> dict:
        return {
            'label': self.label,
            'K_PX': self.K_PX.tolist(),
            'K_DX': self.K_DX.tolist(),
            'kappa_P': self.kappa_P.tolist(),
            'kappa_D': self.kappa_D.tolist(),
        }

    def __repr__(self) -> str:
        return (
            f"Gains({self.label}, K_PX={self.K_PX.tolist()}, K_DX={np.round(self.K_DX, 4).tolist()})"
        )
