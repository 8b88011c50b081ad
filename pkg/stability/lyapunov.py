"""
Lyapunov Form
Quadratic Lyapunov candidate on the stacked position/velocity error and the
nominal (perfect feedforward) gain condition.

    V(P_E) = 1/2 P_e^T Q1 P_e + 1/2 Pdot_e^T Q2 Pdot_e + P_e^T Q3 Pdot_e
           = 1/2 P_E^T Q P_E,   Q = [[Q1, Q3], [Q3^T, Q2]]
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg

from control.gains import Gains

logger = logging.getLogger(__name__)

DEFAULT_EPSILON_FRACTION = 1e-3


def _symmetric(matrix, name: str) -> np.ndarray:
    arr = np.asarray(matrix, dtype=float)
    if arr.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class LyapunovForm:
    """
    Block quadratic form of the Lyapunov candidate.

    Attributes:
        Q1: Position block (symmetric)
        Q2: Velocity block (symmetric positive definite)
        Q3: Cross block
        epsilon: Scalar used to build the canonical form (0 when not canonical)
    """
    Q1: np.ndarray
    Q2: np.ndarray
    Q3: np.ndarray
    epsilon: float = 0.0

    def __post_init__(self):
        Q1 = _symmetric(self.Q1, 'Q1')
        Q2 = _symmetric(self.Q2, 'Q2')
        Q3 = _symmetric(self.Q3, 'Q3')
        if not np.allclose(Q1, Q1.T) or not np.allclose(Q2, Q2.T):
            raise ValueError("Q1 and Q2 must be symmetric")
        if np.min(linalg.eigvalsh(Q2)) <= 0:
            raise ValueError("Q2 must be positive definite")
        schur = Q1 - Q3.T @ linalg.solve(Q2, Q3, assume_a='pos')
        if np.min(linalg.eigvalsh(0.5 * (schur + schur.T))) <= 0:
            raise ValueError("Schur complement Q1 - Q3^T Q2^-1 Q3 must be positive definite")
        object.__setattr__(self, 'Q1', Q1)
        object.__setattr__(self, 'Q2', Q2)
        object.__setattr__(self, 'Q3', Q3)

    @property
    def Q(self) -> np.ndarray:
        """Full 6x6 matrix."""
        return np.block([[self.Q1, self.Q3], [self.Q3.T, self.Q2]])

    @property
    def sigma_min(self) -> float:
        return float(np.min(linalg.eigvalsh(self.Q)))

    @property
    def sigma_max(self) -> float:
        return float(np.max(linalg.eigvalsh(self.Q)))

    def sandwich(self, P_E: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Lower and upper quadratic bounds on V.

        1/2 sigma_min(Q) |P_E|^2 <= V(P_E) <= 1/2 sigma_max(Q) |P_E|^2
        """
        sq = np.sum(np.atleast_2d(P_E) ** 2, axis=-1)
        return 0.5 * self.sigma_min * sq, 0.5 * self.sigma_max * sq


def canonical_form(gains: Gains, epsilon: Optional[float] = None) -> LyapunovForm:
    """
    Canonical form Q1 = K_P + eps K_D, Q2 = I, Q3 = eps I.

    Args:
        gains: Controller gains
        epsilon: Cross-term weight, default 1e-3 * min-diag(K_D)

    Returns:
        LyapunovForm

    Raises:
        ValueError: If epsilon violates K_P > eps^2 I or K_D > eps I
    """
    if epsilon is None:
        epsilon = DEFAULT_EPSILON_FRACTION * gains.sigma_min_KD
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not (gains.sigma_min_KP > epsilon ** 2 and gains.sigma_min_KD > epsilon):
        raise ValueError(
            f"epsilon={epsilon:g} too large: need min K_P > {epsilon ** 2:g} and min K_D > {epsilon:g}"
        )
    eye = np.eye(3)
    return LyapunovForm(
        Q1=gains.K_P + epsilon * gains.K_D,
        Q2=eye,
        Q3=epsilon * eye,
        epsilon=float(epsilon),
    )


def lyapunov_value(P_E: np.ndarray, form: LyapunovForm) -> Union[float, np.ndarray]:
    """
    Evaluate V at one stacked error (6,) or a batch (n, 6).

    Returns a float for a single error and an array for a batch.
    """
    P_E = np.asarray(P_E, dtype=float)
    if P_E.shape[-1] != 6:
        raise ValueError(f"Stacked error must have 6 components, got shape {P_E.shape}")
    e = P_E[..., :3]
    v = P_E[..., 3:]
    V = (
        0.5 * np.einsum('...i,ij,...j->...', e, form.Q1, e)
        + 0.5 * np.einsum('...i,ij,...j->...', v, form.Q2, v)
        + np.einsum('...i,ij,...j->...', e, form.Q3, v)
    )
    if P_E.ndim == 1:
        return float(V)
    return V


@dataclass(frozen=True)
class NominalCheck:
    """Outcome of the nominal gain condition with the witness epsilon."""
    passed: bool
    epsilon: float
    message: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _gain_matrices(gains) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(gains, Gains):
        return gains.K_P, gains.K_D
    K_P, K_D = gains
    K_P = np.asarray(K_P, dtype=float)
    K_D = np.asarray(K_D, dtype=float)
    if K_P.ndim == 1:
        K_P = np.diag(K_P)
    if K_D.ndim == 1:
        K_D = np.diag(K_D)
    return K_P, K_D


def check_nominal(gains: Union[Gains, Tuple[np.ndarray, np.ndarray]]) -> NominalCheck:
    """
    Nominal convergence condition K_P > 0 and K_D > 0.

    Accepts Gains or a raw (K_P, K_D) pair of diagonals or matrices, so that
    gains Gains itself would reject can still be checked.

    Returns:
        NominalCheck with an epsilon satisfying K_P > eps^2 I and K_D > eps I
        when the check passes
    """
    K_P, K_D = _gain_matrices(gains)
    kp_min = float(np.min(linalg.eigvalsh(0.5 * (K_P + K_P.T))))
    kd_min = float(np.min(linalg.eigvalsh(0.5 * (K_D + K_D.T))))
    if kp_min <= 0 or kd_min <= 0:
        message = f"Gains not positive definite: min eig K_P={kp_min:g}, K_D={kd_min:g}"
        logger.warning(message)
        return NominalCheck(passed=False, epsilon=0.0, message=message)

    epsilon = 0.5 * min(np.sqrt(kp_min), kd_min)
    return NominalCheck(
        passed=True,
        epsilon=float(epsilon),
        message=f"min eig K_P={kp_min:g}, K_D={kd_min:g}",
    )
