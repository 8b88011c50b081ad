"""
Control Allocator
Inverts the Omega^2 rotor model to turn a thrust/moment demand into rotor speeds.
"""

import logging
from dataclasses import dataclass

import numpy as np

from core.vehicle import RotorCommand, VehicleParams

logger = logging.getLogger(__name__)

# Mixing matrices worse conditioned than this are treated as singular
MAX_CONDITION_NUMBER = 1e12


@dataclass(frozen=True)
class AllocationResult:
    """Rotor speeds plus the raw squared speeds and saturation flags."""
    command: RotorCommand
    omega_squared: np.ndarray
    saturated: np.ndarray

    @property
    def saturation_count(self) -> int:
        return int(np.sum(self.saturated))


class ControlAllocator:
    """
    Omega^2 mixer for the four-rotor layout.

    The mixing matrix is built and inverted once; a degenerate geometry
    fails at construction.
    """

    def __init__(self, params: VehicleParams):
        """
        Initialize allocator.

        Args:
            params: Vehicle parameters (k_T, k_Q, d_L, d_N, T_max)

        Raises:
            ValueError: If the mixing matrix is singular
        """
        self.params = params
        self.mixing_matrix = params.mixing_matrix
        condition = np.linalg.cond(self.mixing_matrix)
        if not np.isfinite(condition) or condition > MAX_CONDITION_NUMBER:
            raise ValueError(
                f"Mixing matrix is singular (cond={condition:.3e}); check d_L, d_N, k_T, k_Q"
            )
        self.inverse_mixing_matrix = np.linalg.inv(self.mixing_matrix)
        self.omega_max = params.omega_max

    def allocate(self, T_c: float, M_c: np.ndarray) -> AllocationResult:
        """
        Rotor speeds for a thrust and body-moment demand.

        Negative squared speeds are clamped at zero and speeds above
        omega_max are clamped down; both set the rotor's saturation flag.

        Args:
            T_c: Thrust command (N)
            M_c: Moment command [Lm, Mm, Nm] (N*m)

        Returns:
            AllocationResult
        """
        if T_c < 0:
            raise ValueError(f"Thrust command must be non-negative, got {T_c:.4f} N")

        wrench = np.concatenate([[T_c], np.asarray(M_c, dtype=float)])
        omega_sq = self.inverse_mixing_matrix @ wrench

        low = omega_sq < 0
        omega = np.sqrt(np.where(low, 0.0, omega_sq))
        high = omega > self.omega_max
        omega = np.minimum(omega, self.omega_max)
        saturated = low | high

        if np.any(saturated):
            logger.debug(f"Rotor saturation: low={low.tolist()}, high={high.tolist()}")

        return AllocationResult(
            command=RotorCommand(Omega=tuple(omega), saturated=tuple(saturated)),
            omega_squared=omega_sq,
            saturated=saturated,
        )

    def forward(self, omega_squared: np.ndarray) -> np.ndarray:
        """[T, Lm, Mm, Nm] produced by the given squared rotor speeds."""
        return self.mixing_matrix @ np.asarray(omega_squared, dtype=float)

    def __repr__(self) -> str:
        return f"ControlAllocator(omega_max={self.omega_max:.1f} rad/s)"


def allocate(T_c: float, M_c: np.ndarray, params: VehicleParams) -> AllocationResult:
    """One-shot allocation with a freshly built mixer."""
    return ControlAllocator(params).allocate(T_c, M_c)
