"""
Attitude Control
Inner-loop feedback linearization and the filtered attitude-reference derivatives.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import signal

from control.gains import Gains
from core.kinematics import euler_rate_matrix, euler_rate_matrix_dot, wrap_angle
from core.vehicle import VehicleParams

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF = 20.0  # rad/s


def attitude_inner_loop(
    Psi: np.ndarray,
    Psi_dot: np.ndarray,
    Psi_d: np.ndarray,
    Psid_dot: np.ndarray,
    Psid_ddot: np.ndarray,
    omega_b: np.ndarray,
    gains: Gains,
    params: VehicleParams,
) -> np.ndarray:
    """
    Moment command from attitude feedback linearization.

    Psi_ddot_c = Psid_ddot + kappa_D (Psid_dot - Psi_dot) + kappa_P (Psi_d - Psi)
    omega_dot_c = L Psi_ddot_c + L_dot Psi_dot
    M_c = J omega_dot_c + omega_b x J omega_b

    Args:
        Psi: Euler attitude (rad)
        Psi_dot: Euler rates (rad/s)
        Psi_d, Psid_dot, Psid_ddot: Attitude reference and its derivatives
        omega_b: Body rates (rad/s)
        gains: Controller gains (kappa_P, kappa_D)
        params: Vehicle parameters (inertia)

    Returns:
        Moment command M_c (N*m)

    Raises:
        GimbalLockError: At the Euler-rate singularity
    """
    Psi = np.asarray(Psi, dtype=float)
    Psi_dot = np.asarray(Psi_dot, dtype=float)
    omega_b = np.asarray(omega_b, dtype=float)

    attitude_error = wrap_angle(np.asarray(Psi_d, dtype=float) - Psi)
    rate_error = np.asarray(Psid_dot, dtype=float) - Psi_dot
    Psi_ddot_c = np.asarray(Psid_ddot, dtype=float) + gains.kappa_D * rate_error + gains.kappa_P * attitude_error

    L = euler_rate_matrix(Psi)
    L_dot = euler_rate_matrix_dot(Psi, Psi_dot)
    omega_dot_c = L @ Psi_ddot_c + L_dot @ Psi_dot

    J = params.inertia
    return J @ omega_dot_c + np.cross(omega_b, J @ omega_b)


class AttitudeReferenceFilter:
    """
    Numerical differentiation of the attitude command with first-order low-pass filtering.

    Both derivative stages pass through a first-order Butterworth section.
    The filters start at rest and the first command seeds the difference
    history, so a constant command yields zero derivatives from the start.
    """

    def __init__(self, dt: float, cutoff: float = DEFAULT_CUTOFF):
        """
        Initialize filter.

        Args:
            dt: Command sample period (s)
            cutoff: Low-pass cutoff (rad/s)
        """
        if dt <= 0:
            raise ValueError("Filter sample period must be positive")
        nyquist = np.pi / dt
        if not 0 < cutoff < nyquist:
            raise ValueError(f"Cutoff must lie in (0, {nyquist:.2f}) rad/s, got {cutoff}")
        self.dt = dt
        self.cutoff = cutoff
        self.sos = signal.butter(1, cutoff / nyquist, btype='low', output='sos')
        self.reset()

    def reset(self):
        # filters at rest, one column per Euler angle
        shape = (self.sos.shape[0], 2, 3)
        self._rate_state = np.zeros(shape)
        self._accel_state = np.zeros(shape)
        self._previous_command = None
        self._previous_rate = np.zeros(3)

    def update(self, Psi_d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Push one command sample.

        Returns:
            Tuple of (Psid_dot, Psid_ddot)
        """
        Psi_d = np.asarray(Psi_d, dtype=float)
        if self._previous_command is None:
            self._previous_command = Psi_d.copy()

        raw_rate = wrap_angle(Psi_d - self._previous_command) / self.dt
        rate, self._rate_state = signal.sosfilt(
            self.sos, raw_rate[None, :], axis=0, zi=self._rate_state
        )
        rate = rate[0]

        raw_accel = (rate - self._previous_rate) / self.dt
        accel, self._accel_state = signal.sosfilt(
            self.sos, raw_accel[None, :], axis=0, zi=self._accel_state
        )

        self._previous_command = Psi_d.copy()
        self._previous_rate = rate.copy()
        return rate, accel[0]


def derive_attitude_reference(
    Psi_d_stream: np.ndarray, dt: float, cutoff: float = DEFAULT_CUTOFF
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Filtered first and second derivatives of a uniformly sampled attitude command.

    Args:
        Psi_d_stream: Commands, shape (n, 3) or (n,)
        dt: Sample period (s)
        cutoff: Low-pass cutoff (rad/s)

    Returns:
        Tuple of (Psid_dot, Psid_ddot) with the input's shape
    """
    stream = np.asarray(Psi_d_stream, dtype=float)
    one_dimensional = stream.ndim == 1
    if one_dimensional:
        stream = np.column_stack([stream, np.zeros_like(stream), np.zeros_like(stream)])

    filt = AttitudeReferenceFilter(dt, cutoff)
    rates = np.zeros_like(stream)
    accels = np.zeros_like(stream)
    for k, command in enumerate(stream):
        rates[k], accels[k] = filt.update(command)

    if one_dimensional:
        return rates[:, 0], accels[:, 0]
    return rates, accels
