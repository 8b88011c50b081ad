"""
Attitude Kinematics
Z-Y-X Euler rotations and Euler-rate maps for the nose-forward body frame.

Psi = [phi, theta, psi]: phi is pitch about the body x (span) axis, theta is
roll about the body y (nose) axis, psi is heading. Hover is phi = pi/2.
"""

import logging

import numpy as np
from scipy.spatial.transform import Rotation

logger = logging.getLogger(__name__)

# |cos(theta)| below this makes the Euler-rate map singular
GIMBAL_LOCK_TOLERANCE = 1e-6


class GimbalLockError(ValueError):
    """Raised when the roll angle reaches the Euler-rate singularity."""


def wrap_angle(angle):
    """Wrap angles to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def rotation_body_to_inertial(Psi) -> np.ndarray:
    """
    Rotation matrix R_B^I = Rz(psi) Ry(theta) Rx(phi).

    Args:
        Psi: Euler attitude [phi, theta, psi] (rad)

    Returns:
        3x3 matrix taking body components to inertial components
    """
    phi, theta, psi = Psi
    return Rotation.from_euler('ZYX', [psi, theta, phi]).as_matrix()


def rotation_inertial_to_body(Psi) -> np.ndarray:
    return rotation_body_to_inertial(Psi).T


def _check_gimbal(theta: float):
    if abs(np.cos(theta)) < GIMBAL_LOCK_TOLERANCE:
        raise GimbalLockError(
            f"Roll angle theta={theta:.6f} rad is at the Euler-rate singularity"
        )


def euler_rate_matrix(Psi) -> np.ndarray:
    """
    L_I^B mapping Euler rates to body rates, omega_b = L @ Psi_dot.

    Raises:
        GimbalLockError: If |cos(theta)| is below tolerance
    """
    phi, theta, _ = Psi
    _check_gimbal(theta)
    sphi, cphi = np.sin(phi), np.cos(phi)
    sth, cth = np.sin(theta), np.cos(theta)
    return np.array([
        [1.0, 0.0, -sth],
        [0.0, cphi, sphi * cth],
        [0.0, -sphi, cphi * cth],
    ])


def euler_rate_matrix_dot(Psi, Psi_dot) -> np.ndarray:
    """Time derivative of L_I^B along the Euler-rate trajectory Psi_dot."""
    phi, theta, _ = Psi
    phi_dot, theta_dot, _ = Psi_dot
    sphi, cphi = np.sin(phi), np.cos(phi)
    sth, cth = np.sin(theta), np.cos(theta)
    return np.array([
        [0.0, 0.0, -cth * theta_dot],
        [0.0, -sphi * phi_dot, cphi * cth * phi_dot - sphi * sth * theta_dot],
        [0.0, -cphi * phi_dot, -sphi * cth * phi_dot - cphi * sth * theta_dot],
    ])


def euler_rates(Psi, omega_b) -> np.ndarray:
    """Euler rates Psi_dot = (L_I^B)^-1 @ omega_b."""
    return np.linalg.solve(euler_rate_matrix(Psi), np.asarray(omega_b, dtype=float))
