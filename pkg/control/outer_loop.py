"""
Outer Loop Position Control
Dynamic inversion of the translational dynamics with aerodynamic feedforward.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from control.gains import Gains
from core.vehicle import VehicleParams
from planning.reference import ReferenceSample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OuterLoopCommand:
    """
    Outer loop output.

    Attributes:
        T_c: Thrust command (N)
        Psi_d: Attitude command [phi_c, theta_c, psi_c] (rad)
        Pdd_c: Inertial acceleration command (m/s^2)
        P_e: Position error P_d - P (m)
        Pdot_e: Velocity error (m/s)
        held: True when the attitude command was held from the previous update
    """
    T_c: float
    Psi_d: np.ndarray
    Pdd_c: np.ndarray
    P_e: np.ndarray
    Pdot_e: np.ndarray
    held: bool = False


def thrust_channels(Pdd_c: np.ndarray, F_A_star: np.ndarray, params: VehicleParams) -> np.ndarray:
    """
    Inertial force the rotors must supply.

    [m*xdd_c + FAx*, FAy* + m*ydd_c, FAz* + m*(zdd_c + g)] with z up.
    """
    m = params.m
    return np.array([
        m * Pdd_c[0] + F_A_star[0],
        F_A_star[1] + m * Pdd_c[1],
        F_A_star[2] + m * (Pdd_c[2] + params.g),
    ])


def invert_thrust(
    channels: np.ndarray, previous_Psi: Optional[np.ndarray] = None
) -> tuple:
    """
    Scalar thrust and (phi_c, theta_c) whose thrust axis R_B^I e_2 points along channels.

    With psi = 0 the thrust direction is [sin(theta) sin(phi), cos(phi), cos(theta) sin(phi)].

    Returns:
        Tuple of (T_c, Psi_c, held)
    """
    T_x, T_y, T_z = channels
    T_c = float(np.sqrt(T_x ** 2 + T_y ** 2 + T_z ** 2))
    previous = np.array([np.pi / 2, 0.0, 0.0]) if previous_Psi is None else previous_Psi
    held = False

    sign_z = 1.0 if T_z >= 0.0 else -1.0
    if T_z == 0.0 and T_x == 0.0:
        theta_c = float(previous[1])
    else:
        # |theta_c| <= pi/2; the sign of T_z goes into phi_c
        theta_c = float(np.arctan2(sign_z * T_x, abs(T_z)))

    numerator = sign_z * float(np.hypot(T_x, T_z))
    if numerator == 0.0 and T_y == 0.0:
        phi_c = float(previous[0])
        theta_c = float(previous[1])
        held = True
        logger.warning("Outer loop demand vanished; holding previous attitude command")
    else:
        phi_c = float(np.arctan2(numerator, T_y))

    return T_c, np.array([phi_c, theta_c, 0.0]), held


def outer_loop(
    P: np.ndarray,
    Pdot: np.ndarray,
    ref: ReferenceSample,
    gains: Gains,
    params: VehicleParams,
    previous_Psi: Optional[np.ndarray] = None,
) -> OuterLoopCommand:
    """
    Position controller: PD acceleration command plus thrust/attitude inversion.

    Pdd_c = Pdd_d + K_DX Pdot_e + K_PX P_e

    Args:
        P: Inertial position (m)
        Pdot: Inertial velocity (m/s)
        ref: Reference sample (P_d, Pd_dot, Pd_ddot, F_A*)
        gains: Controller gains
        params: Vehicle parameters
        previous_Psi: Last attitude command, held in the degenerate zero-demand case

    Returns:
        OuterLoopCommand
    """
    P_e = np.asarray(ref.P_d, dtype=float) - np.asarray(P, dtype=float)
    Pdot_e = np.asarray(ref.Pd_dot, dtype=float) - np.asarray(Pdot, dtype=float)
    Pdd_c = np.asarray(ref.Pd_ddot, dtype=float) + gains.K_DX * Pdot_e + gains.K_PX * P_e

    channels = thrust_channels(Pdd_c, np.asarray(ref.F_A_star, dtype=float), params)
    T_c, Psi_d, held = invert_thrust(channels, previous_Psi)

    return OuterLoopCommand(T_c=T_c, Psi_d=Psi_d, Pdd_c=Pdd_c, P_e=P_e, Pdot_e=Pdot_e, held=held)


def thrust_vector(T_c: float, Psi) -> np.ndarray:
    """Inertial thrust vector T_c * R_B^I(Psi) e_2."""
    phi, theta, psi = Psi
    body_axis = np.array([
        np.sin(theta) * np.sin(phi),
        np.cos(phi),
        np.cos(theta) * np.sin(phi),
    ])
    c, s = np.cos(psi), np.sin(psi)
    yaw = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return T_c * (yaw @ body_axis)
