"""
Rigid Body Dynamics
Six degree-of-freedom plant: propulsive, gravitational, inertial and aerodynamic loads.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from core.aerodynamics import Environment, aero_forces_moments, rotor_wake
from core.kinematics import (
    euler_rates,
    rotation_body_to_inertial,
    wrap_angle,
)
from core.vehicle import RotorCommand, VehicleParams, rotor_forward_map

logger = logging.getLogger(__name__)

STATE_SIZE = 12


@dataclass
class RigidBodyState:
    """
    Plant state.

    Attributes:
        P: Inertial position [x, y, z] (m), z up
        Psi: Euler attitude [phi, theta, psi] (rad)
        v_b: Body velocity [u, v, w] (m/s)
        omega_b: Body rates [p, q, r] (rad/s)
    """
    P: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Psi: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega_b: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ('P', 'Psi', 'v_b', 'omega_b'):
            value = np.asarray(getattr(self, name), dtype=float).copy()
            if value.shape != (3,):
                raise ValueError(f"RigidBodyState.{name} must have three components")
            setattr(self, name, value)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.P, self.Psi, self.v_b, self.omega_b])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> 'RigidBodyState':
        x = np.asarray(x, dtype=float)
        if x.shape != (STATE_SIZE,):
            raise ValueError(f"State vector must have {STATE_SIZE} entries")
        return cls(P=x[0:3], Psi=x[3:6], v_b=x[6:9], omega_b=x[9:12])

    def wrapped(self) -> 'RigidBodyState':
        return RigidBodyState(
            P=self.P, Psi=wrap_angle(self.Psi), v_b=self.v_b, omega_b=self.omega_b
        )

    @property
    def P_dot(self) -> np.ndarray:
        """Inertial velocity R_B^I @ v_b."""
        return rotation_body_to_inertial(self.Psi) @ self.v_b

    @classmethod
    def hover(cls, position=(0.0, 0.0, 0.0)) -> 'RigidBodyState':
        """Nose-up hover at rest."""
        return cls(P=np.asarray(position, dtype=float), Psi=np.array([np.pi / 2, 0.0, 0.0]))

    @classmethod
    def from_inertial(cls, P, P_dot, Psi, omega_b=(0.0, 0.0, 0.0)) -> 'RigidBodyState':
        """Build a state from inertial velocity and attitude."""
        Psi = np.asarray(Psi, dtype=float)
        v_b = rotation_body_to_inertial(Psi).T @ np.asarray(P_dot, dtype=float)
        return cls(P=P, Psi=Psi, v_b=v_b, omega_b=omega_b)

    def __repr__(self) -> str:
        return (
            f"RigidBodyState(P={np.round(self.P, 3).tolist()}, "
            f"Psi={np.round(self.Psi, 4).tolist()})"
        )


def state_derivative(
    state: RigidBodyState,
    rotor_speeds: RotorCommand,
    env: Environment,
    params: VehicleParams,
) -> np.ndarray:
    """
    Time derivative of the 12-state plant.

    Translational: v_dot = [0, T/m, 0] + F_A/m + R_I^B g + [rv - qw, pw - ru, qu - pv]
    Rotational:    Euler's equations with rotor and aerodynamic moments
    Kinematics:    Psi_dot = (L_I^B)^-1 omega_b, P_dot = R_B^I v_b

    Args:
        state: Current plant state
        rotor_speeds: Rotor speeds
        env: Crosswind environment
        params: Vehicle parameters

    Returns:
        Derivative in RigidBodyState.to_vector ordering

    Raises:
        GimbalLockError: At the Euler-rate singularity
    """
    T, rotor_moments = rotor_forward_map(rotor_speeds, params)
    R_BI = rotation_body_to_inertial(state.Psi)
    aero = aero_forces_moments(state, T, env, params, R_BI=R_BI)

    u, v, w = state.v_b
    p, q, r = state.omega_b

    v_dot = (
        np.array([0.0, T / params.m, 0.0])
        + aero.F_A / params.m
        + R_BI.T @ np.array([0.0, 0.0, -params.g])
        + np.array([r * v - q * w, p * w - r * u, q * u - p * v])
    )

    moments = rotor_moments + aero.M_A
    omega_dot = np.array([
        (moments[0] + (params.Iyy - params.Izz) * q * r) / params.Ixx,
        (moments[1] + (params.Izz - params.Ixx) * r * p) / params.Iyy,
        (moments[2] + (params.Ixx - params.Iyy) * p * q) / params.Izz,
    ])

    Psi_dot = euler_rates(state.Psi, state.omega_b)
    P_dot = R_BI @ state.v_b

    return np.concatenate([P_dot, Psi_dot, v_dot, omega_dot])


def inertial_acceleration(
    state: RigidBodyState,
    rotor_speeds: RotorCommand,
    env: Environment,
    params: VehicleParams,
) -> np.ndarray:
    """Inertial acceleration of the center of mass, R_B^I (F/m)."""
    T, _ = rotor_forward_map(rotor_speeds, params)
    aero = aero_forces_moments(state, T, env, params)
    specific_force = np.array([0.0, T / params.m, 0.0]) + aero.F_A / params.m
    return (rotation_body_to_inertial(state.Psi) @ specific_force
            + np.array([0.0, 0.0, -params.g]))


def hover_trim(
    params: VehicleParams,
    env: Environment = Environment(),
    iterations: int = 100,
    tol: float = 1e-12,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Thrust and pitch that hold the vehicle at rest against gravity and wake loads.

    At rest the body-frame aerodynamic force depends on thrust alone, so the
    trim is found by fixed-point iteration on (T, phi).

    Returns:
        Tuple of (T, Psi, inertial aerodynamic load at trim)
    """
    load = np.zeros(3)
    T, Psi = params.hover_thrust, np.array([np.pi / 2, 0.0, 0.0])
    still = RigidBodyState.hover()
    for _ in range(iterations):
        required = load + np.array([0.0, 0.0, params.m * params.g])
        T_new = float(np.linalg.norm(required))
        phi = float(np.arctan2(required[2], required[1]))
        Psi = np.array([phi, 0.0, 0.0])
        still.Psi = Psi
        aero = aero_forces_moments(still, T_new, env, params)
        load_new = -(rotation_body_to_inertial(Psi) @ aero.F_A)
        converged = abs(T_new - T) < tol and np.linalg.norm(load_new - load) < tol
        T, load = T_new, load_new
        if converged:
            break
    logger.debug(f"Hover trim: T={T:.4f} N, phi={Psi[0]:.6f} rad, "
                 f"V_w={rotor_wake(T, params):.3f} m/s")
    return T, Psi, load
