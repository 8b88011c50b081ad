"""
Planar Transition Model
Reduced-order point-mass dynamics in the vertical plane with rotor-wake lift.

All array functions accept real or complex inputs so derivatives can be
taken by complex-step differentiation.
"""

import logging
from typing import Tuple

import numpy as np

from core.aerodynamics import WAKE_GAIN, drag_coefficient, lift_coefficient
from core.vehicle import AeroFit, VehicleParams
from planning.mission import PlanarInput, PlanarState

logger = logging.getLogger(__name__)

# Flight-path-angle dynamics divide by V_i
V_EPS = 1e-6

COMPLEX_STEP = 1e-30


class SingularFlightPathError(ValueError):
    """Raised when the inertial speed is too small for the flight-path-angle dynamics."""


def planar_wake(T, params: VehicleParams):
    """Planner wake speed 1.2 * sqrt(T / (8*rho*pi*R^2))."""
    return WAKE_GAIN * np.sqrt(T / (8.0 * params.rho * np.pi * params.R ** 2))


def planar_aero(V, T, alpha, params: VehicleParams, fit: AeroFit = None):
    """
    Wake-coupled aerodynamic quantities of the planar model.

    Returns:
        Tuple of (V_w, V_a, alpha_e, L, D)
    """
    fit = fit or params.aero_fit
    V_w = planar_wake(T, params)
    V_a = np.sqrt(V ** 2 + V_w ** 2 + 2.0 * V * V_w * np.cos(alpha))
    alpha_e = np.arcsin(V * np.sin(alpha) / V_a)
    L = 0.5 * params.rho * lift_coefficient(alpha_e, fit) * params.S_w * V_a ** 2
    D = 0.5 * params.rho * drag_coefficient(alpha, fit) * params.S_f * V ** 2
    return V_w, V_a, alpha_e, L, D


def planar_rates(x, z, V, gamma, T, alpha, params: VehicleParams, fit: AeroFit = None):
    """
    Vectorized planar dynamics with the angle of attack as input.

    Returns:
        Array of shape (4, ...) with (x_dot, z_dot, V_dot, gamma_dot)
    """
    _, _, alpha_e, L, D = planar_aero(V, T, alpha, params, fit)
    m, g = params.m, params.g
    delta = alpha - alpha_e
    x_dot = V * np.cos(gamma)
    z_dot = V * np.sin(gamma)
    V_dot = (T * np.cos(alpha) - L * np.sin(delta) - D * np.cos(delta)) / m - g * np.sin(gamma)
    gamma_dot = (T * np.sin(alpha) + L * np.cos(delta) - D * np.sin(delta)) / (m * V) - g * np.cos(gamma) / V
    return np.array([x_dot, z_dot, V_dot, gamma_dot])


def planar_jacobian(states: np.ndarray, inputs: np.ndarray, params: VehicleParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Node-wise rates and their Jacobians by complex-step differentiation.

    Args:
        states: Node states, shape (n, 4) as (x, z, V, gamma)
        inputs: Node inputs, shape (n, 2) as (T, alpha)
        params: Vehicle parameters

    Returns:
        Tuple of (rates (n, 4), jacobian (n, 4, 6)) with the jacobian taken
        with respect to (x, z, V, gamma, T, alpha)
    """
    point = np.hstack([states, inputs]).astype(float)
    n = point.shape[0]
    rates = planar_rates(*point.T, params).T
    jacobian = np.empty((n, 4, 6))
    for j in range(6):
        perturbed = point.astype(complex)
        perturbed[:, j] += 1j * COMPLEX_STEP
        jacobian[:, :, j] = planar_rates(*perturbed.T, params).T.imag / COMPLEX_STEP
    return rates, jacobian


def planar_derivative(s: PlanarState, u: PlanarInput, params: VehicleParams) -> np.ndarray:
    """
    Planar dynamics with (T, phi) inputs and alpha = phi - gamma.

    Args:
        s: Planar state
        u: Planar input
        params: Vehicle parameters

    Returns:
        Array (x_dot, z_dot, V_dot, gamma_dot)

    Raises:
        SingularFlightPathError: If V_i <= V_EPS
    """
    if s.V_i <= V_EPS:
        raise SingularFlightPathError(
            f"Inertial speed {s.V_i:.3e} m/s is at or below {V_EPS:.0e}; gamma_dot is singular"
        )
    alpha = u.phi - s.gamma
    return planar_rates(s.x, s.z, s.V_i, s.gamma, u.T, alpha, params).astype(float)


def planar_acceleration(V, gamma, V_dot, gamma_dot) -> Tuple[np.ndarray, np.ndarray]:
    """In-plane acceleration (x_ddot, z_ddot) from speed and flight-path-angle rates."""
    x_ddot = V_dot * np.cos(gamma) - V * gamma_dot * np.sin(gamma)
    z_ddot = V_dot * np.sin(gamma) + V * gamma_dot * np.cos(gamma)
    return x_ddot, z_ddot


def aero_load(L, D, beta):
    """
    Aerodynamic load (negative of the force on the vehicle) in the plane, z up.

    beta = gamma + alpha - alpha_e is the direction of the wake-augmented flow.

    Returns:
        Tuple of (downrange component, vertical component)
    """
    return L * np.sin(beta) + D * np.cos(beta), D * np.sin(beta) - L * np.cos(beta)
