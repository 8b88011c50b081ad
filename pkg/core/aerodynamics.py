"""
Aerodynamics Module
Wake-coupled lift, drag and side force of the quadrotor biplane.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from core.kinematics import rotation_body_to_inertial
from core.vehicle import AeroFit, VehicleParams

logger = logging.getLogger(__name__)

# Induced-velocity gain of the momentum-theory wake model
WAKE_GAIN = 1.2


@dataclass(frozen=True)
class Environment:
    """Crosswind seen by the vehicle."""
    V_c: float = 0.0
    wind_direction: Tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if self.V_c < 0:
            raise ValueError("Crosswind speed V_c must be non-negative")
        direction = np.asarray(self.wind_direction, dtype=float)
        norm = np.linalg.norm(direction)
        if direction.shape != (3,) or norm == 0:
            raise ValueError("wind_direction must be a non-zero 3-vector")
        object.__setattr__(self, 'wind_direction', tuple(direction / norm))

    @property
    def direction(self) -> np.ndarray:
        return np.asarray(self.wind_direction)


@dataclass
class AeroState:
    """Aerodynamic quantities at one plant state."""
    V: float
    V_w: float
    alpha: float
    alpha_e: float
    L: float
    D: float
    Y: float
    F_A: np.ndarray = field(default_factory=lambda: np.zeros(3))
    M_A: np.ndarray = field(default_factory=lambda: np.zeros(3))


def lift_coefficient(alpha_e, fit: AeroFit):
    """
    Wing lift coefficient of the sinusoidal regression fit.

    Accepts scalars or arrays, real or complex.
    """
    return (
        (fit.a4 * alpha_e + fit.a3) * np.exp(-fit.a2 * alpha_e ** 2)
        + fit.a1 * np.sin(2 * alpha_e)
        + fit.a0
    )


def drag_coefficient(alpha, fit: AeroFit):
    """Fuselage drag coefficient b1*cos(2*alpha) + b0 (even in alpha)."""
    return fit.b1 * np.cos(2 * alpha) + fit.b0


def side_force_coefficient(alpha, params: VehicleParams):
    """Linear lateral force fit; zero unless the vehicle config sets a slope."""
    return params.side_force_slope * alpha


def rotor_wake(T_total: float, params: VehicleParams) -> float:
    """
    Wake-induced airspeed over the wings from hovering momentum theory.

    V_w = 1.2 * sqrt(T / (2*rho*pi*R^2))

    Args:
        T_total: Total rotor thrust (N)
        params: Vehicle parameters

    Returns:
        Wake airspeed V_w (m/s)
    """
    if T_total < 0:
        raise ValueError(f"Rotor thrust must be non-negative, got {T_total:.4f} N")
    return WAKE_GAIN * float(np.sqrt(T_total / (2.0 * params.rho * np.pi * params.R ** 2)))


def effective_aoa(w: float, v: float, V_w: float) -> float:
    """
    Effective angle of attack atan2(w, v + V_w).

    The flow-free point (0, 0) is defined as zero.
    """
    denominator = v + V_w
    if w == 0.0 and denominator == 0.0:
        return 0.0
    return float(np.arctan2(w, denominator))


def aero_forces_moments(
    state,
    T_total: float,
    env: Environment,
    params: VehicleParams,
    R_BI: Optional[np.ndarray] = None,
) -> AeroState:
    """
    Aerodynamic force and moment on the vehicle in the body frame.

    The wind frame is the body frame rotated about body x by the effective
    angle of attack; lift acts toward body +z and drag against the
    wake-augmented flow.

    Args:
        state: RigidBodyState
        T_total: Total rotor thrust (N)
        env: Crosswind environment
        params: Vehicle parameters
        R_BI: Body-to-inertial rotation, if already computed

    Returns:
        AeroState with L, D, Y and body-frame F_A, M_A
    """
    _, v, w = state.v_b
    # Angle of attack is positive with the flow on the lower (-z) surface
    w_down = -w
    V = float(np.hypot(v, w))
    V_w = rotor_wake(T_total, params)
    alpha = effective_aoa(w_down, v, 0.0)
    alpha_e = effective_aoa(w_down, v, V_w)

    fit = params.aero_fit
    q_wake = 0.5 * params.rho * (V + V_w) ** 2
    L = q_wake * params.S_w * float(lift_coefficient(alpha_e, fit))
    D = q_wake * params.S_f * float(drag_coefficient(alpha, fit))

    if R_BI is None:
        R_BI = rotation_body_to_inertial(state.Psi)
    if env.V_c > 0 and params.S_y > 0:
        # Side force acts along the body span, signed by the crosswind component on it
        span_component = float(env.direction @ R_BI[:, 0])
        Y = (0.5 * params.rho * env.V_c ** 2 * params.S_y
             * float(side_force_coefficient(alpha, params)) * span_component)
    else:
        Y = 0.0

    s, c = np.sin(alpha_e), np.cos(alpha_e)
    F_A = np.array([Y, -D * c + L * s, D * s + L * c])
    M_A = np.cross(F_A, R_BI.T @ params.r_ac)

    return AeroState(
        V=V, V_w=V_w, alpha=alpha, alpha_e=alpha_e,
        L=L, D=D, Y=Y, F_A=F_A, M_A=M_A,
    )


def aero_load_inertial(aero: AeroState, Psi) -> np.ndarray:
    """
    Aerodynamic load in inertial components (negative of the force on the vehicle).

    This is the quantity the outer loop feeds forward.
    """
    return -(rotation_body_to_inertial(Psi) @ aero.F_A)
