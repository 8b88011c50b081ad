"""
Integrator
Classical fourth-order Runge-Kutta stepping for the plant.
"""

import logging
from typing import Callable

import numpy as np

from core.aerodynamics import Environment
from core.dynamics import RigidBodyState, state_derivative
from core.vehicle import RotorCommand, VehicleParams

logger = logging.getLogger(__name__)


def rk4_step(fun: Callable, t: float, y: np.ndarray, dt: float, *args) -> np.ndarray:
    """
    One classical RK4 step of y' = fun(t, y, *args).

    Args:
        fun: Right-hand side
        t: Current time
        y: Current state vector
        dt: Step size
        *args: Extra arguments passed to fun

    Returns:
        State vector at t + dt
    """
    if dt <= 0:
        raise ValueError(f"Integration step must be positive, got {dt}")
    k1 = fun(t, y, *args)
    k2 = fun(t + dt / 2, y + 0.5 * dt * k1, *args)
    k3 = fun(t + dt / 2, y + 0.5 * dt * k2, *args)
    k4 = fun(t + dt, y + dt * k3, *args)
    return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_rk4(fun: Callable, t_start: float, t_end: float, steps: int, y0, *args) -> np.ndarray:
    """Fixed-step RK4 over [t_start, t_end]; returns the state history (steps + 1 rows)."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    t = np.linspace(t_start, t_end, steps + 1)
    dt = t[1] - t[0]
    y = np.zeros((steps + 1, len(y0)))
    y[0] = y0
    for i in range(steps):
        y[i + 1] = rk4_step(fun, t[i], y[i], dt, *args)
    return y


def _plant_rhs(t, x, rotor_speeds, env, params):
    return state_derivative(RigidBodyState.from_vector(x), rotor_speeds, env, params)


def step_rk4(
    state: RigidBodyState,
    u: RotorCommand,
    dt: float,
    env: Environment,
    params: VehicleParams,
) -> RigidBodyState:
    """
    Advance the plant by dt with rotor speeds held constant.

    Raises:
        GimbalLockError: Propagated from the dynamics
    """
    x_next = rk4_step(_plant_rhs, 0.0, state.to_vector(), dt, u, env, params)
    return RigidBodyState.from_vector(x_next)
