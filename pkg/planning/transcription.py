"""
Collocation Transcription
Trapezoidal direct collocation of the minimum-time transition problem.

Decision vector layout (physical units):
    z = [t_f, X_0 .. X_{N-1}, U_0 .. U_{N-1}]
with X_k = (x, z, V, gamma) and U_k = (T, alpha). The pitch angle is
recovered afterwards as phi = gamma + alpha.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from core.vehicle import VehicleParams
from planning.mission import MissionSpec
from planning.planar_model import planar_jacobian

logger = logging.getLogger(__name__)

N_STATE = 4
N_INPUT = 2
MIN_NODES = 10

ALPHA_LIMIT = np.pi / 4
THRUST_FLOOR_FRACTION = 1e-3

# Horizon used to place the initial guess of a free terminal position
FREE_HORIZON = 5.0


class InfeasibleMissionError(ValueError):
    """Raised when boundary values contradict the mission's own bounds."""


def trapezoid_defects(X: np.ndarray, rates: np.ndarray, h: float) -> np.ndarray:
    """Trapezoidal defects X_{k+1} - X_k - h/2 (f_k + f_{k+1}) for node-major arrays."""
    X = np.asarray(X, dtype=float)
    rates = np.asarray(rates, dtype=float)
    return X[1:] - X[:-1] - 0.5 * h * (rates[:-1] + rates[1:])


@dataclass(frozen=True)
class TranscriptionOptions:
    """Bounds and weights of the transcribed problem."""
    t_min: float = 1e-3
    t_max: float = 120.0
    smoothing_weight: float = 0.0
    fixed_final_time: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValueError("Final-time bounds must satisfy 0 < t_min < t_max")
        if self.smoothing_weight < 0:
            raise ValueError("smoothing_weight must be non-negative")
        if self.fixed_final_time is not None and not 0 < self.fixed_final_time <= self.t_max:
            raise ValueError("fixed_final_time must lie in (0, t_max]")


@dataclass
class NonlinearProgram:
    """
    Transcribed minimum-time problem.

    Equality constraints are the 4(N-1) collocation defects, each divided by
    the scale of its state component. Inequality constraints (>= 0) are the
    normalized obstacle clearances ((x-x_o)^2 + (z-z_o)^2 - r^2) / r^2 for
    every obstacle at every node, obstacle-major.
    """
    mission: MissionSpec
    params: VehicleParams
    N: int
    lb: np.ndarray
    ub: np.ndarray
    scale: np.ndarray
    options: TranscriptionOptions = field(default_factory=TranscriptionOptions)

    # ==================== LAYOUT ====================

    @property
    def n_var(self) -> int:
        return 1 + (N_STATE + N_INPUT) * self.N

    @property
    def n_defect(self) -> int:
        return N_STATE * (self.N - 1)

    @property
    def n_obstacle(self) -> int:
        return len(self.mission.obstacles) * self.N

    @property
    def state_slice(self) -> slice:
        return slice(1, 1 + N_STATE * self.N)

    @property
    def input_slice(self) -> slice:
        return slice(1 + N_STATE * self.N, self.n_var)

    def state_index(self, k: int, component: int) -> int:
        return 1 + N_STATE * k + component

    def input_index(self, k: int, component: int) -> int:
        return 1 + N_STATE * self.N + N_INPUT * k + component

    def unpack(self, z: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        """Split a decision vector into (t_f, X (N, 4), U (N, 2))."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n_var,):
            raise ValueError(f"Decision vector must have {self.n_var} entries, got {z.shape}")
        X = z[self.state_slice].reshape(self.N, N_STATE)
        U = z[self.input_slice].reshape(self.N, N_INPUT)
        return float(z[0]), X, U

    def pack(self, t_f: float, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        return np.concatenate([[t_f], np.asarray(X, dtype=float).ravel(), np.asarray(U, dtype=float).ravel()])

    @property
    def state_scale(self) -> np.ndarray:
        return self.scale[1:1 + N_STATE]

    # ==================== OBJECTIVE ====================

    def objective(self, z: np.ndarray) -> float:
        t_f, _, U = self.unpack(z)
        value = t_f
        if self.options.smoothing_weight > 0:
            dU = np.diff(U, axis=0) / self.scale[self.input_slice][:N_INPUT]
            value += self.options.smoothing_weight * float(np.sum(dU ** 2))
        return value

    def objective_gradient(self, z: np.ndarray) -> np.ndarray:
        grad = np.zeros(self.n_var)
        grad[0] = 1.0
        if self.options.smoothing_weight > 0:
            grad[self.input_slice] = (self.smoothing_matrix() @ z[self.input_slice])
        return grad

    def objective_hessian(self) -> np.ndarray:
        H = np.zeros((self.n_var, self.n_var))
        if self.options.smoothing_weight > 0:
            H[self.input_slice, self.input_slice] = self.smoothing_matrix()
        return H

    def smoothing_matrix(self) -> np.ndarray:
        """Hessian of the input-smoothing term with respect to the stacked inputs."""
        n = self.N * N_INPUT
        D = np.zeros((n - N_INPUT, n))
        rows = np.arange(n - N_INPUT)
        D[rows, rows] = -1.0
        D[rows, rows + N_INPUT] = 1.0
        weights = 1.0 / self.scale[self.input_slice] ** 2
        return 2.0 * self.options.smoothing_weight * (D.T @ D) * np.sqrt(np.outer(weights, weights))

    # ==================== CONSTRAINTS ====================

    def defects(self, z: np.ndarray) -> np.ndarray:
        """Scaled trapezoidal defects X_{k+1} - X_k - h/2 (f_k + f_{k+1})."""
        t_f, X, U = self.unpack(z)
        rates, _ = planar_jacobian(X, U, self.params)
        raw = trapezoid_defects(X, rates, t_f / (self.N - 1))
        return (raw / self.state_scale).ravel()

    def defect_jacobian(self, z: np.ndarray) -> np.ndarray:
        t_f, X, U = self.unpack(z)
        rates, jac = planar_jacobian(X, U, self.params)
        N = self.N
        h = t_f / (N - 1)
        J = np.zeros((self.n_defect, self.n_var))
        identity = np.eye(N_STATE)

        for k in range(N - 1):
            rows = slice(N_STATE * k, N_STATE * (k + 1))
            J[rows, 0] = -(rates[k] + rates[k + 1]) / (2.0 * (N - 1))
            for node, sign in ((k, -1.0), (k + 1, 1.0)):
                A = jac[node, :, :N_STATE]
                B = jac[node, :, N_STATE:]
                s0 = self.state_index(node, 0)
                u0 = self.input_index(node, 0)
                J[rows, s0:s0 + N_STATE] = sign * identity - 0.5 * h * A
                J[rows, u0:u0 + N_INPUT] = -0.5 * h * B

        return J / np.tile(self.state_scale, N - 1)[:, None]

    def obstacle_constraints(self, z: np.ndarray) -> np.ndarray:
        _, X, _ = self.unpack(z)
        values = []
        for obstacle in self.mission.obstacles:
            r2 = obstacle.inflated_radius ** 2
            values.append(((X[:, 0] - obstacle.x) ** 2 + (X[:, 1] - obstacle.z) ** 2 - r2) / r2)
        return np.concatenate(values) if values else np.zeros(0)

    def obstacle_jacobian(self, z: np.ndarray) -> np.ndarray:
        _, X, _ = self.unpack(z)
        J = np.zeros((self.n_obstacle, self.n_var))
        for i, obstacle in enumerate(self.mission.obstacles):
            r2 = obstacle.inflated_radius ** 2
            for k in range(self.N):
                row = i * self.N + k
                J[row, self.state_index(k, 0)] = 2.0 * (X[k, 0] - obstacle.x) / r2
                J[row, self.state_index(k, 1)] = 2.0 * (X[k, 1] - obstacle.z) / r2
        return J

    def max_defect(self, z: np.ndarray) -> float:
        """Largest unscaled defect magnitude."""
        d = self.defects(z).reshape(self.N - 1, N_STATE) * self.state_scale
        return float(np.max(np.abs(d))) if d.size else 0.0

    # ==================== INITIAL GUESS ====================

    def initial_guess(self) -> np.ndarray:
        """
        Straight-line cold start.

        States are interpolated linearly between the boundary values, thrust
        is set to the weight, and pitch is interpolated between the boundary
        flight-path angles so that alpha starts at zero.
        """
        mission = self.mission
        start = mission.initial
        mean_speed = 0.5 * (start.V_i + (mission.terminal.V_i if mission.terminal.V_i is not None else start.V_i))
        mean_speed = max(mean_speed, mission.v_min)

        x_f = mission.terminal.x
        if x_f is None:
            x_f = start.x + mean_speed * FREE_HORIZON
        z_f = mission.terminal_z if mission.terminal_z is not None else start.z
        V_f = mission.terminal.V_i if mission.terminal.V_i is not None else start.V_i
        gamma_f = mission.terminal.gamma if mission.terminal.gamma is not None else start.gamma

        distance = float(np.hypot(x_f - start.x, z_f - start.z))
        t_guess = float(np.clip(distance / mean_speed if distance > 0 else 1.0,
                                self.options.t_min, self.options.t_max))

        s = np.linspace(0.0, 1.0, self.N)
        X = np.column_stack([
            start.x + s * (x_f - start.x),
            start.z + s * (z_f - start.z),
            start.V_i + s * (V_f - start.V_i),
            start.gamma + s * (gamma_f - start.gamma),
        ])
        phi = start.gamma + s * (gamma_f - start.gamma)
        alpha = np.clip(phi - X[:, 3], -ALPHA_LIMIT, ALPHA_LIMIT)
        U = np.column_stack([np.full(self.N, self.params.m * self.params.g), alpha])

        z0 = self.pack(t_guess, X, U)
        return np.clip(z0, self.lb, self.ub)

    def __repr__(self) -> str:
        return (f"NonlinearProgram({self.mission.name}, N={self.N}, vars={self.n_var}, "
                f"defects={self.n_defect}, obstacles={self.n_obstacle})")


def _check_inside(name: str, value: float, low: float, high: float):
    if not low <= value <= high:
        raise InfeasibleMissionError(
            f"Boundary value {name}={value:.6g} lies outside its bounds [{low:.6g}, {high:.6g}]"
        )


def transcribe(
    mission: MissionSpec,
    N: int,
    params: VehicleParams,
    options: TranscriptionOptions = TranscriptionOptions(),
) -> NonlinearProgram:
    """
    Transcribe a mission into a trapezoidal-collocation nonlinear program.

    Args:
        mission: Mission definition
        N: Number of collocation nodes (>= 10)
        params: Vehicle parameters
        options: Final-time bounds and input smoothing weight

    Returns:
        NonlinearProgram with box bounds, boundary conditions and scales

    Raises:
        ValueError: If N < 10
        InfeasibleMissionError: If a boundary value violates its own bounds
    """
    if N < MIN_NODES:
        raise ValueError(f"Collocation needs at least {MIN_NODES} nodes, got {N}")
    if params.T_max <= THRUST_FLOOR_FRACTION * params.m * params.g:
        raise InfeasibleMissionError("T_max is below the thrust floor")

    n_var = 1 + (N_STATE + N_INPUT) * N
    lb = np.full(n_var, -np.inf)
    ub = np.full(n_var, np.inf)
    lb[0], ub[0] = options.t_min, options.t_max
    if options.fixed_final_time is not None:
        lb[0] = ub[0] = options.fixed_final_time

    state_low = np.array([mission.x_bounds[0], mission.z_bounds[0], mission.v_min, -np.pi])
    state_high = np.array([mission.x_bounds[1], mission.z_bounds[1], mission.v_max, np.pi])
    for k in range(N):
        i = 1 + N_STATE * k
        lb[i:i + N_STATE] = state_low
        ub[i:i + N_STATE] = state_high
    input_low = np.array([THRUST_FLOOR_FRACTION * params.m * params.g, -ALPHA_LIMIT])
    input_high = np.array([params.T_max, ALPHA_LIMIT])
    for k in range(N):
        i = 1 + N_STATE * N + N_INPUT * k
        lb[i:i + N_INPUT] = input_low
        ub[i:i + N_INPUT] = input_high

    # Boundary speeds may sit outside the interior speed box but must stay positive
    boundary_low = state_low.copy()
    boundary_low[2] = 0.0
    names = ('x', 'z', 'V_i', 'gamma')

    for c, value in enumerate(mission.initial.as_array()):
        _check_inside(f"initial.{names[c]}", value, boundary_low[c], state_high[c])
        if c == 2 and value <= 0:
            raise InfeasibleMissionError("Initial inertial speed must be positive")
        lb[1 + c] = ub[1 + c] = value

    terminal = (mission.terminal.x, mission.terminal_z, mission.terminal.V_i, mission.terminal.gamma)
    last = 1 + N_STATE * (N - 1)
    for c, value in enumerate(terminal):
        if value is None:
            continue
        _check_inside(f"terminal.{names[c]}", value, boundary_low[c], state_high[c])
        if c == 2 and value <= 0:
            raise InfeasibleMissionError("Terminal inertial speed must be positive")
        lb[last + c] = ub[last + c] = value

    for obstacle in mission.obstacles:
        if obstacle.clearance(mission.initial.x, mission.initial.z) < 0:
            raise InfeasibleMissionError(f"Initial position lies inside obstacle {obstacle}")
        if mission.terminal.x is not None and mission.terminal_z is not None:
            if obstacle.clearance(mission.terminal.x, mission.terminal_z) < 0:
                raise InfeasibleMissionError(f"Terminal position lies inside obstacle {obstacle}")

    # Scales: time by a straight-line guess, positions by the mission span,
    # speed by v_max, thrust by the weight
    x_f = mission.terminal.x if mission.terminal.x is not None else mission.initial.x
    z_f = mission.terminal_z if mission.terminal_z is not None else mission.initial.z
    span = max(abs(x_f - mission.initial.x), abs(z_f - mission.initial.z), 1.0)
    mean_speed = max(0.5 * (mission.initial.V_i + (mission.terminal.V_i or mission.initial.V_i)), 1.0)
    t_scale = float(np.clip(span / mean_speed, 1.0, options.t_max))
    state_scale = np.array([span, span, mission.v_max, 1.0])
    input_scale = np.array([params.m * params.g, 1.0])
    scale = np.concatenate([[t_scale], np.tile(state_scale, N), np.tile(input_scale, N)])

    nlp = NonlinearProgram(mission=mission, params=params, N=N, lb=lb, ub=ub, scale=scale, options=options)
    logger.debug(f"Transcribed {nlp}")
    return nlp
