"""
Minimum-Time Planner
Solves the transcribed transition problem and turns the solution into a
reference trajectory with aerodynamic feedforward.
"""

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import OptimizeResult

from core.vehicle import AeroFit, VehicleParams
from planning.auglag import AugLagOptions, PlannerConvergenceError, minimize_auglag
from planning.mission import MissionSpec
from planning.planar_model import aero_load, planar_acceleration, planar_aero, planar_rates
from planning.reference import ReferenceTrajectory
from planning.transcription import (
    N_INPUT,
    N_STATE,
    NonlinearProgram,
    TranscriptionOptions,
    transcribe,
)

logger = logging.getLogger(__name__)


class FeedforwardMode(str, Enum):
    """Aerodynamic feedforward condition flown by the controller."""
    NONE = "none"
    OPTIMAL = "optimal"
    PERTURBED = "perturbed"


@dataclass(frozen=True)
class SolverOptions:
    """
    Planner settings.

    Attributes:
        nodes: Number of collocation nodes
        tol_defect: Max unscaled collocation defect
        tol_con: Max obstacle-constraint violation (normalized clearance)
        tol_kkt: Max projected gradient of the Lagrangian in scaled variables
        max_iterations: Subproblem iteration limit
        t_min_eps: Lower bound on the final time (s)
        t_max: Upper bound on the final time (s)
        smoothing_weight: Weight of the input-smoothing term (0 disables it)
        fixed_final_time: Pin the final time instead of minimizing it (s)
    """
    nodes: int = 40
    tol_defect: float = 1e-6
    tol_con: float = 1e-6
    tol_kkt: float = 1e-4
    max_iterations: int = 3000
    t_min_eps: float = 1e-3
    t_max: float = 120.0
    smoothing_weight: float = 0.0
    fixed_final_time: Optional[float] = None

    def __post_init__(self):
        if self.tol_defect <= 0 or self.tol_con <= 0 or self.tol_kkt <= 0:
            raise ValueError("Solver tolerances must be positive")

    @property
    def transcription(self) -> TranscriptionOptions:
        return TranscriptionOptions(
            t_min=self.t_min_eps, t_max=self.t_max, smoothing_weight=self.smoothing_weight,
            fixed_final_time=self.fixed_final_time,
        )


@dataclass
class SolveReport:
    """Summary of one planner solve, exported as JSON next to the trajectory."""
    mission: str
    success: bool
    message: str
    t_f: float
    nodes: int
    max_defect: float
    constraint_violation: float
    stationarity: float
    min_obstacle_clearance: Optional[float]
    iterations: int
    wall_time: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, filepath) -> Path:
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)
        logger.info(f"Solve report written to {path}")
        return path


@dataclass
class PlannerSolution:
    """
    Node-level planner output.

    Attributes:
        t_f: Final time (s)
        X: Node states (N, 4) as (x, z, V_i, gamma)
        U: Node inputs (N, 2) as (T, alpha)
        mission: Mission solved
        report: Solve summary
        result: Raw solver result, if a solve took place
    """
    t_f: float
    X: np.ndarray
    U: np.ndarray
    mission: Optional[MissionSpec] = None
    report: Optional[SolveReport] = None
    result: Optional[OptimizeResult] = field(default=None, repr=False)
    trajectory: Optional[ReferenceTrajectory] = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return len(self.X)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.t_f, self.N)

    @property
    def phi(self) -> np.ndarray:
        """Pitch angle gamma + alpha per node."""
        return self.X[:, 3] + self.U[:, 1]


def _scaled_callbacks(nlp: NonlinearProgram) -> dict:
    """Objective and constraint callbacks in the normalized variables y = z / scale."""
    s = nlp.scale
    H_f = nlp.objective_hessian() * np.outer(s, s)

    def constraints(y):
        z = y * s
        return np.concatenate([nlp.defects(z), nlp.obstacle_constraints(z)])

    def jacobian(y):
        z = y * s
        return np.vstack([nlp.defect_jacobian(z), nlp.obstacle_jacobian(z)]) * s[None, :]

    return {
        'fun': lambda y: nlp.objective(y * s),
        'grad': lambda y: nlp.objective_gradient(y * s) * s,
        'hess': lambda y: H_f,
        'constraints': constraints,
        'jacobian': jacobian,
    }


def _min_clearance(mission: MissionSpec, X: np.ndarray) -> Optional[float]:
    if not mission.obstacles:
        return None
    return float(min(np.min(o.clearance(X[:, 0], X[:, 1])) for o in mission.obstacles))


def solve_min_time(
    mission: MissionSpec,
    params: VehicleParams,
    opts: SolverOptions = SolverOptions(),
) -> PlannerSolution:
    """
    Minimum-time transition through trapezoidal collocation.

    Args:
        mission: Boundary conditions, obstacles and bounds
        params: Vehicle parameters used by the planar model
        opts: Solver settings

    Returns:
        PlannerSolution whose trajectory attribute holds the reference with
        the optimal feedforward at the collocation nodes

    Raises:
        InfeasibleMissionError: Boundary values violate their own bounds
        PlannerConvergenceError: The solver stops without meeting the tolerances
    """
    start = time.perf_counter()
    nlp = transcribe(mission, opts.nodes, params, opts.transcription)

    if mission.is_degenerate():
        logger.info(f"Mission {mission.name} starts at its goal; returning a stationary trajectory")
        X = np.tile(mission.initial.as_array(), (opts.nodes, 1))
        U = np.column_stack([np.full(opts.nodes, params.m * params.g), np.zeros(opts.nodes)])
        z = nlp.pack(opts.t_min_eps, X, U)
        report = SolveReport(
            mission=mission.name, success=True, message="Degenerate mission",
            t_f=opts.t_min_eps, nodes=opts.nodes, max_defect=nlp.max_defect(z),
            constraint_violation=0.0, stationarity=0.0,
            min_obstacle_clearance=_min_clearance(mission, X), iterations=0,
            wall_time=time.perf_counter() - start,
        )
        solution = PlannerSolution(t_f=opts.t_min_eps, X=X, U=U, mission=mission, report=report)
        solution.trajectory = extract_feedforward(solution, params)
        return solution

    logger.info(f"Solving {nlp}")
    callbacks = _scaled_callbacks(nlp)
    s = nlp.scale
    # Defect rows are divided by the state scales
    ctol = min(opts.tol_defect / float(np.max(nlp.state_scale)), opts.tol_con)
    result = minimize_auglag(
        x0=nlp.initial_guess() / s,
        lb=nlp.lb / s,
        ub=nlp.ub / s,
        n_eq=nlp.n_defect,
        options=AugLagOptions(ctol=ctol, gtol=opts.tol_kkt, maxiter=opts.max_iterations),
        **callbacks,
    )

    z = result.x * s
    t_f, X, U = nlp.unpack(z)
    max_defect = nlp.max_defect(z)
    obstacle_values = nlp.obstacle_constraints(z)
    obstacle_violation = float(max(0.0, -np.min(obstacle_values))) if len(obstacle_values) else 0.0
    report = SolveReport(
        mission=mission.name,
        success=bool(result.success),
        message=str(result.message),
        t_f=t_f,
        nodes=opts.nodes,
        max_defect=max_defect,
        constraint_violation=obstacle_violation,
        stationarity=float(result.optimality),
        min_obstacle_clearance=_min_clearance(mission, X),
        iterations=int(result.nit),
        wall_time=time.perf_counter() - start,
    )

    converged = (max_defect < opts.tol_defect and obstacle_violation < opts.tol_con
                 and result.optimality < opts.tol_kkt)
    if not converged:
        logger.error(f"Planner failed on {mission.name}: {result.message} "
                     f"(defect={max_defect:.3e}, stationarity={result.optimality:.3e})")
        raise PlannerConvergenceError(
            f"Planner did not converge on {mission.name}: {result.message}",
            best_iterate=result.best_x * s,
            diagnostics=report.to_dict(),
        )

    logger.info(f"Solved {mission.name}: t_f={t_f:.4f}s, defect={max_defect:.2e}, "
                f"iterations={result.nit}, {report.wall_time:.1f}s")
    solution = PlannerSolution(t_f=t_f, X=X, U=U, mission=mission, report=report, result=result)
    solution.trajectory = extract_feedforward(solution, params)
    return solution


def extract_feedforward(
    sol: PlannerSolution,
    params: VehicleParams,
    fit: Optional[AeroFit] = None,
    dt: Optional[float] = None,
) -> ReferenceTrajectory:
    """
    Reference trajectory and aerodynamic feedforward from a planar solution.

    Planner downrange maps to inertial y and altitude to inertial z; the
    lateral component of every reference quantity is zero. The feedforward
    is the aerodynamic load F_A* = [0, L sin(b) + D cos(b), D sin(b) - L cos(b)]
    with b = gamma + alpha - alpha_e.

    Args:
        sol: Planner solution
        params: Vehicle parameters
        fit: Lift/drag fit used for the feedforward (vehicle fit when omitted)
        dt: Resample onto a uniform clock of this spacing by cubic interpolation

    Returns:
        ReferenceTrajectory
    """
    x, z, V, gamma = sol.X.T
    T, alpha = sol.U.T
    _, _, alpha_e, L, D = planar_aero(V, T, alpha, params, fit)
    V_dot, gamma_dot = planar_rates(x, z, V, gamma, T, alpha, params, fit)[2:]
    x_ddot, z_ddot = planar_acceleration(V, gamma, V_dot, gamma_dot)
    F_forward, F_up = aero_load(L, D, gamma + alpha - alpha_e)

    zeros = np.zeros(sol.N)
    trajectory = ReferenceTrajectory.from_arrays(
        t=sol.t,
        P_d=np.column_stack([zeros, x, z]),
        Pd_dot=np.column_stack([zeros, V * np.cos(gamma), V * np.sin(gamma)]),
        Pd_ddot=np.column_stack([zeros, x_ddot, z_ddot]),
        F_A_star=np.column_stack([zeros, F_forward, F_up]),
        alpha=alpha, alpha_e=alpha_e, gamma=gamma, T=T, phi=gamma + alpha,
        L_star=L, D_star=D,
        label=sol.mission.name if sol.mission is not None else "planner",
    )
    if dt is not None:
        trajectory = trajectory.resample(dt)
    return trajectory


def feedforward_for_mode(
    traj: ReferenceTrajectory,
    mode: FeedforwardMode,
    params: VehicleParams,
) -> ReferenceTrajectory:
    """
    Reference carrying the feedforward of one controller condition.

    none      -> zero feedforward
    optimal   -> feedforward stored in the trajectory
    perturbed -> feedforward recomputed from the stored (T, alpha, gamma) and
                 |Pd_dot| with the less accurate lift/drag fit
    """
    mode = FeedforwardMode(mode)
    if mode is FeedforwardMode.NONE:
        return traj.without_feedforward()
    if mode is FeedforwardMode.OPTIMAL:
        return traj

    frame = traj.frame
    V = np.linalg.norm(traj.Pd_dot, axis=1)
    T = frame['T'].to_numpy()
    alpha = frame['alpha'].to_numpy()
    gamma = frame['gamma'].to_numpy()
    _, _, alpha_e, L, D = planar_aero(V, T, alpha, params, AeroFit.perturbed())
    F_forward, F_up = aero_load(L, D, gamma + alpha - alpha_e)
    F = np.column_stack([np.zeros(len(traj)), F_forward, F_up])
    return traj.with_feedforward(F, label=f"{traj.label}-perturbed")


def integrated_defect(sol: PlannerSolution, params: VehicleParams, rtol: float = 1e-10) -> float:
    """
    Max node deviation between the collocated states and an accurate
    integration of the planar model from X_0 under piecewise-linear inputs.
    """
    t = sol.t
    U = sol.U

    def rhs(ti, state):
        T = np.interp(ti, t, U[:, 0])
        alpha = np.interp(ti, t, U[:, 1])
        return planar_rates(*state, T, alpha, params)

    solution = solve_ivp(rhs, (t[0], t[-1]), sol.X[0], t_eval=t, method='DOP853',
                         rtol=rtol, atol=rtol)
    if not solution.success:
        raise RuntimeError(f"Defect integration failed: {solution.message}")
    return float(np.max(np.abs(solution.y.T - sol.X)))


def wake_model_residual(traj: ReferenceTrajectory, params: VehicleParams) -> float:
    """
    Max deviation of the stored wake diagnostics from a recomputation out of
    (V_i, gamma, T, phi).
    """
    frame = traj.frame
    V = np.linalg.norm(traj.Pd_dot, axis=1)
    gamma = frame['gamma'].to_numpy()
    T = frame['T'].to_numpy()
    phi = frame['phi'].to_numpy()
    alpha = phi - gamma
    _, _, alpha_e, _, _ = planar_aero(V, T, alpha, params)
    return float(max(
        np.max(np.abs(alpha_e - frame['alpha_e'].to_numpy())),
        np.max(np.abs(alpha - frame['alpha'].to_numpy())),
    ))


def collocate_forward(
    initial: np.ndarray,
    inputs: np.ndarray,
    t_f: float,
    params: VehicleParams,
    iterations: int = 50,
) -> PlannerSolution:
    """
    Node states that satisfy the trapezoidal defects exactly for given inputs.

    Each implicit step X_{k+1} = X_k + h/2 (f_k + f_{k+1}) is solved by
    fixed-point iteration from an explicit Euler predictor.

    Args:
        initial: Initial planar state (x, z, V_i, gamma)
        inputs: Node inputs (N, 2) as (T, alpha)
        t_f: Final time (s)
        params: Vehicle parameters
        iterations: Fixed-point iterations per step
    """
    inputs = np.asarray(inputs, dtype=float)
    N = len(inputs)
    h = t_f / (N - 1)
    X = np.zeros((N, N_STATE))
    X[0] = initial
    for k in range(N - 1):
        f_k = planar_rates(*X[k], *inputs[k], params)
        guess = X[k] + h * f_k
        for _ in range(iterations):
            guess = X[k] + 0.5 * h * (f_k + planar_rates(*guess, *inputs[k + 1], params))
        X[k + 1] = guess
    return PlannerSolution(t_f=t_f, X=X, U=inputs.reshape(N, N_INPUT))
