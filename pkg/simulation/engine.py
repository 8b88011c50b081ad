"""
Simulation Engine
Deterministic closed-loop simulation of the plant under the cascade controller.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from control.cascade import CascadeController, ControllerRates
from control.gains import Gains
from control.outer_loop import invert_thrust, thrust_channels
from core.aerodynamics import Environment, aero_forces_moments, aero_load_inertial
from core.dynamics import RigidBodyState
from core.kinematics import GimbalLockError
from core.vehicle import VehicleParams, rotor_forward_map
from planning.planner import FeedforwardMode, feedforward_for_mode
from planning.reference import ReferenceTrajectory
from simulation.integrator import step_rk4

logger = logging.getLogger(__name__)

DEFAULT_DIVERGENCE_LIMIT = 100.0

LOG_COLUMNS = (
    ['t', 'x', 'y', 'z', 'phi', 'theta', 'psi', 'u', 'v', 'w', 'p', 'q', 'r',
     'x_d', 'y_d', 'z_d',
     'T_c', 'phi_c', 'theta_c', 'psi_c', 'xdd_c', 'ydd_c', 'zdd_c',
     'Omega1', 'Omega2', 'Omega3', 'Omega4', 'sat1', 'sat2', 'sat3', 'sat4',
     'FAx', 'FAy', 'FAz', 'FAx_star', 'FAy_star', 'FAz_star',
     'ex', 'ey', 'ez', 'evx', 'evy', 'evz',
     'norm_Pe', 'norm_Pde', 'norm_dFA']
)


class SimulationDivergedError(RuntimeError):
    """Raised when the tracking error leaves the divergence envelope; carries the partial log."""

    def __init__(self, message: str, partial_log: 'SimLog', time: float):
        super().__init__(message)
        self.partial_log = partial_log
        self.time = time


@dataclass(frozen=True)
class SimConfig:
    """
    Simulation settings.

    Attributes:
        duration: Simulated time (s)
        dt_plant: RK4 step (s); must divide both controller periods
        rates: Controller update rates
        mode: Feedforward condition
        env: Crosswind environment
        initial_state: Explicit initial state; derived from the reference when None
        position_offset: Inertial offset added to the reference's initial position (m)
        velocity_offset: Inertial offset added to the reference's initial velocity (m/s)
        divergence_limit: Abort when ||P_e|| exceeds this (m)
        seed: Seed recorded with the run (used by sweeps to draw offsets)
    """
    duration: float = 10.0
    dt_plant: float = 1e-3
    rates: ControllerRates = field(default_factory=ControllerRates)
    mode: FeedforwardMode = FeedforwardMode.OPTIMAL
    env: Environment = field(default_factory=Environment)
    initial_state: Optional[RigidBodyState] = None
    position_offset: tuple = (0.0, 0.0, 0.0)
    velocity_offset: tuple = (0.0, 0.0, 0.0)
    divergence_limit: float = DEFAULT_DIVERGENCE_LIMIT
    seed: int = 0

    def __post_init__(self):
        if self.dt_plant <= 0:
            raise ValueError("dt_plant must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.divergence_limit <= 0:
            raise ValueError("divergence_limit must be positive")
        object.__setattr__(self, 'mode', FeedforwardMode(self.mode))
        for hz in (self.rates.outer_hz, self.rates.inner_hz):
            ratio = 1.0 / (hz * self.dt_plant)
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ValueError(f"Plant step {self.dt_plant}s does not divide the {hz}Hz controller period")

    @property
    def outer_steps(self) -> int:
        return int(round(1.0 / (self.rates.outer_hz * self.dt_plant)))

    @property
    def inner_steps(self) -> int:
        return int(round(1.0 / (self.rates.inner_hz * self.dt_plant)))

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt_plant))


class SimLog:
    """
    Closed-loop log sampled at the outer-loop rate.

    Wraps a DataFrame with the LOG_COLUMNS schema. The aerodynamic columns
    hold the plant's true load (FA columns) and the feedforward (FA*_star columns), both in
    inertial components, so that dF_A = FA_star - FA.
    """

    def __init__(self, frame: Optional[pd.DataFrame] = None, label: str = "run"):
        if frame is None:
            frame = pd.DataFrame(columns=LOG_COLUMNS, dtype=float)
        missing = [c for c in LOG_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Log is missing columns: {missing}")
        self.frame = frame[LOG_COLUMNS].reset_index(drop=True)
        self.label = label

    @classmethod
    def from_records(cls, records: List[dict], label: str = "run") -> 'SimLog':
        return cls(pd.DataFrame.from_records(records, columns=LOG_COLUMNS), label=label)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def t(self) -> np.ndarray:
        return self.frame['t'].to_numpy()

    @property
    def P(self) -> np.ndarray:
        return self.frame[['x', 'y', 'z']].to_numpy()

    @property
    def P_e(self) -> np.ndarray:
        return self.frame[['ex', 'ey', 'ez']].to_numpy()

    @property
    def Pdot_e(self) -> np.ndarray:
        return self.frame[['evx', 'evy', 'evz']].to_numpy()

    @property
    def F_A(self) -> np.ndarray:
        return self.frame[['FAx', 'FAy', 'FAz']].to_numpy()

    @property
    def F_A_star(self) -> np.ndarray:
        return self.frame[['FAx_star', 'FAy_star', 'FAz_star']].to_numpy()

    @property
    def saturation(self) -> np.ndarray:
        return self.frame[['sat1', 'sat2', 'sat3', 'sat4']].to_numpy().astype(bool)

    def error_samples(self) -> pd.DataFrame:
        """(||Pdot_e||, ||dF_A||) pairs for the uncertainty fit."""
        return self.frame[['t', 'norm_Pde', 'norm_dFA']].copy()

    def to_csv(self, filepath) -> Path:
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.frame.to_csv(path, index=False, float_format='%.12g')
        logger.debug(f"Simulation log written to {path}")
        return path

    @classmethod
    def from_csv(cls, filepath) -> 'SimLog':
        path = Path(filepath)
        if not path.exists():
            raise FileNotFoundError(f"Simulation log not found: {path}")
        return cls(pd.read_csv(path), label=path.stem)

    def __repr__(self) -> str:
        end = self.t[-1] if len(self) else 0.0
        return f"SimLog({self.label}, samples={len(self)}, t_end={end:.3f}s)"


def initial_state_from_reference(
    traj: ReferenceTrajectory,
    params: VehicleParams,
    position_offset=(0.0, 0.0, 0.0),
    velocity_offset=(0.0, 0.0, 0.0),
) -> RigidBodyState:
    """
    Plant state matching the reference at its first node plus inertial offsets.

    The attitude is the outer loop's inversion of the reference acceleration
    and feedforward at zero tracking error; body rates start at zero.
    """
    ref = traj.sample(float(traj.t[0]))
    channels = thrust_channels(ref.Pd_ddot, ref.F_A_star, params)
    _, Psi, _ = invert_thrust(channels)
    P = ref.P_d + np.asarray(position_offset, dtype=float)
    P_dot = ref.Pd_dot + np.asarray(velocity_offset, dtype=float)
    return RigidBodyState.from_inertial(P, P_dot, Psi)


def _record(t, state, ref, command, allocation, load) -> dict:
    Omega = allocation.command.omega
    delta = ref.F_A_star - load
    row = {
        't': t,
        'x': state.P[0], 'y': state.P[1], 'z': state.P[2],
        'phi': state.Psi[0], 'theta': state.Psi[1], 'psi': state.Psi[2],
        'u': state.v_b[0], 'v': state.v_b[1], 'w': state.v_b[2],
        'p': state.omega_b[0], 'q': state.omega_b[1], 'r': state.omega_b[2],
        'x_d': ref.P_d[0], 'y_d': ref.P_d[1], 'z_d': ref.P_d[2],
        'T_c': command.T_c,
        'phi_c': command.Psi_d[0], 'theta_c': command.Psi_d[1], 'psi_c': command.Psi_d[2],
        'xdd_c': command.Pdd_c[0], 'ydd_c': command.Pdd_c[1], 'zdd_c': command.Pdd_c[2],
        'FAx': load[0], 'FAy': load[1], 'FAz': load[2],
        'FAx_star': ref.F_A_star[0], 'FAy_star': ref.F_A_star[1], 'FAz_star': ref.F_A_star[2],
        'ex': command.P_e[0], 'ey': command.P_e[1], 'ez': command.P_e[2],
        'evx': command.Pdot_e[0], 'evy': command.Pdot_e[1], 'evz': command.Pdot_e[2],
        'norm_Pe': float(np.linalg.norm(command.P_e)),
        'norm_Pde': float(np.linalg.norm(command.Pdot_e)),
        'norm_dFA': float(np.linalg.norm(delta)),
    }
    for i in range(4):
        row[f'Omega{i + 1}'] = Omega[i]
        row[f'sat{i + 1}'] = int(allocation.saturated[i])
    return row


def run_mission(
    traj: ReferenceTrajectory,
    cfg: SimConfig,
    gains: Gains,
    params: VehicleParams,
) -> SimLog:
    """
    Fly a reference trajectory in closed loop.

    The plant is integrated with RK4 at cfg.dt_plant. The outer loop runs at
    cfg.rates.outer_hz and the inner loop with the allocator at
    cfg.rates.inner_hz; both hold their outputs between updates. One log
    row is written at every outer-loop instant.

    Args:
        traj: Reference trajectory (carrying the optimal feedforward)
        cfg: Simulation settings, including the feedforward mode
        gains: Controller gains
        params: Vehicle parameters of the truth plant

    Returns:
        SimLog with duration * outer_hz rows

    Raises:
        SimulationDivergedError: ||P_e|| exceeds the envelope, the state stops
            being finite, or the attitude reaches gimbal lock
    """
    if traj.t_end < cfg.duration:
        logger.info(f"Extending {traj.label} from {traj.t_end:.3f}s to {cfg.duration:.3f}s "
                    f"at constant velocity")
        traj = traj.extend(cfg.duration)
    reference = feedforward_for_mode(traj, cfg.mode, params)

    controller = CascadeController(gains, params, cfg.rates)
    if cfg.initial_state is not None:
        state = cfg.initial_state
    else:
        state = initial_state_from_reference(
            reference, params, cfg.position_offset, cfg.velocity_offset
        )

    label = f"{traj.label}-{cfg.mode.value}"
    records: List[dict] = []
    k_out, k_in = cfg.outer_steps, cfg.inner_steps
    logger.info(f"Running {label}: {cfg.duration:.2f}s, dt={cfg.dt_plant}s, {gains}")

    t = 0.0
    try:
        for i in range(cfg.n_steps):
            t = i * cfg.dt_plant
            if i % k_out == 0:
                ref = reference.sample(t)
                command = controller.outer_update(state, ref)
            if i % k_in == 0:
                allocation = controller.inner_update(state)
            if i % k_out == 0:
                T_actual, _ = rotor_forward_map(allocation.command, params)
                aero = aero_forces_moments(state, T_actual, cfg.env, params)
                load = aero_load_inertial(aero, state.Psi)
                records.append(_record(t, state, ref, command, allocation, load))

                error = records[-1]['norm_Pe']
                if not np.isfinite(error) or error > cfg.divergence_limit:
                    raise SimulationDivergedError(
                        f"{label} diverged at t={t:.3f}s (||P_e||={error:.3g} m)",
                        SimLog.from_records(records, label=label), t,
                    )

            state = step_rk4(state, allocation.command, cfg.dt_plant, cfg.env, params).wrapped()
    except GimbalLockError as e:
        raise SimulationDivergedError(
            f"{label} reached gimbal lock at t={t:.3f}s: {e}",
            SimLog.from_records(records, label=label), t,
        ) from e

    log = SimLog.from_records(records, label=label)
    if controller.held_count:
        logger.warning(f"{label}: attitude command held {controller.held_count} times")
    saturated = int(log.saturation.any(axis=1).sum())
    if saturated:
        logger.warning(f"{label}: rotor saturation in {saturated} of {len(log)} samples")
    logger.info(f"Finished {label}: max ||P_e||={log.frame['norm_Pe'].max():.4f} m")
    return log
