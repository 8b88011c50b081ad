"""
Reference Trajectory
Time-indexed desired position, velocity, acceleration and aerodynamic feedforward.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

logger = logging.getLogger(__name__)

POSITION_COLUMNS = ['x_d', 'y_d', 'z_d']
VELOCITY_COLUMNS = ['xd_d', 'yd_d', 'zd_d']
ACCELERATION_COLUMNS = ['xdd_d', 'ydd_d', 'zdd_d']
FEEDFORWARD_COLUMNS = ['FAx', 'FAy', 'FAz']
DIAGNOSTIC_COLUMNS = ['alpha', 'alpha_e', 'gamma', 'T', 'phi']
LOAD_COLUMNS = ['L_star', 'D_star']
CSV_COLUMNS = (['t'] + POSITION_COLUMNS + VELOCITY_COLUMNS + ACCELERATION_COLUMNS
               + FEEDFORWARD_COLUMNS + DIAGNOSTIC_COLUMNS + LOAD_COLUMNS)


@dataclass(frozen=True)
class ReferenceSample:
    """Reference values at one instant."""
    t: float
    P_d: np.ndarray
    Pd_dot: np.ndarray
    Pd_ddot: np.ndarray
    F_A_star: np.ndarray


class ReferenceTrajectory:
    """
    Reference trajectory backed by a DataFrame with the export column schema.

    Between nodes the position, velocity, acceleration and feedforward are
    interpolated by cubic splines. Past the last node the reference continues
    at constant velocity with the final feedforward held.
    """

    def __init__(
        self,
        frame: pd.DataFrame,
        label: str = "reference",
    ):
        """
        Initialize reference trajectory.

        Args:
            frame: DataFrame holding every column of CSV_COLUMNS
            label: Name used in logs
        """
        missing = [c for c in CSV_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Reference frame is missing columns: {missing}")
        frame = frame[CSV_COLUMNS].astype(float).reset_index(drop=True)

        t = frame['t'].to_numpy()
        if len(t) < 2:
            raise ValueError("Reference trajectory needs at least two nodes")
        if np.any(np.diff(t) <= 0):
            raise ValueError("Reference time grid must be strictly increasing")
        if np.any(frame['FAx'].to_numpy() != 0.0):
            raise ValueError("Feedforward must have no out-of-plane (x) component")

        self.frame = frame
        self.label = label
        self._splines: Optional[dict] = None

    # ==================== CONSTRUCTION ====================

    @classmethod
    def from_arrays(
        cls,
        t: np.ndarray,
        P_d: np.ndarray,
        Pd_dot: np.ndarray,
        Pd_ddot: np.ndarray,
        F_A_star: np.ndarray,
        alpha: Optional[np.ndarray] = None,
        alpha_e: Optional[np.ndarray] = None,
        gamma: Optional[np.ndarray] = None,
        T: Optional[np.ndarray] = None,
        phi: Optional[np.ndarray] = None,
        L_star: Optional[np.ndarray] = None,
        D_star: Optional[np.ndarray] = None,
        **kwargs,
    ) -> 'ReferenceTrajectory':
        t = np.asarray(t, dtype=float)
        n = len(t)

        def column_block(values, names):
            values = np.asarray(values, dtype=float).reshape(n, 3)
            return {name: values[:, i] for i, name in enumerate(names)}

        def diagnostic(values):
            return np.zeros(n) if values is None else np.asarray(values, dtype=float)

        data = {'t': t}
        data.update(column_block(P_d, POSITION_COLUMNS))
        data.update(column_block(Pd_dot, VELOCITY_COLUMNS))
        data.update(column_block(Pd_ddot, ACCELERATION_COLUMNS))
        data.update(column_block(F_A_star, FEEDFORWARD_COLUMNS))
        data.update({
            'alpha': diagnostic(alpha),
            'alpha_e': diagnostic(alpha_e),
            'gamma': diagnostic(gamma),
            'T': diagnostic(T),
            'phi': diagnostic(phi),
            'L_star': diagnostic(L_star),
            'D_star': diagnostic(D_star),
        })
        return cls(pd.DataFrame(data), **kwargs)

    @classmethod
    def hover(
        cls,
        position,
        duration: float,
        F_A_star=(0.0, 0.0, 0.0),
        thrust: float = 0.0,
        pitch: float = np.pi / 2,
    ) -> 'ReferenceTrajectory':
        """Stationary reference holding one position for the given duration."""
        if duration <= 0:
            raise ValueError("Hover duration must be positive")
        P = np.tile(np.asarray(position, dtype=float), (2, 1))
        zeros = np.zeros((2, 3))
        F = np.tile(np.asarray(F_A_star, dtype=float), (2, 1))
        return cls.from_arrays(
            t=np.array([0.0, duration]), P_d=P, Pd_dot=zeros, Pd_ddot=zeros, F_A_star=F,
            gamma=np.full(2, np.pi / 2), T=np.full(2, thrust), phi=np.full(2, pitch),
            label="hover",
        )

    # ==================== ACCESSORS ====================

    @property
    def t(self) -> np.ndarray:
        return self.frame['t'].to_numpy()

    @property
    def t_end(self) -> float:
        return float(self.frame['t'].iloc[-1])

    @property
    def P_d(self) -> np.ndarray:
        return self.frame[POSITION_COLUMNS].to_numpy()

    @property
    def Pd_dot(self) -> np.ndarray:
        return self.frame[VELOCITY_COLUMNS].to_numpy()

    @property
    def Pd_ddot(self) -> np.ndarray:
        return self.frame[ACCELERATION_COLUMNS].to_numpy()

    @property
    def F_A_star(self) -> np.ndarray:
        return self.frame[FEEDFORWARD_COLUMNS].to_numpy()

    @property
    def L_star(self) -> np.ndarray:
        """Planner lift per node (N)."""
        return self.frame['L_star'].to_numpy()

    @property
    def D_star(self) -> np.ndarray:
        """Planner drag per node (N)."""
        return self.frame['D_star'].to_numpy()

    def __len__(self) -> int:
        return len(self.frame)

    # ==================== SAMPLING ====================

    def _build_splines(self) -> dict:
        t = self.t
        return {
            'P': CubicSpline(t, self.P_d, axis=0),
            'V': CubicSpline(t, self.Pd_dot, axis=0),
            'A': CubicSpline(t, self.Pd_ddot, axis=0),
            'F': CubicSpline(t, self.F_A_star, axis=0),
        }

    def sample(self, t: float) -> ReferenceSample:
        """
        Reference at time t.

        Before the first node the first node is held; after the last node the
        reference moves at the final velocity with zero acceleration.
        """
        if self._splines is None:
            self._splines = self._build_splines()
        splines = self._splines

        t0, t_end = float(self.t[0]), self.t_end
        if t <= t0:
            return ReferenceSample(
                t=t, P_d=self.P_d[0].copy(), Pd_dot=self.Pd_dot[0].copy(),
                Pd_ddot=self.Pd_ddot[0].copy(), F_A_star=self.F_A_star[0].copy(),
            )
        if t > t_end:
            V_end = self.Pd_dot[-1]
            return ReferenceSample(
                t=t, P_d=self.P_d[-1] + V_end * (t - t_end), Pd_dot=V_end.copy(),
                Pd_ddot=np.zeros(3), F_A_star=self.F_A_star[-1].copy(),
            )

        F = splines['F'](t)
        F[0] = 0.0
        return ReferenceSample(
            t=t, P_d=splines['P'](t), Pd_dot=splines['V'](t),
            Pd_ddot=splines['A'](t), F_A_star=F,
        )

    def resample(self, dt: float, t_end: Optional[float] = None) -> 'ReferenceTrajectory':
        """Reference on a uniform grid of spacing dt (angles linearly, loads by spline)."""
        if dt <= 0:
            raise ValueError("Resampling step must be positive")
        t_end = self.t_end if t_end is None else t_end
        grid = np.arange(float(self.t[0]), t_end, dt)
        if t_end - grid[-1] > 1e-9 * max(1.0, t_end):
            grid = np.append(grid, t_end)
        samples = [self.sample(ti) for ti in grid]

        diagnostics = {}
        for name in DIAGNOSTIC_COLUMNS:
            values = self.frame[name].to_numpy()
            diagnostics[name] = np.interp(grid, self.t, values)
        for name in LOAD_COLUMNS:
            diagnostics[name] = CubicSpline(self.t, self.frame[name].to_numpy())(grid)

        return ReferenceTrajectory.from_arrays(
            t=grid,
            P_d=np.array([s.P_d for s in samples]),
            Pd_dot=np.array([s.Pd_dot for s in samples]),
            Pd_ddot=np.array([s.Pd_ddot for s in samples]),
            F_A_star=np.array([s.F_A_star for s in samples]),
            label=self.label,
            **diagnostics,
        )

    def extend(self, t_end: float, dt: float = 0.1) -> 'ReferenceTrajectory':
        """Append constant-velocity nodes so the trajectory covers t_end."""
        if t_end <= self.t_end:
            return self
        extra_t = np.arange(self.t_end + dt, t_end + 0.5 * dt, dt)
        if len(extra_t) == 0 or extra_t[-1] < t_end:
            extra_t = np.append(extra_t, t_end)
        last = self.frame.iloc[-1]
        V_end = self.Pd_dot[-1]

        rows = []
        for ti in extra_t:
            row = last.copy()
            row['t'] = ti
            position = self.P_d[-1] + V_end * (ti - self.t_end)
            for name, value in zip(POSITION_COLUMNS, position):
                row[name] = value
            for name in ACCELERATION_COLUMNS:
                row[name] = 0.0
            rows.append(row)

        frame = pd.concat([self.frame, pd.DataFrame(rows)], ignore_index=True)
        logger.debug(f"Extended {self.label} from {self.t_end:.3f}s to {t_end:.3f}s")
        return ReferenceTrajectory(frame, label=self.label)

    # ==================== FEEDFORWARD VARIANTS ====================

    def with_feedforward(self, F_A_star: np.ndarray, label: Optional[str] = None) -> 'ReferenceTrajectory':
        F_A_star = np.asarray(F_A_star, dtype=float).reshape(len(self), 3)
        frame = self.frame.copy()
        for i, name in enumerate(FEEDFORWARD_COLUMNS):
            frame[name] = F_A_star[:, i]
        return ReferenceTrajectory(frame, label=label or self.label)

    def without_feedforward(self) -> 'ReferenceTrajectory':
        return self.with_feedforward(np.zeros((len(self), 3)), label=f"{self.label}-nofeedforward")

    # ==================== PERSISTENCE ====================

    def to_csv(self, filepath) -> Path:
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.frame.to_csv(path, index=False, float_format='%.12g')
        logger.info(f"Reference trajectory written to {path}")
        return path

    @classmethod
    def from_csv(cls, filepath) -> 'ReferenceTrajectory':
        path = Path(filepath)
        if not path.exists():
            raise FileNotFoundError(f"Trajectory file not found: {path}")
        frame = pd.read_csv(path)
        return cls(frame, label=path.stem)

    def __repr__(self) -> str:
        return f"ReferenceTrajectory({self.label}, nodes={len(self)}, t_end={self.t_end:.3f}s)"
