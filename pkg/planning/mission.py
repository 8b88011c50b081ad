"""
Mission Definitions
Planar boundary states, obstacles and path bounds of a transition maneuver.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlanarState:
    """Point-mass state in the vertical plane (x downrange, z altitude)."""
    x: float
    z: float
    V_i: float
    gamma: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.z, self.V_i, self.gamma])


@dataclass(frozen=True)
class PlanarInput:
    """Total thrust (N) and pitch angle (rad)."""
    T: float
    phi: float

    def __post_init__(self):
        if self.T < 0:
            raise ValueError(f"Thrust must be non-negative, got {self.T}")


@dataclass(frozen=True)
class TerminalState:
    """Terminal condition; components left as None are free."""
    x: Optional[float] = None
    z: Optional[float] = None
    V_i: Optional[float] = None
    gamma: Optional[float] = None

    def as_tuple(self) -> Tuple[Optional[float], ...]:
        return (self.x, self.z, self.V_i, self.gamma)


@dataclass(frozen=True)
class Obstacle:
    """Circular obstacle with an inflation margin added to its radius."""
    x: float
    z: float
    radius: float
    margin: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("Obstacle radius must be positive")
        if self.margin < 0:
            raise ValueError("Obstacle inflation margin must be non-negative")

    @property
    def inflated_radius(self) -> float:
        return self.radius + self.margin

    def clearance(self, x, z):
        """Distance from the obstacle center minus the inflated radius."""
        return np.hypot(np.asarray(x) - self.x, np.asarray(z) - self.z) - self.inflated_radius


@dataclass(frozen=True)
class MissionSpec:
    """
    Minimum-time transition mission.

    Attributes:
        name: Mission label
        initial: Fixed initial planar state
        terminal: Terminal condition with optional free components
        obstacles: Circular obstacles to avoid at every node
        x_bounds, z_bounds: Path box bounds (m)
        altitude_equality: Terminal altitude equals the initial altitude
        v_max: Upper bound on the inertial speed at interior nodes (m/s)
        v_min: Lower bound on the inertial speed at interior nodes (m/s)
    """
    name: str
    initial: PlanarState
    terminal: TerminalState
    obstacles: Tuple[Obstacle, ...] = ()
    x_bounds: Tuple[float, float] = (-np.inf, np.inf)
    z_bounds: Tuple[float, float] = (-np.inf, np.inf)
    altitude_equality: bool = False
    v_max: float = 30.0
    v_min: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, 'obstacles', tuple(self.obstacles))
        if self.x_bounds[0] >= self.x_bounds[1] or self.z_bounds[0] >= self.z_bounds[1]:
            raise ValueError("Path bounds must satisfy lower < upper")
        if not 0 < self.v_min < self.v_max:
            raise ValueError("Speed bounds must satisfy 0 < v_min < v_max")

    @property
    def terminal_z(self) -> Optional[float]:
        """Terminal altitude after applying the altitude-equality flag."""
        if self.altitude_equality:
            return self.initial.z
        return self.terminal.z

    def is_degenerate(self, tol: float = 1e-9) -> bool:
        """True when every terminal component is fixed and equals the initial state."""
        fixed = (self.terminal.x, self.terminal_z, self.terminal.V_i, self.terminal.gamma)
        if any(v is None for v in fixed):
            return False
        return bool(np.all(np.abs(np.array(fixed) - self.initial.as_array()) <= tol))

    def __repr__(self) -> str:
        return f"MissionSpec({self.name}, obstacles={len(self.obstacles)})"


def hover_to_forward_flight(obstacles: Optional[List[Obstacle]] = None) -> MissionSpec:
    """Climb at 1.54 m/s into 12.86 m/s level flight through an obstacle field."""
    if obstacles is None:
        obstacles = [
            Obstacle(x=6.0, z=14.0, radius=3.0, margin=1.0),
            Obstacle(x=22.0, z=8.0, radius=3.0, margin=1.0),
            Obstacle(x=40.0, z=24.0, radius=4.0, margin=1.0),
        ]
    return MissionSpec(
        name="hover_to_forward_flight",
        initial=PlanarState(x=0.0, z=0.0, V_i=1.54, gamma=np.pi / 2),
        terminal=TerminalState(x=60.0, z=15.0, V_i=12.86, gamma=0.0),
        obstacles=tuple(obstacles),
        x_bounds=(-20.0, 120.0),
        z_bounds=(-5.0, 60.0),
    )


def forward_flight_to_hover() -> MissionSpec:
    """Decelerate from 12.86 m/s level flight to a 1.54 m/s climb at the initial altitude."""
    return MissionSpec(
        name="forward_flight_to_hover",
        initial=PlanarState(x=0.0, z=30.0, V_i=12.86, gamma=0.0),
        terminal=TerminalState(x=None, z=None, V_i=1.54, gamma=np.pi / 2),
        x_bounds=(-20.0, 200.0),
        z_bounds=(10.0, 60.0),
        altitude_equality=True,
    )
