"""
Cascade Controller
Multi-rate outer position loop, inner attitude loop and allocator for one vehicle.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from control.allocator import AllocationResult, ControlAllocator
from control.attitude import DEFAULT_CUTOFF, AttitudeReferenceFilter, attitude_inner_loop
from control.gains import Gains
from control.outer_loop import OuterLoopCommand, outer_loop
from core.dynamics import RigidBodyState
from core.kinematics import euler_rates
from core.vehicle import VehicleParams
from planning.reference import ReferenceSample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ControllerRates:
    """Update rates of the cascade (Hz)."""
    outer_hz: float = 100.0
    inner_hz: float = 500.0
    filter_cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.outer_hz <= 0 or self.inner_hz <= 0:
            raise ValueError("Controller rates must be positive")
        if self.inner_hz < self.outer_hz:
            raise ValueError("Inner loop must run at least as fast as the outer loop")


class CascadeController:
    """
    Outer-loop dynamic inversion feeding an inner attitude loop and the Omega^2 allocator.

    Holds the attitude reference filter, the previous attitude command and
    the zero-order-hold outputs of both loops. One instance per simulated
    vehicle.
    """

    def __init__(self, gains: Gains, params: VehicleParams, rates: ControllerRates = ControllerRates()):
        """
        Initialize controller.

        Args:
            gains: Outer and inner loop gains
            params: Vehicle parameters
            rates: Loop rates and filter cutoff
        """
        self.gains = gains
        self.params = params
        self.rates = rates
        self.allocator = ControlAllocator(params)
        self.reference_filter = AttitudeReferenceFilter(1.0 / rates.outer_hz, rates.filter_cutoff)
        self.reset()
        logger.info(f"Cascade controller initialized: {gains}, outer={rates.outer_hz}Hz, "
                    f"inner={rates.inner_hz}Hz")

    def reset(self):
        self.reference_filter.reset()
        self.outer_command: Optional[OuterLoopCommand] = None
        self.Psid_dot = np.zeros(3)
        self.Psid_ddot = np.zeros(3)
        self.moment_command = np.zeros(3)
        self.allocation: Optional[AllocationResult] = None
        self.held_count = 0

    def outer_update(self, state: RigidBodyState, ref: ReferenceSample) -> OuterLoopCommand:
        """Recompute thrust and attitude commands and the filtered attitude-reference rates."""
        previous = None if self.outer_command is None else self.outer_command.Psi_d
        command = outer_loop(state.P, state.P_dot, ref, self.gains, self.params, previous)
        if command.held:
            self.held_count += 1
        self.Psid_dot, self.Psid_ddot = self.reference_filter.update(command.Psi_d)
        self.outer_command = command
        return command

    def inner_update(self, state: RigidBodyState) -> AllocationResult:
        """Recompute the moment command and rotor speeds from the held outer command."""
        if self.outer_command is None:
            raise RuntimeError("inner_update called before the first outer_update")
        Psi_dot = euler_rates(state.Psi, state.omega_b)
        self.moment_command = attitude_inner_loop(
            state.Psi, Psi_dot,
            self.outer_command.Psi_d, self.Psid_dot, self.Psid_ddot,
            state.omega_b, self.gains, self.params,
        )
        self.allocation = self.allocator.allocate(self.outer_command.T_c, self.moment_command)
        return self.allocation

    def __repr__(self) -> str:
        return f"CascadeController({self.gains.label}, {self.rates})"
