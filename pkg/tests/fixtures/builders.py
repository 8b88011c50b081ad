"""
Test Builders
Shared vehicles, gains and states for unit and integration tests.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from control.gains import Gains
from core.dynamics import RigidBodyState
from core.vehicle import VehicleParams

CONFIG_DIR = Path(__file__).parent.parent.parent / 'config'

# Gains of the hover-to-forward-flight experiments
NOMINAL_OMEGA = 3.0
NOMINAL_ZETA = 0.7071


def default_vehicle() -> VehicleParams:
    return VehicleParams.crc20_placeholder()


def aero_free_vehicle() -> VehicleParams:
    """Placeholder airframe without aerodynamic areas or moment arm."""
    return VehicleParams.crc20_placeholder().aero_free().with_overrides(r_AC=(0.0, 0.0, 0.0))


def nominal_gains() -> Gains:
    return Gains.from_natural_frequency(NOMINAL_OMEGA, NOMINAL_ZETA, label="nominal")


def hover_state(position=(0.0, 0.0, 0.0)) -> RigidBodyState:
    return RigidBodyState.hover(position)


def random_state(rng: np.random.Generator) -> RigidBodyState:
    """Random state away from the roll singularity."""
    return RigidBodyState(
        P=rng.normal(0.0, 10.0, 3),
        Psi=np.array([rng.uniform(0.2, 1.5), rng.uniform(-0.5, 0.5), rng.uniform(-np.pi, np.pi)]),
        v_b=rng.normal(0.0, 5.0, 3),
        omega_b=rng.normal(0.0, 0.5, 3),
    )
