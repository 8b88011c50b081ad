"""
Unit tests for the control allocator
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path to import from control
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from control.allocator import ControlAllocator, allocate
from core.vehicle import VehicleParams


class TestAllocate:
    """Test Omega^2 inversion."""

    def setup_method(self):
        self.params = VehicleParams.crc20_placeholder()
        self.allocator = ControlAllocator(self.params)

    def test_pure_thrust(self):
        """Test a pure thrust demand splits evenly."""
        result = self.allocator.allocate(80.0, np.zeros(3))
        np.testing.assert_allclose(result.omega_squared, 80.0 / (4 * self.params.k_T), rtol=1e-12)
        assert result.saturation_count == 0

    def test_zero_command(self):
        """Test zero demand stops the rotors."""
        result = self.allocator.allocate(0.0, np.zeros(3))
        np.testing.assert_allclose(result.command.omega, 0.0, atol=1e-9)

    def test_round_trip(self):
        """Test the forward map reproduces unsaturated demands."""
        rng = np.random.default_rng(11)
        for _ in range(50):
            T_c = rng.uniform(40.0, 150.0)
            M_c = rng.uniform(-0.5, 0.5, 3)
            result = self.allocator.allocate(T_c, M_c)
            assert result.saturation_count == 0
            wrench = self.allocator.forward(result.command.omega ** 2)
            np.testing.assert_allclose(wrench, np.concatenate([[T_c], M_c]), atol=1e-10)

    def test_low_saturation(self):
        """Test a large moment clamps a rotor at zero and flags it."""
        result = self.allocator.allocate(10.0, np.array([20.0, 0.0, 0.0]))
        assert result.saturated.any()
        assert np.all(result.command.omega >= 0.0)

    def test_high_saturation(self):
        """Test thrust above T_max clamps at omega_max."""
        result = self.allocator.allocate(2.0 * self.params.T_max, np.zeros(3))
        assert result.saturation_count == 4
        np.testing.assert_allclose(result.command.omega, self.params.omega_max)

    def test_negative_thrust(self):
        """Test negative thrust commands are rejected."""
        with pytest.raises(ValueError):
            allocate(-1.0, np.zeros(3), self.params)

    def test_singular_geometry(self):
        """Test a zero moment arm makes the mixer singular."""
        with pytest.raises(ValueError, match="singular"):
            ControlAllocator(self.params.with_overrides(d_L=1e-300, d_N=1e-300))
