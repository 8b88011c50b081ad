"""
Unit tests for vehicle parameters
Covers AeroFit validation, derived rotor constants and the Omega^2 forward map.
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path to import from core
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.vehicle import AeroFit, RotorCommand, VehicleParams, rotor_forward_map, vehicle_summary


class TestAeroFit:
    """Test the lift/drag regression fit."""

    def test_ideal_and_perturbed_fits_are_valid(self):
        """Test both shipped fits construct."""
        assert AeroFit.ideal().a2 == 12.35
        assert AeroFit.perturbed().a4 == 3.18

    def test_negative_drag_rejected(self):
        """Test a fit whose drag goes negative is rejected."""
        with pytest.raises(ValueError, match="drag coefficient goes negative"):
            AeroFit(a0=0.0, a1=0.0, a2=0.0, a3=0.0, a4=0.0, b0=0.5, b1=-1.0)

    def test_non_finite_rejected(self):
        """Test non-finite coefficients are rejected."""
        with pytest.raises(ValueError):
            AeroFit(a0=np.nan, a1=0.0, a2=0.0, a3=0.0, a4=0.0, b0=1.0, b1=0.0)


class TestVehicleParams:
    """Test airframe validation and derived quantities."""

    def test_placeholder_mass(self):
        """Test the placeholder airframe carries the 9.07 kg mass."""
        params = VehicleParams.crc20_placeholder()
        assert params.m == pytest.approx(9.07)
        assert params.hover_thrust == pytest.approx(9.07 * 9.81)

    def test_rotor_constants(self):
        """Test k_T and k_Q follow rho*pi*R^n*C."""
        params = VehicleParams.crc20_placeholder()
        assert params.k_T == pytest.approx(params.rho * np.pi * params.R ** 4 * params.C_T)
        assert params.k_Q == pytest.approx(params.rho * np.pi * params.R ** 5 * params.C_Q)

    def test_omega_max_produces_t_max(self):
        """Test four rotors at omega_max produce T_max."""
        params = VehicleParams.crc20_placeholder()
        assert 4 * params.k_T * params.omega_max ** 2 == pytest.approx(params.T_max)

    def test_invalid_mass(self):
        """Test non-positive mass is rejected."""
        with pytest.raises(ValueError, match="mass must be positive"):
            VehicleParams.crc20_placeholder().with_overrides(m=0.0)

    def test_negative_area(self):
        """Test negative reference areas are rejected."""
        with pytest.raises(ValueError):
            VehicleParams.crc20_placeholder().with_overrides(S_w=-1.0)

    def test_aero_free(self):
        """Test the aero-free variant has no aerodynamic area."""
        params = VehicleParams.crc20_placeholder().aero_free()
        assert not params.has_aero
        assert VehicleParams.crc20_placeholder().has_aero

    def test_summary(self):
        """Test the summary flattens the fit coefficients."""
        summary = vehicle_summary(VehicleParams.crc20_placeholder())
        assert summary['fit_a0'] == 0.37
        assert summary['hover_thrust'] == pytest.approx(9.07 * 9.81)


class TestRotorForwardMap:
    """Test the Omega^2 rotor model."""

    def test_hover_command_produces_weight(self):
        """Test equal hover speeds give weight-supporting thrust and no moment."""
        params = VehicleParams.crc20_placeholder()
        T, moments = rotor_forward_map(RotorCommand.hover(params), params)
        assert T == pytest.approx(params.hover_thrust, rel=1e-12)
        np.testing.assert_allclose(moments, 0.0, atol=1e-12)

    def test_zero_speeds(self):
        """Test stopped rotors produce nothing."""
        params = VehicleParams.crc20_placeholder()
        T, moments = rotor_forward_map(RotorCommand(Omega=(0.0, 0.0, 0.0, 0.0)), params)
        assert T == 0.0
        np.testing.assert_array_equal(moments, 0.0)

    def test_negative_speed_rejected(self):
        """Test negative rotor speeds are rejected."""
        with pytest.raises(ValueError):
            RotorCommand(Omega=(-1.0, 0.0, 0.0, 0.0))

    def test_mixing_matrix_invertible(self):
        """Test the mixing matrix is full rank."""
        params = VehicleParams.crc20_placeholder()
        assert np.linalg.matrix_rank(params.mixing_matrix) == 4
