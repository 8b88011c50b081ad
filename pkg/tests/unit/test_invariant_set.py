"""
Unit tests for the convergent error set
"""

import pytest
import json
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path to import from stability
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from control.gains import Gains
from stability.invariant_set import (
    RobustConditionError,
    error_thresholds,
    compute_invariant_set,
    set_size_sweep,
)
from stability.uncertainty import UncertaintyBound

MASS = 9.07
HFF_BOUND = UncertaintyBound(alpha0=54.61, alpha1=8.53)


class TestComputeInvariantSet:
    """Test set sizing for the hover-to-forward-flight gains."""

    def test_hover_to_forward_flight_numbers(self):
        """Test omega_n = 3 gains reproduce V_lim and the ellipse denominators."""
        gains = Gains.from_natural_frequency(3.0, 0.7071)
        inv_set = compute_invariant_set(gains, HFF_BOUND, MASS)
        assert inv_set.V_lim == pytest.approx(33.94, abs=0.5)
        assert inv_set.position_axis_sq == pytest.approx(7.54, abs=0.1)
        assert inv_set.velocity_axis_sq == pytest.approx(67.89, abs=0.5)

    def test_forward_flight_to_hover_formula_value(self):
        """Test omega_n = 1.5 gains give the formula value 74.6."""
        gains = Gains.from_natural_frequency(1.5, 0.7071)
        inv_set = compute_invariant_set(gains, HFF_BOUND, MASS)
        assert inv_set.V_lim == pytest.approx(74.6, abs=0.5)

    def test_thresholds(self):
        """Test the decrease thresholds."""
        gains = Gains.from_natural_frequency(3.0, 0.7071)
        pos, vel = error_thresholds(gains, HFF_BOUND, MASS)
        assert pos == pytest.approx(54.61 / (MASS * 9.0))
        assert vel == pytest.approx(54.61 / (MASS * gains.sigma_min_KD - 8.53))

    def test_zero_uncertainty_collapses(self):
        """Test alpha0 = 0 shrinks the set to the origin."""
        gains = Gains.from_natural_frequency(3.0, 0.7071)
        inv_set = compute_invariant_set(gains, UncertaintyBound(alpha0=0.0, alpha1=8.53), MASS)
        assert inv_set.V_lim == 0.0
        assert inv_set.contains(0.0, 0.0)
        assert not inv_set.contains(0.1, 0.0)

    def test_robust_condition(self):
        """Test insufficient damping raises with the required value."""
        gains = Gains.from_natural_frequency(0.5, 0.7071)
        with pytest.raises(RobustConditionError) as excinfo:
            compute_invariant_set(gains, HFF_BOUND, MASS)
        assert excinfo.value.required_kd == pytest.approx(8.53 / MASS)

    def test_invalid_mass(self):
        """Test non-positive mass is rejected."""
        with pytest.raises(ValueError):
            error_thresholds(Gains.from_natural_frequency(3.0, 0.7071), HFF_BOUND, 0.0)

    def test_boundary_on_ellipse(self):
        """Test boundary points satisfy the ellipse equation."""
        inv_set = compute_invariant_set(Gains.from_natural_frequency(3.0, 0.7071), HFF_BOUND, MASS)
        boundary = inv_set.boundary(50)
        values = inv_set.ellipse_value(boundary['norm_Pe'], boundary['norm_Pde'])
        np.testing.assert_allclose(values, 1.0, rtol=1e-12)
        assert inv_set.contains(0.5 * boundary['norm_Pe'][10], 0.5 * boundary['norm_Pde'][10])

    def test_serialization(self, tmp_path):
        """Test the JSON export carries the set and its inputs."""
        inv_set = compute_invariant_set(Gains.from_natural_frequency(3.0, 0.7071), HFF_BOUND, MASS)
        with open(inv_set.to_json(tmp_path / "set.json")) as f:
            data = json.load(f)
        assert data['V_lim'] == pytest.approx(inv_set.V_lim)
        assert data['bound']['alpha1'] == pytest.approx(8.53)


class TestSetSizeSweep:
    """Test monotonic dependence of V_lim on bounds and gains."""

    def test_increases_with_uncertainty(self):
        """Test V_lim grows with alpha0 and alpha1."""
        grid = set_size_sweep([10.0, 30.0, 60.0], [0.0, 4.0, 8.0], [9.0], [4.2426], MASS)
        for _, group in grid.groupby('alpha1'):
            assert group['V_lim'].is_monotonic_increasing
        for _, group in grid.groupby('alpha0'):
            assert group['V_lim'].is_monotonic_increasing

    def test_decreases_with_damping(self):
        """Test V_lim shrinks as min-diag(K_D) grows."""
        grid = set_size_sweep([54.61], [8.53], [9.0], [2.0, 4.0, 8.0, 16.0], MASS)
        assert grid['V_lim'].is_monotonic_decreasing

    def test_decreases_with_min_position_gain(self):
        """Test V_lim shrinks as the smallest K_P entry grows with the largest held fixed."""
        grid = set_size_sweep([54.61], [8.53], [1.0, 2.0, 4.0, 9.0], [4.2426], MASS, kp_max=9.0)
        assert grid['V_lim'].is_monotonic_decreasing

    def test_non_robust_points(self):
        """Test points violating the robust condition are NaN."""
        grid = set_size_sweep([54.61], [8.53], [9.0], [0.5, 4.0], MASS)
        assert list(grid['robust']) == [False, True]
        assert np.isnan(grid['V_lim'].iloc[0])
