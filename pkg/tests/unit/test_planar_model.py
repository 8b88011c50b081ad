"""
Unit tests for the planar transition model
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path to import from planning
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.aerodynamics import drag_coefficient, lift_coefficient
from planning.mission import PlanarInput, PlanarState
from planning.planar_model import (
    SingularFlightPathError,
    aero_load,
    planar_acceleration,
    planar_aero,
    planar_derivative,
    planar_jacobian,
    planar_wake,
)
from tests.fixtures.builders import default_vehicle


def _reference_rates(s: PlanarState, u: PlanarInput, params) -> np.ndarray:
    """Planar dynamics evaluated term by term."""
    fit = params.aero_fit
    alpha = u.phi - s.gamma
    V_w = 1.2 * np.sqrt(u.T / (8.0 * params.rho * np.pi * params.R ** 2))
    V_a = np.sqrt(s.V_i ** 2 + V_w ** 2 + 2.0 * s.V_i * V_w * np.cos(alpha))
    alpha_e = np.arcsin(s.V_i * np.sin(alpha) / V_a)
    L = 0.5 * params.rho * lift_coefficient(alpha_e, fit) * params.S_w * V_a ** 2
    D = 0.5 * params.rho * drag_coefficient(alpha, fit) * params.S_f * s.V_i ** 2
    d = alpha - alpha_e
    m, g = params.m, params.g
    return np.array([
        s.V_i * np.cos(s.gamma),
        s.V_i * np.sin(s.gamma),
        (u.T * np.cos(alpha) - L * np.sin(d) - D * np.cos(d)) / m - g * np.sin(s.gamma),
        (u.T * np.sin(alpha) + L * np.cos(d) - D * np.sin(d)) / (m * s.V_i) - g * np.cos(s.gamma) / s.V_i,
    ])


class TestPlanarDerivative:
    """Test the planar dynamics."""

    def setup_method(self):
        self.params = default_vehicle()

    def test_level_trim(self):
        """Test a mass matched to the lift holds level flight at 15 m/s."""
        V = 15.0
        D = 0.5 * self.params.rho * drag_coefficient(0.0, self.params.aero_fit) * self.params.S_f * V ** 2
        _, _, _, L, _ = planar_aero(V, D, 0.0, self.params)
        trimmed = self.params.with_overrides(m=float(L) / self.params.g)
        rates = planar_derivative(PlanarState(0.0, 10.0, V, 0.0), PlanarInput(T=float(D), phi=0.0), trimmed)
        np.testing.assert_allclose(rates, [V, 0.0, 0.0, 0.0], atol=1e-10)

    def test_vertical_kinematics(self):
        """Test straight-up flight moves only in altitude."""
        rates = planar_derivative(PlanarState(0.0, 0.0, 2.0, np.pi / 2),
                                  PlanarInput(T=90.0, phi=np.pi / 2), self.params)
        assert rates[0] == pytest.approx(0.0, abs=1e-12)
        assert rates[1] == pytest.approx(2.0)

    def test_matches_reference(self):
        """Test random states against a term-by-term evaluation."""
        rng = np.random.default_rng(8)
        for _ in range(50):
            s = PlanarState(rng.uniform(-10, 10), rng.uniform(0, 30), rng.uniform(0.5, 25),
                            rng.uniform(-0.5, 1.6))
            u = PlanarInput(T=rng.uniform(5, 150), phi=s.gamma + rng.uniform(-0.7, 0.7))
            np.testing.assert_allclose(planar_derivative(s, u, self.params),
                                       _reference_rates(s, u, self.params), rtol=1e-12, atol=1e-12)

    def test_singular_speed(self):
        """Test zero inertial speed raises."""
        with pytest.raises(SingularFlightPathError):
            planar_derivative(PlanarState(0.0, 0.0, 0.0, 0.0), PlanarInput(T=50.0, phi=0.0), self.params)

    def test_negative_thrust_rejected(self):
        """Test planar inputs reject negative thrust."""
        with pytest.raises(ValueError):
            PlanarInput(T=-1.0, phi=0.0)


class TestPlanarHelpers:
    """Test wake, Jacobian and load helpers."""

    def setup_method(self):
        self.params = default_vehicle()

    def test_wake_is_half_the_body_wake(self):
        """Test the planner wake uses the 8 rho pi R^2 denominator."""
        expected = 1.2 * np.sqrt(100.0 / (8.0 * self.params.rho * np.pi * self.params.R ** 2))
        assert planar_wake(100.0, self.params) == pytest.approx(expected)

    def test_zero_alpha_has_zero_effective_angle(self):
        """Test alpha = 0 gives alpha_e = 0 and V_a = V + V_w."""
        V_w, V_a, alpha_e, _, _ = planar_aero(10.0, 80.0, 0.0, self.params)
        assert alpha_e == pytest.approx(0.0, abs=1e-12)
        assert V_a == pytest.approx(10.0 + V_w)

    def test_jacobian_matches_finite_differences(self):
        """Test the complex-step Jacobian against central differences."""
        states = np.array([[1.0, 5.0, 8.0, 0.3]])
        inputs = np.array([[70.0, 0.2]])
        _, jac = planar_jacobian(states, inputs, self.params)
        point = np.hstack([states, inputs])[0]
        step = 1e-6
        for j in range(6):
            plus, minus = point.copy(), point.copy()
            plus[j] += step
            minus[j] -= step
            r_plus, _ = planar_jacobian(plus[None, :4], plus[None, 4:], self.params)
            r_minus, _ = planar_jacobian(minus[None, :4], minus[None, 4:], self.params)
            fd = (r_plus[0] - r_minus[0]) / (2 * step)
            np.testing.assert_allclose(jac[0, :, j], fd, rtol=1e-5, atol=1e-6)

    def test_level_acceleration(self):
        """Test level flight acceleration is V_dot downrange."""
        x_ddot, z_ddot = planar_acceleration(10.0, 0.0, 2.0, 0.0)
        assert x_ddot == pytest.approx(2.0)
        assert z_ddot == pytest.approx(0.0)

    def test_load_without_flow_angle(self):
        """Test beta = 0 puts drag downrange and lift downward."""
        forward, up = aero_load(5.0, 2.0, 0.0)
        assert forward == pytest.approx(2.0)
        assert up == pytest.approx(-5.0)
