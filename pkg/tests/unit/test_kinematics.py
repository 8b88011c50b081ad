"""
Unit tests for attitude kinematics
Rotation matrices, Euler-rate maps and the roll singularity.
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path to import from core
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.kinematics import (
    GimbalLockError,
    euler_rate_matrix,
    euler_rate_matrix_dot,
    euler_rates,
    rotation_body_to_inertial,
    rotation_inertial_to_body,
    wrap_angle,
)


def _rx(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def _ry(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


class TestRotation:
    """Test the Z-Y-X rotation."""

    def test_matches_elementary_product(self):
        """Test R = Rz(psi) Ry(theta) Rx(phi)."""
        Psi = np.array([0.7, -0.3, 1.9])
        expected = _rz(Psi[2]) @ _ry(Psi[1]) @ _rx(Psi[0])
        np.testing.assert_allclose(rotation_body_to_inertial(Psi), expected, atol=1e-14)

    def test_hover_nose_up(self):
        """Test at phi = pi/2 the body nose axis points up."""
        R = rotation_body_to_inertial([np.pi / 2, 0.0, 0.0])
        np.testing.assert_allclose(R @ [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], atol=1e-15)

    def test_inverse_is_transpose(self):
        """Test the inertial-to-body map inverts the rotation."""
        Psi = [0.2, 0.4, -1.0]
        np.testing.assert_allclose(
            rotation_inertial_to_body(Psi) @ rotation_body_to_inertial(Psi), np.eye(3), atol=1e-14
        )


class TestEulerRates:
    """Test the Euler-rate maps."""

    def test_identity_at_zero(self):
        """Test L is the identity at zero attitude."""
        np.testing.assert_allclose(euler_rate_matrix([0.0, 0.0, 0.0]), np.eye(3))

    def test_gimbal_lock(self):
        """Test roll at pi/2 raises."""
        with pytest.raises(GimbalLockError):
            euler_rate_matrix([0.3, np.pi / 2, 0.0])

    def test_gimbal_lock_is_value_error(self):
        """Test the singularity error derives from ValueError."""
        assert issubclass(GimbalLockError, ValueError)

    def test_round_trip(self):
        """Test euler_rates inverts L."""
        Psi = np.array([1.2, 0.3, -0.4])
        Psi_dot = np.array([0.5, -0.2, 0.9])
        omega = euler_rate_matrix(Psi) @ Psi_dot
        np.testing.assert_allclose(euler_rates(Psi, omega), Psi_dot, atol=1e-12)

    def test_derivative_matches_finite_difference(self):
        """Test L_dot against a central difference along the rate."""
        Psi = np.array([1.1, 0.25, 0.3])
        Psi_dot = np.array([0.4, -0.7, 0.2])
        h = 1e-6
        numeric = (euler_rate_matrix(Psi + h * Psi_dot) - euler_rate_matrix(Psi - h * Psi_dot)) / (2 * h)
        np.testing.assert_allclose(euler_rate_matrix_dot(Psi, Psi_dot), numeric, atol=1e-8)


class TestWrapAngle:
    """Test angle wrapping."""

    def test_scalar(self):
        """Test scalars wrap into (-pi, pi]."""
        assert wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
        assert wrap_angle(-np.pi) == pytest.approx(np.pi)

    def test_array(self):
        """Test arrays wrap elementwise."""
        np.testing.assert_allclose(wrap_angle(np.array([0.0, 2 * np.pi + 0.1])), [0.0, 0.1], atol=1e-12)
