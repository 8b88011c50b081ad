"""
Unit tests for the simulation engine
"""

import logging
import pytest
import numpy as np
import pandas as pd
import sys
from pathlib import Path

# Add parent directory to path to import from simulation
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from control.cascade import ControllerRates
from core.aerodynamics import Environment, aero_forces_moments, aero_load_inertial
from core.dynamics import RigidBodyState
from core.kinematics import wrap_angle
from core.vehicle import RotorCommand, rotor_forward_map
from planning.planner import FeedforwardMode, feedforward_for_mode
from planning.reference import ReferenceTrajectory
from simulation.engine import (
    LOG_COLUMNS,
    SimConfig,
    SimLog,
    SimulationDivergedError,
    initial_state_from_reference,
    run_mission,
)
from tests.fixtures.builders import aero_free_vehicle, default_vehicle, nominal_gains


def _hover_reference(params, duration: float = 1.0) -> ReferenceTrajectory:
    return ReferenceTrajectory.hover((0.0, 0.0, 10.0), duration, thrust=params.m * params.g)


class TestSimConfig:
    """Test simulation settings."""

    def test_step_counts(self):
        """Test loop step ratios at the default rates."""
        cfg = SimConfig(duration=2.0)
        assert cfg.outer_steps == 10
        assert cfg.inner_steps == 2
        assert cfg.n_steps == 2000

    def test_step_must_divide_periods(self):
        """Test a plant step that does not divide the controller periods."""
        with pytest.raises(ValueError, match="does not divide"):
            SimConfig(dt_plant=3e-3)

    def test_invalid_values(self):
        """Test non-positive durations and envelopes."""
        with pytest.raises(ValueError):
            SimConfig(duration=0.0)
        with pytest.raises(ValueError):
            SimConfig(divergence_limit=-1.0)
        with pytest.raises(ValueError):
            SimConfig(mode="sometimes")


class TestRunMission:
    """Test closed-loop runs."""

    def setup_method(self):
        self.params = aero_free_vehicle()
        self.gains = nominal_gains()

    def test_hover_hold(self):
        """Test a hover reference is held without error."""
        log = run_mission(_hover_reference(self.params), SimConfig(duration=1.0), self.gains, self.params)
        assert len(log) == 100
        assert list(log.frame.columns) == LOG_COLUMNS
        assert log.frame['norm_Pe'].max() < 1e-3
        assert not log.saturation.any()

    def test_offset_recovers(self):
        """Test an initial altitude offset is driven toward zero."""
        cfg = SimConfig(duration=4.0, position_offset=(0.0, 0.0, -0.5))
        log = run_mission(_hover_reference(self.params), cfg, self.gains, self.params)
        assert log.frame['norm_Pe'].iloc[0] == pytest.approx(0.5)
        assert log.frame['norm_Pe'].iloc[-1] < 0.05

    def test_deterministic(self):
        """Test identical inputs give identical logs."""
        cfg = SimConfig(duration=0.5, position_offset=(0.0, 0.2, -0.3))
        first = run_mission(_hover_reference(self.params), cfg, self.gains, self.params)
        second = run_mission(_hover_reference(self.params), cfg, self.gains, self.params)
        np.testing.assert_array_equal(first.frame.to_numpy(), second.frame.to_numpy())

    def test_divergence_keeps_partial_log(self):
        """Test leaving the envelope raises with the partial log attached."""
        cfg = SimConfig(duration=1.0, position_offset=(0.0, 0.0, 2.0), divergence_limit=0.5)
        with pytest.raises(SimulationDivergedError) as excinfo:
            run_mission(_hover_reference(self.params), cfg, self.gains, self.params)
        assert len(excinfo.value.partial_log) == 1
        assert excinfo.value.time == pytest.approx(0.0)

    def test_reference_extended(self):
        """Test a short reference is extended to the run duration."""
        log = run_mission(_hover_reference(self.params, duration=0.2), SimConfig(duration=0.5),
                          self.gains, self.params)
        assert len(log) == 50

    def test_custom_rates(self):
        """Test the log follows the outer-loop rate."""
        cfg = SimConfig(duration=0.5, rates=ControllerRates(outer_hz=50.0, inner_hz=250.0), dt_plant=2e-3)
        log = run_mission(_hover_reference(self.params), cfg, self.gains, self.params)
        assert len(log) == 25
        np.testing.assert_allclose(np.diff(log.t), 0.02)


class TestLoggedQuantities:
    """Test logged mismatch and command columns against their definitions."""

    def test_norm_dFA_recomputed_from_log(self):
        """Test every logged ||dF_A|| matches the load rebuilt from the logged state and rotor speeds."""
        params = default_vehicle()
        t = np.array([0.0, 1.0])
        traj = ReferenceTrajectory.from_arrays(
            t=t,
            P_d=[[0.0, 0.0, 10.0], [0.0, 8.0, 10.0]],
            Pd_dot=np.tile([0.0, 8.0, 0.0], (2, 1)),
            Pd_ddot=np.zeros((2, 3)),
            F_A_star=np.tile([0.0, 5.0, -30.0], (2, 1)),
            label="cruise",
        )
        cfg = SimConfig(duration=0.5, mode=FeedforwardMode.OPTIMAL, position_offset=(0.0, 0.3, -0.2))
        log = run_mission(traj, cfg, nominal_gains(), params)
        reference = feedforward_for_mode(traj, cfg.mode, params)

        assert log.frame['norm_dFA'].max() > 0.0
        for row in log.frame.itertuples(index=False):
            state = RigidBodyState(
                P=[row.x, row.y, row.z], Psi=[row.phi, row.theta, row.psi],
                v_b=[row.u, row.v, row.w], omega_b=[row.p, row.q, row.r],
            )
            T, _ = rotor_forward_map(RotorCommand((row.Omega1, row.Omega2, row.Omega3, row.Omega4)), params)
            load = aero_load_inertial(aero_forces_moments(state, T, Environment(), params), state.Psi)
            expected = np.linalg.norm(reference.sample(row.t).F_A_star - load)
            assert row.norm_dFA == pytest.approx(expected, abs=1e-12)

    def test_attitude_command_continuous_across_wrap(self):
        """Test phi_c crosses +-pi without a jump beyond the filter bandwidth."""
        params = aero_free_vehicle()
        # Backward load with the weight cancelled: the thrust axis starts horizontal, nose aft
        traj = ReferenceTrajectory.hover(
            (0.0, 0.0, 10.0), 2.0, F_A_star=(0.0, -80.0, -params.m * params.g), pitch=np.pi
        )
        cfg = SimConfig(duration=2.0, mode=FeedforwardMode.OPTIMAL, velocity_offset=(0.0, 0.0, 0.5))
        log = run_mission(traj, cfg, nominal_gains(), params)

        phi_c = log.frame['phi_c'].to_numpy()
        assert np.any(phi_c < -np.pi / 2) and np.any(phi_c > np.pi / 2)
        assert np.max(np.abs(np.diff(phi_c))) > np.pi

        steps = np.abs(wrap_angle(np.diff(log.frame[['phi_c', 'theta_c']].to_numpy(), axis=0)))
        assert np.max(steps) <= cfg.rates.filter_cutoff / cfg.rates.outer_hz

    def test_attitude_command_continuous_after_hold(self, caplog):
        """Test the command leaves a held interval without a jump."""
        params = aero_free_vehicle()
        # Feedforward cancelling gravity makes the thrust demand vanish at zero error
        traj = ReferenceTrajectory.hover((0.0, 0.0, 10.0), 1.0, F_A_star=(0.0, 0.0, -params.m * params.g))
        cfg = SimConfig(duration=1.0, mode=FeedforwardMode.OPTIMAL)
        with caplog.at_level(logging.WARNING):
            log = run_mission(traj, cfg, nominal_gains(), params)

        assert "holding previous attitude command" in caplog.text
        steps = np.abs(wrap_angle(np.diff(log.frame[['phi_c', 'theta_c']].to_numpy(), axis=0)))
        assert np.max(steps) <= cfg.rates.filter_cutoff / cfg.rates.outer_hz
        np.testing.assert_allclose(log.frame['phi_c'], np.pi / 2, atol=1e-9)


class TestSimLog:
    """Test log persistence and accessors."""

    def test_initial_state(self):
        """Test the initial state matches the reference plus offsets."""
        params = aero_free_vehicle()
        state = initial_state_from_reference(_hover_reference(params), params, (0.0, 1.0, 0.0))
        np.testing.assert_allclose(state.P, [0.0, 1.0, 10.0])
        np.testing.assert_allclose(state.Psi, [np.pi / 2, 0.0, 0.0], atol=1e-12)

    def test_csv_round_trip(self, tmp_path):
        """Test logs reload from CSV."""
        params = aero_free_vehicle()
        log = run_mission(_hover_reference(params), SimConfig(duration=0.2), nominal_gains(), params)
        path = log.to_csv(tmp_path / "log.csv")
        loaded = SimLog.from_csv(path)
        assert len(loaded) == len(log)
        np.testing.assert_allclose(loaded.P, log.P, atol=1e-10)

    def test_missing_columns(self):
        """Test frames without the schema are rejected."""
        with pytest.raises(ValueError, match="missing"):
            SimLog(pd.DataFrame({'t': [0.0]}))

    def test_empty_log(self):
        """Test an empty log has no samples."""
        assert len(SimLog()) == 0
