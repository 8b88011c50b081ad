"""
Integration tests for planning and flying the transition missions
"""

import pytest
import numpy as np
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.kinematics import wrap_angle
from planning.auglag import PlannerConvergenceError
from planning.planner import FeedforwardMode, SolverOptions, solve_min_time
from planning.transcription import ALPHA_LIMIT
from planning.reference import ReferenceTrajectory
from simulation.engine import SimConfig, run_mission
from simulation.metrics.tracking_metrics import TrackingMetrics
from tests.fixtures.builders import aero_free_vehicle, default_vehicle, nominal_gains

pytestmark = [pytest.mark.integration, pytest.mark.slow]


def _second_order_step(zeta: float, omega: float, t: np.ndarray) -> np.ndarray:
    """Normalized error of P_e'' = -2 zeta omega P_e' - omega^2 P_e from P_e(0) = 1."""
    wd = omega * np.sqrt(1.0 - zeta ** 2)
    return np.exp(-zeta * omega * t) * (np.cos(wd * t) + zeta * omega / wd * np.sin(wd * t))


def _settling_time(t: np.ndarray, e: np.ndarray, band: float = 0.02) -> float:
    outside = np.nonzero(np.abs(e) > band)[0]
    return float(t[outside[-1] + 1]) if len(outside) else 0.0


class TestPlannerFeasibility:
    """Test both missions solve to a feasible transition."""

    def test_hover_to_forward_flight(self, hff_solution):
        report = hff_solution.report
        assert report.success
        assert report.max_defect < 1e-6
        assert report.min_obstacle_clearance >= -1e-6
        assert np.all(np.abs(hff_solution.U[:, 1]) <= ALPHA_LIMIT + 1e-9)
        assert hff_solution.X[-1, 2] == pytest.approx(12.86, abs=1e-4)

    def test_forward_flight_to_hover(self, ffh_solution):
        assert ffh_solution.report.success
        assert abs(ffh_solution.X[-1, 1] - ffh_solution.X[0, 1]) < 0.1
        assert ffh_solution.X[-1, 3] == pytest.approx(np.pi / 2, abs=1e-4)

    def test_shorter_horizon_is_infeasible(self, hff_solution):
        """Test no feasible transition exists with the final time cut by two percent."""
        opts = SolverOptions(nodes=40, fixed_final_time=0.98 * hff_solution.t_f)
        with pytest.raises(PlannerConvergenceError) as exc:
            solve_min_time(hff_solution.mission, default_vehicle(), opts)
        diagnostics = exc.value.diagnostics
        assert (diagnostics['max_defect'] > opts.tol_defect
                or diagnostics['constraint_violation'] > opts.tol_con)


class TestNominalResponse:
    """Test the loop without aerodynamic mismatch behaves as the linear error system."""

    def test_altitude_step_matches_second_order(self):
        params = aero_free_vehicle()
        gains = nominal_gains()
        traj = ReferenceTrajectory.hover((0.0, 0.0, 10.0), 6.0, thrust=params.hover_thrust)
        cfg = SimConfig(duration=6.0, mode=FeedforwardMode.NONE, position_offset=(0.0, 0.0, -0.2))
        log = run_mission(traj, cfg, gains, params)

        t = log.t - log.t[0]
        e = log.P_e[:, 2] / log.P_e[0, 2]
        expected = _second_order_step(0.7071, 3.0, t)

        overshoot = -e.min()
        expected_overshoot = -expected.min()
        assert expected_overshoot == pytest.approx(0.0432, abs=1e-3)
        assert overshoot == pytest.approx(expected_overshoot, rel=0.05)
        assert _settling_time(t, e) == pytest.approx(_settling_time(t, expected), rel=0.05)


class TestFeedforwardOrdering:
    """Test better aerodynamic feedforward gives smaller tracking error."""

    @pytest.mark.parametrize('solution_name', ['hff_solution', 'ffh_solution'])
    def test_optimal_perturbed_none(self, solution_name, request):
        solution = request.getfixturevalue(solution_name)
        params = default_vehicle()
        gains = nominal_gains()
        traj = solution.trajectory

        rms = {}
        for mode in FeedforwardMode:
            cfg = SimConfig(duration=traj.t_end, mode=mode)
            log = run_mission(traj, cfg, gains, params)
            rms[mode] = TrackingMetrics(log).metrics['rms_position_error']['value']

        assert rms[FeedforwardMode.OPTIMAL] < rms[FeedforwardMode.PERTURBED] < rms[FeedforwardMode.NONE]


class TestCommandContinuity:
    """Test the attitude command stays continuous along a planned transition."""

    def test_hover_to_forward_flight_commands(self, hff_solution):
        params = default_vehicle()
        traj = hff_solution.trajectory
        cfg = SimConfig(duration=traj.t_end, mode=FeedforwardMode.OPTIMAL)
        log = run_mission(traj, cfg, nominal_gains(), params)

        steps = np.abs(wrap_angle(np.diff(log.frame[['phi_c', 'theta_c']].to_numpy(), axis=0)))
        assert np.max(steps) <= cfg.rates.filter_cutoff / cfg.rates.outer_hz
