"""
Unit tests for reference trajectories
"""

import pytest
import numpy as np
import pandas as pd
import sys
from pathlib import Path

# Add parent directory to path to import from planning
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from planning.reference import CSV_COLUMNS, ReferenceTrajectory


def _climb(n: int = 21, duration: float = 4.0) -> ReferenceTrajectory:
    """Constant-acceleration climb z = t^2 / 2 with a constant forward load."""
    t = np.linspace(0.0, duration, n)
    zeros = np.zeros(n)
    return ReferenceTrajectory.from_arrays(
        t=t,
        P_d=np.column_stack([zeros, zeros, 0.5 * t ** 2]),
        Pd_dot=np.column_stack([zeros, zeros, t]),
        Pd_ddot=np.column_stack([zeros, zeros, np.ones(n)]),
        F_A_star=np.column_stack([zeros, np.full(n, 3.0), zeros]),
        label="climb",
    )


class TestReferenceTrajectory:
    """Test construction, sampling and persistence."""

    def test_columns(self):
        """Test the frame carries the export schema."""
        assert list(_climb().frame.columns) == CSV_COLUMNS

    def test_sample_between_nodes(self):
        """Test spline sampling reproduces a quadratic path."""
        sample = _climb().sample(1.3)
        assert sample.P_d[2] == pytest.approx(0.5 * 1.3 ** 2, rel=1e-9)
        assert sample.Pd_dot[2] == pytest.approx(1.3, rel=1e-9)
        assert sample.F_A_star[1] == pytest.approx(3.0)

    def test_sample_past_end(self):
        """Test the reference coasts at the final velocity."""
        traj = _climb()
        sample = traj.sample(5.0)
        assert sample.P_d[2] == pytest.approx(8.0 + 4.0 * 1.0)
        np.testing.assert_allclose(sample.Pd_ddot, 0.0)
        assert sample.F_A_star[1] == pytest.approx(3.0)

    def test_sample_before_start(self):
        """Test times before the first node hold the first node."""
        sample = _climb().sample(-1.0)
        np.testing.assert_allclose(sample.P_d, 0.0)

    def test_rejects_lateral_feedforward(self):
        """Test a nonzero x feedforward column is rejected."""
        frame = _climb().frame.copy()
        frame.loc[3, 'FAx'] = 1.0
        with pytest.raises(ValueError, match="out-of-plane"):
            ReferenceTrajectory(frame)

    def test_rejects_unsorted_time(self):
        """Test a non-increasing clock is rejected."""
        frame = _climb().frame.copy()
        frame.loc[2, 't'] = frame.loc[1, 't']
        with pytest.raises(ValueError, match="increasing"):
            ReferenceTrajectory(frame)

    def test_rejects_missing_columns(self):
        """Test missing columns are reported."""
        with pytest.raises(ValueError, match="missing"):
            ReferenceTrajectory(pd.DataFrame({'t': [0.0, 1.0]}))

    def test_hover(self):
        """Test the stationary hover reference."""
        traj = ReferenceTrajectory.hover((1.0, 2.0, 3.0), duration=5.0, thrust=89.0)
        sample = traj.sample(2.5)
        np.testing.assert_allclose(sample.P_d, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(sample.Pd_dot, 0.0, atol=1e-12)
        with pytest.raises(ValueError):
            ReferenceTrajectory.hover((0.0, 0.0, 0.0), duration=0.0)

    def test_resample_and_extend(self):
        """Test uniform resampling and constant-velocity extension."""
        traj = _climb()
        resampled = traj.resample(0.5)
        assert resampled.t[-1] == pytest.approx(4.0)
        np.testing.assert_allclose(np.diff(resampled.t), 0.5)
        extended = traj.extend(6.0, dt=0.5)
        assert extended.t_end == pytest.approx(6.0)
        assert extended.P_d[-1, 2] == pytest.approx(8.0 + 4.0 * 2.0)

    def test_feedforward_variants(self):
        """Test dropping and replacing the feedforward."""
        traj = _climb()
        np.testing.assert_array_equal(traj.without_feedforward().F_A_star, 0.0)
        replaced = traj.with_feedforward(np.tile([0.0, 1.0, 2.0], (len(traj), 1)), label="other")
        assert replaced.label == "other"
        np.testing.assert_allclose(replaced.F_A_star[:, 2], 2.0)

    def test_csv_round_trip(self, tmp_path):
        """Test the CSV export reloads with identical values."""
        traj = _climb()
        path = traj.to_csv(tmp_path / "trajectory.csv")
        loaded = ReferenceTrajectory.from_csv(path)
        assert loaded.label == "trajectory"
        np.testing.assert_allclose(loaded.frame.to_numpy(), traj.frame.to_numpy(), rtol=1e-11)

    def test_lift_drag_carried(self, tmp_path):
        """Test lift and drag survive resampling, extension and the CSV round trip."""
        base = _climb()
        t = base.t
        frame = base.frame.copy()
        frame['L_star'] = 10.0 + 2.0 * t
        frame['D_star'] = 1.0 + 0.5 * t ** 2
        traj = ReferenceTrajectory(frame, label="loaded")

        resampled = traj.resample(0.3)
        np.testing.assert_allclose(resampled.L_star, 10.0 + 2.0 * resampled.t, rtol=1e-9)
        np.testing.assert_allclose(resampled.D_star, 1.0 + 0.5 * resampled.t ** 2, rtol=1e-9)

        extended = traj.extend(6.0, dt=0.5)
        tail = extended.t > traj.t_end
        np.testing.assert_allclose(extended.L_star[tail], traj.L_star[-1])
        np.testing.assert_allclose(extended.D_star[tail], traj.D_star[-1])

        loaded = ReferenceTrajectory.from_csv(traj.to_csv(tmp_path / "loaded.csv"))
        np.testing.assert_allclose(loaded.L_star, traj.L_star, rtol=1e-11)
        np.testing.assert_allclose(loaded.D_star, traj.D_star, rtol=1e-11)

    def test_missing_csv(self, tmp_path):
        """Test a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            ReferenceTrajectory.from_csv(tmp_path / "absent.csv")
