"""
Unit tests for containment verification
"""

import pytest
import numpy as np
import pandas as pd
import sys
from pathlib import Path

# Add parent directory to path to import from stability
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from simulation.engine import LOG_COLUMNS, SimLog
from stability.invariant_set import compute_invariant_set
from stability.lyapunov import canonical_form
from stability.uncertainty import UncertaintyBound
from stability.verification import TRACE_COLUMNS, decrease_outside_check, lyapunov_trace, verify_containment
from tests.fixtures.builders import nominal_gains

MASS = 9.07


def _decaying_log(amplitude: float = 2.0, duration: float = 8.0, jump_at=None) -> SimLog:
    """Altitude error a e^-t with matching velocity error, optionally jumping back to 1 m."""
    t = np.arange(0.0, duration, 0.01)
    e = amplitude * np.exp(-t)
    v = -amplitude * np.exp(-t)
    if jump_at is not None:
        e = np.where(t >= jump_at, 1.0, e)
        v = np.where(t >= jump_at, 0.0, v)
    frame = pd.DataFrame(0.0, index=range(len(t)), columns=LOG_COLUMNS)
    frame['t'] = t
    frame['ez'] = e
    frame['evz'] = v
    frame['norm_Pe'] = np.abs(e)
    frame['norm_Pde'] = np.abs(v)
    return SimLog(frame, label="synthetic")


class TestVerifyContainment:
    """Test entry and containment verdicts."""

    def setup_method(self):
        self.inv_set = compute_invariant_set(nominal_gains(), UncertaintyBound(alpha0=1.0, alpha1=0.5), MASS)

    def test_decaying_run_passes(self):
        """Test a decaying error enters and stays."""
        report = verify_containment(_decaying_log(), self.inv_set)
        assert report.entered
        assert report.passed
        assert 0.0 < report.entry_time < 8.0
        assert report.max_V_after_entry <= self.inv_set.V_lim
        assert np.isnan(report.violation_time)

    def test_exit_fails(self):
        """Test leaving the set after entry fails at the exit time."""
        report = verify_containment(_decaying_log(jump_at=5.995), self.inv_set)
        assert report.entered
        assert not report.passed
        assert report.violation_time == pytest.approx(6.0)

    def test_never_entered(self):
        """Test a run that never reaches the set is reported, not raised."""
        report = verify_containment(_decaying_log(duration=1.0), self.inv_set)
        assert not report.entered
        assert not report.passed
        assert np.isnan(report.entry_time)

    def test_empty_log(self):
        """Test an empty log fails without raising."""
        report = verify_containment(SimLog(), self.inv_set)
        assert not report.passed
        assert report.trace.empty

    def test_negative_tolerance(self):
        """Test the slack must be non-negative."""
        with pytest.raises(ValueError):
            verify_containment(_decaying_log(), self.inv_set, tol=-0.1)

    def test_row(self):
        """Test the summary row omits the trace."""
        row = verify_containment(_decaying_log(), self.inv_set).as_row()
        assert row['run'] == "synthetic"
        assert 'trace' not in row


class TestLyapunovTrace:
    """Test V(t) traces."""

    def test_columns_and_values(self):
        """Test the trace schema and the first value."""
        form = canonical_form(nominal_gains())
        trace = lyapunov_trace(_decaying_log(), form)
        assert list(trace.columns) == TRACE_COLUMNS
        e, v = 2.0, -2.0
        expected = 0.5 * form.Q1[2, 2] * e ** 2 + 0.5 * v ** 2 + form.Q3[2, 2] * e * v
        assert trace['V'].iloc[0] == pytest.approx(expected)
        assert trace['V'].is_monotonic_decreasing


class TestDecreaseOutsideCheck:
    """Test V decrease outside the threshold region."""

    def setup_method(self):
        self.inv_set = compute_invariant_set(nominal_gains(), UncertaintyBound(alpha0=1.0, alpha1=0.5), MASS)

    def test_decaying_run(self):
        """Test a decaying run has no violations."""
        report = decrease_outside_check(_decaying_log(), self.inv_set)
        assert report.checked > 0
        assert report.passed

    def test_growing_error_flagged(self):
        """Test a growing error outside the thresholds is flagged."""
        t = np.arange(0.0, 1.0, 0.01)
        frame = pd.DataFrame(0.0, index=range(len(t)), columns=LOG_COLUMNS)
        frame['t'] = t
        frame['ez'] = 1.0 + t
        frame['evz'] = 1.0 + t
        frame['norm_Pe'] = 1.0 + t
        frame['norm_Pde'] = 1.0 + t
        report = decrease_outside_check(SimLog(frame, label="growing"), self.inv_set)
        assert not report.passed
        assert report.violations == report.checked == len(t) - 1
