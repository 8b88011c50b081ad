"""
Containment Verification
Empirical checks of the invariant set on closed-loop logs: entry into the
set, containment afterward, and decrease of V outside the threshold region.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from simulation.engine import SimLog
from stability.invariant_set import InvariantSet
from stability.lyapunov import LyapunovForm, canonical_form, lyapunov_value

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['t', 'V', 'norm_Pe', 'norm_Pde', 'inside']


def lyapunov_trace(log: SimLog, form: LyapunovForm, inv_set: Optional[InvariantSet] = None) -> pd.DataFrame:
    """V(t) together with the error-norm trace of a log."""
    P_E = np.hstack([log.P_e, log.Pdot_e])
    V = lyapunov_value(P_E, form) if len(P_E) else np.array([])
    trace = pd.DataFrame({
        't': log.t,
        'V': np.atleast_1d(V),
        'norm_Pe': np.linalg.norm(log.P_e, axis=1),
        'norm_Pde': np.linalg.norm(log.Pdot_e, axis=1),
    })
    trace['inside'] = trace['V'] <= inv_set.V_lim if inv_set is not None else False
    return trace[TRACE_COLUMNS]


@dataclass
class ContainmentReport:
    """
    Containment verdict for one run.

    Attributes:
        run: Log label
        entered: Whether V ever reached V_lim
        entry_time: First time V <= V_lim (NaN if never)
        passed: Entered and V <= V_lim (1 + tolerance) at every later sample
        V_lim: Level of the set
        tolerance: Relative slack on V_lim after entry
        max_V: Largest V over the log
        max_V_after_entry: Largest V from the entry time on
        violation_time: First time V exceeded the slack after entry (NaN if none)
        trace: V(t) and error-norm trace
    """
    run: str
    entered: bool
    entry_time: float
    passed: bool
    V_lim: float
    tolerance: float
    max_V: float
    max_V_after_entry: float
    violation_time: float
    trace: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=TRACE_COLUMNS), repr=False)

    def as_row(self) -> dict:
        return {
            'run': self.run,
            'entered': self.entered,
            'entry_time': self.entry_time,
            'passed': self.passed,
            'V_lim': self.V_lim,
            'tolerance': self.tolerance,
            'max_V': self.max_V,
            'max_V_after_entry': self.max_V_after_entry,
            'violation_time': self.violation_time,
        }


def verify_containment(
    log: SimLog,
    inv_set: InvariantSet,
    form: Optional[LyapunovForm] = None,
    tol: float = 0.05,
) -> ContainmentReport:
    """
    Check that a run enters the set and stays in it.

    Args:
        log: Closed-loop log
        inv_set: Convergent error set
        form: Lyapunov form for V (default: canonical form of the set's gains)
        tol: Relative slack on V_lim after entry

    Returns:
        ContainmentReport. A run that never enters is reported as failed,
        not raised.
    """
    if tol < 0:
        raise ValueError(f"tol must be non-negative, got {tol}")
    form = form or canonical_form(inv_set.gains)
    trace = lyapunov_trace(log, form, inv_set)
    V = trace['V'].to_numpy()
    t = trace['t'].to_numpy()
    nan = float('nan')

    if len(V) == 0:
        logger.warning(f"{log.label}: empty log, containment not evaluated")
        return ContainmentReport(log.label, False, nan, False, inv_set.V_lim, tol, nan, nan, nan, trace)

    inside = np.flatnonzero(V <= inv_set.V_lim)
    if len(inside) == 0:
        logger.warning(f"{log.label}: never entered the set (min V={V.min():.4g}, V_lim={inv_set.V_lim:.4g})")
        return ContainmentReport(log.label, False, nan, False, inv_set.V_lim, tol,
                                 float(V.max()), nan, nan, trace)

    k = int(inside[0])
    after = V[k:]
    limit = inv_set.V_lim * (1.0 + tol)
    excursions = np.flatnonzero(after > limit)
    passed = len(excursions) == 0
    violation_time = float(t[k + excursions[0]]) if not passed else nan
    if not passed:
        logger.warning(f"{log.label}: left the set at t={violation_time:.3f}s "
                       f"(V={after[excursions[0]]:.4g} > {limit:.4g})")

    return ContainmentReport(
        run=log.label,
        entered=True,
        entry_time=float(t[k]),
        passed=passed,
        V_lim=inv_set.V_lim,
        tolerance=tol,
        max_V=float(V.max()),
        max_V_after_entry=float(after.max()),
        violation_time=violation_time,
        trace=trace,
    )


@dataclass
class DecreaseReport:
    """Samples outside the threshold region and where V failed to decrease."""
    checked: int
    violations: int
    violation_times: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def decrease_outside_check(
    log: SimLog,
    inv_set: InvariantSet,
    form: Optional[LyapunovForm] = None,
    margins: Tuple[float, float] = (0.0, 0.0),
    tolerance: float = 0.0,
) -> DecreaseReport:
    """
    Check that V decreases wherever both error norms exceed their thresholds.

    A sample k is checked when |P_e| >= position_threshold + margins[0] and
    |Pdot_e| >= velocity_threshold + margins[1]; it fails if
    V[k+1] - V[k] >= tolerance.
    """
    form = form or canonical_form(inv_set.gains)
    trace = lyapunov_trace(log, form, inv_set)
    if len(trace) < 2:
        return DecreaseReport(checked=0, violations=0)

    V = trace['V'].to_numpy()
    outside = (
        (trace['norm_Pe'].to_numpy() >= inv_set.position_threshold + margins[0])
        & (trace['norm_Pde'].to_numpy() >= inv_set.velocity_threshold + margins[1])
    )[:-1]
    dV = np.diff(V)
    bad = outside & (dV >= tolerance)
    times = trace['t'].to_numpy()[:-1][bad].tolist()
    if times:
        logger.warning(f"{log.label}: V did not decrease at {len(times)} samples outside the thresholds")
    return DecreaseReport(checked=int(outside.sum()), violations=len(times), violation_times=times)
