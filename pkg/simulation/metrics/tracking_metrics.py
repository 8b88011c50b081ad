"""
Tracking Metrics Calculator
Position, velocity and actuator metrics of one closed-loop run.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np

from simulation.engine import SimLog

logger = logging.getLogger(__name__)

DEFAULT_TARGETS = {
    'max_position_error': 1.0,
    'rms_position_error': 0.5,
    'max_velocity_error': 1.0,
    'rms_velocity_error': 0.5,
    'saturation_fraction': 0.05,
}


class TrackingMetrics:
    """
    Tracking metrics of a simulation log.

    Tracking targets (defaults):
    - Max ||P_e||: < 1.0 m
    - RMS ||P_e||: < 0.5 m
    - Max ||Pdot_e||: < 1.0 m/s
    - RMS ||Pdot_e||: < 0.5 m/s
    - Samples with a saturated rotor: < 5%
    """

    def __init__(self, log: SimLog, targets: Optional[Dict[str, float]] = None):
        """
        Initialize tracking metrics calculator.

        Args:
            log: Closed-loop simulation log
            targets: Overrides of DEFAULT_TARGETS
        """
        if len(log) == 0:
            raise ValueError("Cannot compute tracking metrics of an empty log")
        self.log = log
        self.targets = {**DEFAULT_TARGETS, **(targets or {})}
        self.metrics = self.calculate_all_metrics()

    def calculate_all_metrics(self) -> Dict[str, Any]:
        frame = self.log.frame
        return {
            'max_position_error': self._upper_metric('max_position_error', frame['norm_Pe'].max()),
            'rms_position_error': self._upper_metric('rms_position_error', _rms(frame['norm_Pe'])),
            'max_velocity_error': self._upper_metric('max_velocity_error', frame['norm_Pde'].max()),
            'rms_velocity_error': self._upper_metric('rms_velocity_error', _rms(frame['norm_Pde'])),
            'saturation_fraction': self.calculate_saturation_fraction(),
            'max_feedforward_error': {'value': float(frame['norm_dFA'].max())},
            'rms_feedforward_error': {'value': _rms(frame['norm_dFA'])},
            'duration': {'value': float(frame['t'].iloc[-1] - frame['t'].iloc[0])},
            'samples': {'value': len(frame)},
        }

    def _upper_metric(self, name: str, value: float) -> Dict[str, Any]:
        value = float(value)
        target = self.targets[name]
        return {
            'value': value,
            'target': target,
            'meets_target': bool(value <= target),
            'grade': self._grade_error(value / target),
        }

    def calculate_saturation_fraction(self) -> Dict[str, Any]:
        saturated = self.log.saturation.any(axis=1)
        fraction = float(np.mean(saturated))
        target = self.targets['saturation_fraction']
        return {
            'value': fraction,
            'target': target,
            'meets_target': bool(fraction <= target),
            'saturated_samples': int(saturated.sum()),
        }

    def _grade_error(self, ratio: float) -> str:
        """Grade an error relative to its target."""
        if ratio <= 0.1:
            return 'A+ (Excellent)'
        elif ratio <= 0.25:
            return 'A (Very Good)'
        elif ratio <= 0.5:
            return 'B (Good)'
        elif ratio <= 1.0:
            return 'C (Acceptable)'
        else:
            return 'F (Poor)'

    def get_summary(self) -> Dict[str, Any]:
        m = self.metrics
        return {
            'max_position_error': m['max_position_error']['value'],
            'rms_position_error': m['rms_position_error']['value'],
            'max_velocity_error': m['max_velocity_error']['value'],
            'rms_velocity_error': m['rms_velocity_error']['value'],
            'saturation_fraction': m['saturation_fraction']['value'],
        }

    def meets_all_targets(self) -> bool:
        return all(
            metric['meets_target'] for metric in self.metrics.values() if 'meets_target' in metric
        )


def _rms(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.sqrt(np.mean(values ** 2)))


def tracking_summary(log: SimLog) -> Dict[str, Any]:
    """Metric dictionary of one run with the default targets."""
    return TrackingMetrics(log).metrics
