"""
Tracking Report Generator
Text, JSON, CSV and Markdown renderings of tracking metrics.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np

from simulation.metrics.tracking_metrics import TrackingMetrics

logger = logging.getLogger(__name__)

REPORT_ROWS = [
    ('Max Position Error', 'max_position_error', 'm'),
    ('RMS Position Error', 'rms_position_error', 'm'),
    ('Max Velocity Error', 'max_velocity_error', 'm/s'),
    ('RMS Velocity Error', 'rms_velocity_error', 'm/s'),
    ('Saturated Samples', 'saturation_fraction', ''),
]


class TrackingReport:
    """
    Reports of one closed-loop run with multiple export formats.

    File exports contain no timestamps so repeated runs produce identical files.
    """

    def __init__(self, metrics: TrackingMetrics):
        """
        Initialize report generator.

        Args:
            metrics: TrackingMetrics instance
        """
        self.metrics = metrics

    def generate_summary_report(self) -> str:
        """
        Formatted summary with pass/fail for each targeted metric.

        Returns:
            str: Report text
        """
        m = self.metrics.metrics

        report = []
        report.append("=" * 80)
        report.append(f"TRACKING REPORT - {self.metrics.log.label}")
        report.append("=" * 80)

        targeted = [metric for metric in m.values() if 'meets_target' in metric]
        passed = sum(1 for metric in targeted if metric['meets_target'])
        report.append(f"OVERALL SCORE: {passed}/{len(targeted)} metrics passed")
        report.append("")

        report.append("TRACKING METRICS")
        report.append("-" * 80)
        report.append(f"{'Metric':<25} {'Value':>15} {'Target':>15} {'Status':>10}")
        report.append("-" * 80)
        for name, key, unit in REPORT_ROWS:
            metric = m[key]
            status = 'PASS' if metric['meets_target'] else 'FAIL'
            report.append(
                f"{name:<25} {metric['value']:>11.4f} {unit:<3} {metric['target']:>11.4f} {unit:<3} {status:>10}"
            )
        report.append("-" * 80)
        report.append("")

        report.append("FEEDFORWARD ERROR")
        report.append("-" * 80)
        report.append(f"Max ||dF_A||:             {m['max_feedforward_error']['value']:>10.3f} N")
        report.append(f"RMS ||dF_A||:             {m['rms_feedforward_error']['value']:>10.3f} N")
        report.append(f"Duration:                 {m['duration']['value']:>10.2f} s")
        report.append(f"Samples:                  {m['samples']['value']:>10}")
        report.append("=" * 80)

        return "\n".join(report)

    def generate_compact_summary(self) -> str:
        m = self.metrics.metrics
        return (
            f"max|P_e|: {m['max_position_error']['value']:.4f} m | "
            f"rms|P_e|: {m['rms_position_error']['value']:.4f} m | "
            f"max|Pdot_e|: {m['max_velocity_error']['value']:.4f} m/s | "
            f"rms|Pdot_e|: {m['rms_velocity_error']['value']:.4f} m/s | "
            f"sat: {100 * m['saturation_fraction']['value']:.1f}%"
        )

    def export_to_json(self, filepath) -> Path:
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        json_data = {
            'run': self.metrics.log.label,
            'summary': self.metrics.get_summary(),
            'all_metrics': self._serialize_metrics(self.metrics.metrics),
            'meets_all_targets': self.metrics.meets_all_targets(),
        }
        with open(path, 'w') as f:
            json.dump(json_data, f, indent=2, default=str)
        logger.info(f"Tracking summary written to {path}")
        return path

    def export_to_csv(self, filepath) -> Path:
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['Metric', 'Value', 'Target', 'Meets Target'])
            for name, data in self.metrics.metrics.items():
                writer.writerow([
                    name,
                    data['value'],
                    data.get('target', 'N/A'),
                    data.get('meets_target', 'N/A'),
                ])
        return path

    def export_to_markdown(self, filepath) -> Path:
        m = self.metrics.metrics
        md = []
        md.append(f"# Tracking Report - {self.metrics.log.label}")
        md.append("")
        md.append("| Metric | Value | Target | Status |")
        md.append("|--------|-------|--------|--------|")
        for name, key, unit in REPORT_ROWS:
            metric = m[key]
            status = 'PASS' if metric['meets_target'] else 'FAIL'
            md.append(f"| {name} | {metric['value']:.4f} {unit} | {metric['target']} {unit} | {status} |")
        md.append("")
        md.append(f"- Max feedforward error: {m['max_feedforward_error']['value']:.3f} N")
        md.append(f"- RMS feedforward error: {m['rms_feedforward_error']['value']:.3f} N")

        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write('\n'.join(md))
        return path

    def _serialize_metrics(self, metrics: Dict[str, Any]) -> Dict[str, Any]:
        serialized = {}
        for key, value in metrics.items():
            serialized[key] = {
                k: (v.item() if isinstance(v, np.generic) else v) for k, v in value.items()
            }
        return serialized

    def print_summary(self):
        print(self.generate_summary_report())

    def print_compact(self):
        print(self.generate_compact_summary())
