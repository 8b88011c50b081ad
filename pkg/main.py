#!/usr/bin/env python3
"""
QRBP Transition Pipeline
Main entry point with CLI interface

Usage:
    python main.py plan --vehicle config/vehicle_crc20.json --mission config/missions/hff_obstacles.json --out out/hff
    python main.py fly --trajectory out/hff/trajectory.csv --vehicle config/vehicle_crc20.json \
        --gains config/controller_hff.json --mode optimal --out out/hff_fly
    python main.py sweep --manifest config/sweep_manifest.json --out out/sweep
    python main.py analyze --sweep-dir out/sweep --gains config/controller_hff.json \
        --vehicle config/vehicle_crc20.json --out out/analysis
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

# Add current directory to path
sys.path.insert(0, str(Path(__file__).parent))

from core.kinematics import GimbalLockError
from core.vehicle import VehicleParams, vehicle_summary
from planning.auglag import PlannerConvergenceError
from planning.planner import FeedforwardMode, SolverOptions, solve_min_time
from planning.reference import ReferenceTrajectory
from planning.transcription import InfeasibleMissionError
from simulation.engine import SimConfig, SimulationDivergedError, run_mission
from simulation.metrics.tracking_metrics import TrackingMetrics
from simulation.metrics.tracking_report import TrackingReport
from simulation.sweep import InitialOffset, draw_offsets, load_sweep, monte_carlo_sweep, write_sweep
from stability.invariant_set import RobustConditionError, compute_invariant_set
from stability.lyapunov import canonical_form, check_nominal
from stability.uncertainty import DegenerateRegressorError, fit_uncertainty_bound
from stability.verification import decrease_outside_check, verify_containment
from utils.config import (
    ConfigError,
    load_controller_config,
    load_mission_config,
    load_pipeline_manifest,
    load_sweep_manifest,
    load_vehicle,
    resolve_path,
)

# Try to load environment variables
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # python-dotenv not installed

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

COMPUTATIONAL_ERRORS = (
    PlannerConvergenceError,
    SimulationDivergedError,
    GimbalLockError,
    DegenerateRegressorError,
    RobustConditionError,
    InfeasibleMissionError,
)

logger = logging.getLogger(__name__)


def setup_logging(out_dir: Optional[Path], level: str):
    """Root logger with a console handler and pipeline.log in the output directory."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(out_dir / 'pipeline.log'))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def write_json(path: Path, data: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(data, f, indent=2, default=str)
    return path


class UsageError(Exception):
    """Missing or inconsistent command-line input."""


class QRBPCLI:
    """Command-line interface for planning, flying and analyzing transition missions."""

    def __init__(self, args):
        """Initialize CLI with parsed arguments."""
        self.args = args
        self.out = Path(args.out) if getattr(args, 'out', None) else None
        self.pipeline_applied = False

    def run(self) -> int:
        """Dispatch the selected verb and map failures to exit codes."""
        commands = {
            'plan': self.cmd_plan,
            'fly': self.cmd_fly,
            'sweep': self.cmd_sweep,
            'analyze': self.cmd_analyze,
        }
        try:
            self.apply_pipeline()
            if self.out is not None:
                self.out.mkdir(parents=True, exist_ok=True)
            return commands[self.args.command]()
        except (UsageError, ConfigError, FileNotFoundError) as e:
            logger.error(f"Usage error: {e}")
            return EXIT_USAGE
        except COMPUTATIONAL_ERRORS as e:
            logger.error(f"{type(e).__name__}: {e}")
            return EXIT_FAILURE
        except KeyboardInterrupt:
            logger.info("Received keyboard interrupt")
            return EXIT_FAILURE

    def apply_pipeline(self):
        """Fill unset vehicle/mission/gains/mode/out/seed flags from a pipeline manifest."""
        path = getattr(self.args, 'pipeline', None)
        if not path or self.pipeline_applied:
            return
        manifest = load_pipeline_manifest(path)
        for key in ('vehicle', 'mission', 'gains', 'mode', 'out', 'seed'):
            if hasattr(self.args, key) and getattr(self.args, key) is None:
                setattr(self.args, key, getattr(manifest, key))
        if self.out is None:
            self.out = Path(manifest.out)
        self.pipeline_applied = True

    def require(self, *names: str):
        missing = [f"--{n.replace('_', '-')}" for n in names if not getattr(self.args, n, None)]
        if missing:
            raise UsageError(f"{self.args.command} requires {', '.join(missing)}")

    # ==================== PLAN ====================

    def plan(self, params: VehicleParams) -> ReferenceTrajectory:
        mission = load_mission_config(self.args.mission)
        opts = SolverOptions(nodes=self.args.nodes)
        try:
            solution = solve_min_time(mission, params, opts)
        except PlannerConvergenceError as e:
            if self.out is not None:
                diagnostics = dict(e.diagnostics)
                if e.best_iterate is not None:
                    diagnostics['best_iterate'] = np.asarray(e.best_iterate).tolist()
                write_json(self.out / 'diagnostics.json', diagnostics)
            raise

        if self.out is not None:
            solution.trajectory.to_csv(self.out / 'trajectory.csv')
            solution.report.to_json(self.out / 'solve_report.json')
        return solution.trajectory

    def cmd_plan(self) -> int:
        """Solve the minimum-time transition and write trajectory.csv and solve_report.json."""
        self.require('vehicle', 'mission', 'out')
        params = load_vehicle(self.args.vehicle)
        logger.info(f"Planning with {params}")
        trajectory = self.plan(params)
        self.print_banner("PLAN", [
            ('Mission', trajectory.label),
            ('Final time', f"{trajectory.t_end:.3f} s"),
            ('Nodes', str(len(trajectory))),
            ('Output', str(self.out)),
        ])
        return EXIT_OK

    # ==================== FLY ====================

    def cmd_fly(self) -> int:
        """Fly a reference under the cascade controller and write log.csv and summary files."""
        self.require('vehicle', 'gains', 'out')
        if not self.args.trajectory and not self.args.mission:
            raise UsageError("fly requires --trajectory or --mission")
        params = load_vehicle(self.args.vehicle)
        controller = load_controller_config(self.args.gains)
        gains, rates = controller.to_domain()

        if self.args.trajectory:
            trajectory = ReferenceTrajectory.from_csv(self.args.trajectory)
        else:
            trajectory = self.plan(params)

        cfg = SimConfig(
            duration=self.args.duration or trajectory.t_end,
            rates=rates,
            mode=FeedforwardMode(self.args.mode or 'optimal'),
            divergence_limit=controller.divergence_limit,
            seed=self.args.seed or 0,
        )
        logger.info(f"Flying {trajectory.label} with {gains} in {cfg.mode.value} mode")
        try:
            log = run_mission(trajectory, cfg, gains, params)
        except SimulationDivergedError as e:
            e.partial_log.to_csv(self.out / 'log.csv')
            write_json(self.out / 'diagnostics.json', {
                'error': str(e), 'time': e.time, 'samples': len(e.partial_log),
                'gains': gains.as_dict(), 'mode': cfg.mode.value,
            })
            raise

        log.to_csv(self.out / 'log.csv')
        report = TrackingReport(TrackingMetrics(log))
        report.export_to_json(self.out / 'summary.json')
        report.export_to_markdown(self.out / 'summary.md')
        write_json(self.out / 'run.json', {
            'trajectory': trajectory.label, 'mode': cfg.mode.value, 'seed': cfg.seed,
            'duration': cfg.duration, 'gains': gains.as_dict(), 'vehicle': vehicle_summary(params),
        })
        report.print_summary()
        return EXIT_OK

    # ==================== SWEEP ====================

    def sweep_missions(self, manifest, base: Path, params: VehicleParams) -> List[Tuple[str, ReferenceTrajectory]]:
        missions = []
        for entry in manifest.missions:
            if entry.trajectory is not None:
                traj = ReferenceTrajectory.from_csv(resolve_path(base, entry.trajectory))
            elif entry.mission is not None:
                mission = load_mission_config(resolve_path(base, entry.mission))
                traj = solve_min_time(mission, params, SolverOptions(nodes=manifest.nodes)).trajectory
            else:
                traj = ReferenceTrajectory.hover(entry.hover, manifest.duration, thrust=params.hover_thrust)
            missions.append((entry.label, traj))
        return missions

    def cmd_sweep(self) -> int:
        """Monte Carlo sweep over missions x gain sets x initial-state perturbations."""
        self.require('manifest', 'out')
        manifest_path = Path(self.args.manifest)
        manifest = load_sweep_manifest(manifest_path)
        base = manifest_path.parent
        params = load_vehicle(resolve_path(base, manifest.vehicle))
        seed = manifest.seed if self.args.seed is None else self.args.seed
        workers = self.args.workers or int(os.getenv('QRBP_WORKERS', manifest.workers))

        p = manifest.perturbations
        offsets = draw_offsets(p.count, p.position_sigma, p.velocity_sigma, seed, planar=p.planar)
        if p.include_nominal:
            offsets = [InitialOffset()] + offsets

        cfg = SimConfig(duration=manifest.duration, dt_plant=manifest.dt_plant,
                        mode=manifest.feedforward_mode, seed=seed)
        result = monte_carlo_sweep(
            self.sweep_missions(manifest, base, params), manifest.gain_grid(), offsets, cfg, params,
            workers=workers,
        )
        write_sweep(result, self.out, metadata={'manifest': str(manifest_path), 'seed': seed,
                                                'workers': workers})
        self.print_banner("SWEEP", [
            ('Runs', str(result.run_count)),
            ('Failures', str(result.failure_count)),
            ('Samples', str(len(result.samples))),
            ('Output', str(self.out)),
        ])
        if result.failure_count == result.run_count:
            logger.error("Every sweep run failed")
            return EXIT_FAILURE
        return EXIT_OK

    # ==================== ANALYZE ====================

    def cmd_analyze(self) -> int:
        """Fit the uncertainty bound, size the invariant set and verify containment per run."""
        self.require('sweep_dir', 'gains', 'vehicle', 'out')
        params = load_vehicle(self.args.vehicle)
        gains, _ = load_controller_config(self.args.gains).to_domain()
        result = load_sweep(self.args.sweep_dir)

        nominal = check_nominal(gains)
        logger.info(f"Nominal gain condition: {'pass' if nominal else 'fail'} ({nominal.message})")

        scatter = result.samples[['run_id', 't', 'norm_Pe', 'norm_Pde', 'norm_dFA']]
        scatter.to_csv(self.out / 'scatter.csv', index=False, float_format='%.12g')
        bound = fit_uncertainty_bound(result.samples, confidence=self.args.confidence)
        bound.to_json(self.out / 'bound.json')

        inv_set = compute_invariant_set(gains, bound, params.m)
        inv_set.to_json(self.out / 'invariant_set.json')
        inv_set.boundary().to_csv(self.out / 'ellipse.csv', index=False, float_format='%.12g')

        form = canonical_form(gains)
        rows = []
        for run_id in sorted(result.logs):
            status = result.index.loc[result.index['run_id'] == run_id, 'status'].iloc[0]
            if status != 'ok':
                continue
            log = result.logs[run_id]
            report = verify_containment(log, inv_set, form)
            decrease = decrease_outside_check(log, inv_set, form)
            report.trace.to_csv(self.out / f"lyapunov_{log.label}.csv", index=False, float_format='%.12g')
            row = report.as_row()
            row.update({'run_id': run_id, 'decrease_checked': decrease.checked,
                        'decrease_violations': decrease.violations})
            rows.append(row)
        containment = pd.DataFrame(rows)
        containment.to_csv(self.out / 'containment.csv', index=False)

        passed = int(containment['passed'].sum()) if len(containment) else 0
        self.print_banner("STABILITY ANALYSIS", [
            ('Samples', str(bound.sample_count)),
            ('alpha0', f"{bound.alpha0:.4f} N"),
            ('alpha1', f"{bound.alpha1:.4f} N*s/m"),
            ('V_lim', f"{inv_set.V_lim:.4f}"),
            ('Ellipse', f"|P_e|^2/{inv_set.position_axis_sq:.4f} + |Pdot_e|^2/{inv_set.velocity_axis_sq:.4f} = 1"),
            ('Contained', f"{passed}/{len(containment)} runs"),
        ])
        return EXIT_OK

    @staticmethod
    def print_banner(title: str, rows: List[Tuple[str, str]]):
        print("=" * 80)
        print(title)
        print("=" * 80)
        for name, value in rows:
            print(f"{name + ':':<14}{value}")
        print("=" * 80)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with plan, fly, sweep and analyze verbs."""
    parser = argparse.ArgumentParser(
        description='QRBP tailsitter transition planning, simulation and stability analysis',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s plan --vehicle config/vehicle_crc20.json --mission config/missions/hff_obstacles.json --out out/hff
  %(prog)s fly --trajectory out/hff/trajectory.csv --vehicle config/vehicle_crc20.json --gains config/controller_hff.json --out out/fly
  %(prog)s sweep --manifest config/sweep_manifest.json --out out/sweep --workers 4
  %(prog)s analyze --sweep-dir out/sweep --gains config/controller_hff.json --vehicle config/vehicle_crc20.json --out out/analysis
        """
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument(
        '--log-level',
        default=os.getenv('QRBP_LOG_LEVEL', 'INFO'),
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        help='Logging level (default: INFO, or QRBP_LOG_LEVEL)'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p, gains: bool = True):
        p.add_argument('--vehicle', type=str, help='Vehicle config JSON')
        if gains:
            p.add_argument('--gains', '--controller', dest='gains', type=str, help='Controller config JSON')
        p.add_argument('--out', type=str, help='Output directory')
        p.add_argument('--seed', type=int, default=None, help='Random seed')

    plan = sub.add_parser('plan', help='Solve a minimum-time transition')
    common(plan, gains=False)
    plan.add_argument('--mission', type=str, help='Mission config JSON')
    plan.add_argument('--nodes', type=int, default=40, help='Collocation nodes (default: 40)')
    plan.add_argument('--pipeline', type=str, help='Pipeline manifest supplying unset flags')

    fly = sub.add_parser('fly', help='Fly a reference trajectory in closed loop')
    common(fly)
    fly.add_argument('--trajectory', type=str, help='Reference trajectory CSV')
    fly.add_argument('--mission', type=str, help='Mission config JSON (planned before flying)')
    fly.add_argument('--mode', type=str, default=None, choices=[m.value for m in FeedforwardMode],
                     help='Aerodynamic feedforward condition (default: optimal)')
    fly.add_argument('--duration', type=float, default=None, help='Simulated time (default: reference length)')
    fly.add_argument('--nodes', type=int, default=40, help='Collocation nodes when planning')
    fly.add_argument('--pipeline', type=str, help='Pipeline manifest supplying unset flags')

    sweep = sub.add_parser('sweep', help='Monte Carlo sweep from a manifest')
    sweep.add_argument('--manifest', type=str, help='Sweep manifest JSON')
    sweep.add_argument('--out', type=str, help='Output directory')
    sweep.add_argument('--seed', type=int, default=None, help='Override the manifest seed')
    sweep.add_argument('--workers', type=int, default=None, help='Worker processes')

    analyze = sub.add_parser('analyze', help='Fit the uncertainty bound and verify containment')
    common(analyze)
    analyze.add_argument('--sweep-dir', type=str, help='Directory written by sweep')
    analyze.add_argument('--confidence', type=float, default=0.99,
                         help='Prediction-interval confidence (default: 0.99)')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == 'analyze' and not 0.0 < args.confidence < 1.0:
        parser.error("--confidence must be in (0, 1)")

    cli = QRBPCLI(args)
    try:
        cli.apply_pipeline()
    except ConfigError as e:
        setup_logging(None, args.log_level)
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE

    setup_logging(cli.out, args.log_level)
    return cli.run()


if __name__ == '__main__':
    sys.exit(main())
