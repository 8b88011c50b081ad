"""
Monte Carlo Sweep
Closed-loop runs over missions x gain sets x initial-state perturbations.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from control.gains import Gains
from core.vehicle import VehicleParams
from planning.reference import ReferenceTrajectory
from simulation.engine import SimConfig, SimLog, SimulationDivergedError, run_mission

logger = logging.getLogger(__name__)

INDEX_COLUMNS = ['run_id', 'mission', 'gains', 'perturbation', 'status', 'samples', 'message', 'file']
SAMPLE_COLUMNS = ['run_id', 't', 'norm_Pe', 'norm_Pde', 'norm_dFA']


@dataclass(frozen=True)
class InitialOffset:
    """Inertial position and velocity offsets applied to a reference's initial state."""
    position: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    label: str = "nominal"


def draw_offsets(
    count: int,
    position_sigma: float,
    velocity_sigma: float,
    seed: int,
    planar: bool = True,
) -> List[InitialOffset]:
    """
    Gaussian initial-state offsets drawn from a seeded generator.

    With planar=True the lateral (x) components are zero.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    offsets = []
    for i in range(count):
        dP = rng.normal(0.0, position_sigma, 3)
        dV = rng.normal(0.0, velocity_sigma, 3)
        if planar:
            dP[0] = dV[0] = 0.0
        offsets.append(InitialOffset(tuple(dP), tuple(dV), label=f"offset_{i:02d}"))
    return offsets


@dataclass
class SweepResult:
    """
    Outcome of a sweep.

    Attributes:
        index: One row per run (INDEX_COLUMNS), ordered by run_id
        samples: Pooled (||P_e||, ||Pdot_e||, ||dF_A||) samples of completed runs
        logs: Logs by run_id; diverged runs keep their partial log
    """
    index: pd.DataFrame
    samples: pd.DataFrame
    logs: Dict[int, SimLog] = field(default_factory=dict)

    @property
    def failure_count(self) -> int:
        return int((self.index['status'] != 'ok').sum())

    @property
    def run_count(self) -> int:
        return len(self.index)


def _run_one(task: tuple) -> tuple:
    run_id, mission, traj, gains, offset, cfg, params = task
    run_cfg = replace(cfg, position_offset=offset.position, velocity_offset=offset.velocity)
    try:
        log = run_mission(traj, run_cfg, gains, params)
        return run_id, 'ok', '', log.frame
    except SimulationDivergedError as e:
        return run_id, 'diverged', str(e), e.partial_log.frame
    except (ValueError, RuntimeError) as e:
        return run_id, 'failed', f"{type(e).__name__}: {e}", None


def monte_carlo_sweep(
    missions: Sequence[Tuple[str, ReferenceTrajectory]],
    gain_grid: Sequence[Gains],
    perturbations: Sequence[InitialOffset],
    cfg: SimConfig,
    params: VehicleParams,
    workers: int = 1,
) -> SweepResult:
    """
    Fly every (mission, gains, perturbation) combination.

    Runs are numbered mission-major, then gains, then perturbation. Results
    are merged in run_id order regardless of completion order, so the output
    is independent of the worker count.

    Args:
        missions: (label, reference) pairs
        gain_grid: Gain sets
        perturbations: Initial-state offsets
        cfg: Simulation settings shared by all runs
        params: Truth-plant parameters
        workers: Process count (1 runs serially)

    Returns:
        SweepResult
    """
    if not missions or not gain_grid or not perturbations:
        raise ValueError("Sweep grids must be non-empty")

    tasks = []
    for label, traj in missions:
        for gains in gain_grid:
            for offset in perturbations:
                tasks.append((len(tasks), label, traj, gains, offset, cfg, params))
    logger.info(f"Sweep: {len(missions)} missions x {len(gain_grid)} gain sets x "
                f"{len(perturbations)} perturbations = {len(tasks)} runs, workers={workers}")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(_run_one, tasks))
    else:
        outcomes = [_run_one(task) for task in tasks]
    outcomes.sort(key=lambda outcome: outcome[0])

    rows, sample_frames, logs = [], [], {}
    for (run_id, status, message, frame), task in zip(outcomes, tasks):
        _, label, _, gains, offset, _, _ = task
        samples = 0 if frame is None else len(frame)
        rows.append({
            'run_id': run_id, 'mission': label, 'gains': gains.label,
            'perturbation': offset.label, 'status': status, 'samples': samples,
            'message': message, 'file': f"runs/run_{run_id:04d}.csv" if frame is not None else '',
        })
        if frame is None:
            logger.warning(f"Run {run_id} ({label}, {gains.label}, {offset.label}) failed: {message}")
            continue
        logs[run_id] = SimLog(frame, label=f"run_{run_id:04d}")
        if status != 'ok':
            logger.warning(f"Run {run_id} ({label}, {gains.label}, {offset.label}) {status}: {message}")
            continue
        pooled = frame[['t', 'norm_Pe', 'norm_Pde', 'norm_dFA']].copy()
        pooled.insert(0, 'run_id', run_id)
        sample_frames.append(pooled)

    index = pd.DataFrame(rows, columns=INDEX_COLUMNS)
    samples = (pd.concat(sample_frames, ignore_index=True) if sample_frames
               else pd.DataFrame(columns=SAMPLE_COLUMNS))
    result = SweepResult(index=index, samples=samples, logs=logs)
    logger.info(f"Sweep finished: {result.run_count - result.failure_count}/{result.run_count} runs "
                f"completed, {len(samples)} samples")
    return result


def write_sweep(result: SweepResult, directory, metadata: Optional[dict] = None) -> Path:
    """
    Write runs/run_XXXX.csv, index.csv and metadata.json.

    Timestamps go to metadata.json only.
    """
    directory = Path(directory)
    (directory / 'runs').mkdir(parents=True, exist_ok=True)
    for run_id, log in result.logs.items():
        log.to_csv(directory / 'runs' / f"run_{run_id:04d}.csv")
    result.index.to_csv(directory / 'index.csv', index=False)

    meta = {'written_at': datetime.now().isoformat(), 'runs': result.run_count,
            'failures': result.failure_count}
    meta.update(metadata or {})
    with open(directory / 'metadata.json', 'w') as f:
        json.dump(meta, f, indent=2, default=str)
    logger.info(f"Sweep written to {directory}")
    return directory


def load_sweep(directory) -> SweepResult:
    """Read a sweep directory written by write_sweep."""
    directory = Path(directory)
    index_path = directory / 'index.csv'
    if not index_path.exists():
        raise FileNotFoundError(f"No sweep index in {directory}")
    index = pd.read_csv(index_path, keep_default_na=False)

    logs, sample_frames = {}, []
    for _, row in index.iterrows():
        if not row['file']:
            continue
        run_id = int(row['run_id'])
        log = SimLog.from_csv(directory / row['file'])
        logs[run_id] = log
        if row['status'] == 'ok':
            pooled = log.frame[['t', 'norm_Pe', 'norm_Pde', 'norm_dFA']].copy()
            pooled.insert(0, 'run_id', run_id)
            sample_frames.append(pooled)

    samples = (pd.concat(sample_frames, ignore_index=True) if sample_frames
               else pd.DataFrame(columns=SAMPLE_COLUMNS))
    return SweepResult(index=index, samples=samples, logs=logs)
