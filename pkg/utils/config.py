"""
Configuration Files
Validated JSON schemas for vehicles, controllers, missions and sweeps.

Every file carries "schema_version": 1. Schemas convert to the immutable
domain objects with to_domain().
"""

import json
import logging
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from control.cascade import ControllerRates
from control.gains import Gains
from core.vehicle import AeroFit, VehicleParams
from planning.mission import MissionSpec, Obstacle, PlanarState, TerminalState
from planning.planner import FeedforwardMode

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

Vector3 = Tuple[float, float, float]
PositiveFloat = Annotated[float, Field(gt=0)]
Diagonal = Union[PositiveFloat, Tuple[PositiveFloat, PositiveFloat, PositiveFloat]]

ModelT = TypeVar('ModelT', bound='VersionedConfig')


class ConfigError(ValueError):
    """Raised when a configuration file is missing, malformed or of the wrong version."""


class VersionedConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    schema_version: int = SCHEMA_VERSION

    @field_validator('schema_version')
    @classmethod
    def _known_version(cls, v: int) -> int:
        if v != SCHEMA_VERSION:
            raise ValueError(f"Unsupported schema_version {v} (expected {SCHEMA_VERSION})")
        return v


class AeroFitConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    a0: float
    a1: float
    a2: float
    a3: float
    a4: float
    b0: float
    b1: float

    def to_domain(self) -> AeroFit:
        return AeroFit(**self.model_dump())


class VehicleConfig(VersionedConfig):
    """Airframe constants; see VehicleParams for units."""
    name: str = "vehicle"
    m: float = Field(gt=0)
    Ixx: float = Field(gt=0)
    Iyy: float = Field(gt=0)
    Izz: float = Field(gt=0)
    R: float = Field(gt=0)
    C_T: float = Field(gt=0)
    C_Q: float = Field(gt=0)
    d_L: float = Field(gt=0)
    d_N: float = Field(gt=0)
    S_w: float = Field(ge=0)
    S_f: float = Field(ge=0)
    S_y: float = Field(ge=0)
    r_AC: Vector3 = (0.0, 0.0, 0.0)
    rho: float = Field(default=1.225, gt=0)
    g: float = Field(default=9.81, gt=0)
    T_max: float = Field(default=200.0, gt=0)
    side_force_slope: float = 0.0
    aero_fit: Optional[AeroFitConfig] = None

    def to_domain(self) -> VehicleParams:
        data = self.model_dump(exclude={'schema_version', 'aero_fit'})
        fit = self.aero_fit.to_domain() if self.aero_fit else AeroFit.ideal()
        return VehicleParams(aero_fit=fit, **data)


class GainsConfig(BaseModel):
    """Explicit diagonals, or a natural frequency and damping ratio."""
    model_config = ConfigDict(extra='forbid', frozen=True)

    label: Optional[str] = None
    K_PX: Optional[Diagonal] = None
    K_DX: Optional[Diagonal] = None
    omega_n: Optional[float] = Field(default=None, gt=0)
    zeta: Optional[float] = Field(default=None, gt=0)
    kappa_P: Optional[Diagonal] = None
    kappa_D: Optional[Diagonal] = None
    inner_omega_n: float = Field(default=15.0, gt=0)
    inner_zeta: float = Field(default=0.8, gt=0)

    @model_validator(mode='after')
    def _one_form(self) -> 'GainsConfig':
        explicit = self.K_PX is not None and self.K_DX is not None
        natural = self.omega_n is not None and self.zeta is not None
        if explicit == natural:
            raise ValueError("Give either K_PX and K_DX, or omega_n and zeta")
        self.to_domain()
        return self

    def to_domain(self) -> Gains:
        if self.omega_n is not None:
            gains = Gains.from_natural_frequency(
                self.omega_n, self.zeta, self.inner_omega_n, self.inner_zeta, label=self.label
            )
        else:
            gains = Gains(
                K_PX=self.K_PX,
                K_DX=self.K_DX,
                kappa_P=self.inner_omega_n ** 2,
                kappa_D=2.0 * self.inner_zeta * self.inner_omega_n,
                label=self.label or "gains",
            )
        if self.kappa_P is not None or self.kappa_D is not None:
            gains = Gains(
                K_PX=gains.K_PX,
                K_DX=gains.K_DX,
                kappa_P=gains.kappa_P if self.kappa_P is None else self.kappa_P,
                kappa_D=gains.kappa_D if self.kappa_D is None else self.kappa_D,
                label=gains.label,
            )
        return gains


class ControllerConfig(VersionedConfig):
    """Gains plus loop rates, the attitude-reference filter and the divergence envelope."""
    gains: GainsConfig
    outer_hz: float = Field(default=100.0, gt=0)
    inner_hz: float = Field(default=500.0, gt=0)
    filter_cutoff: Optional[float] = Field(default=None, gt=0)
    divergence_limit: float = Field(default=100.0, gt=0)

    @model_validator(mode='after')
    def _valid_rates(self) -> 'ControllerConfig':
        self.to_domain()
        return self

    def to_domain(self) -> Tuple[Gains, ControllerRates]:
        rates = (ControllerRates(self.outer_hz, self.inner_hz) if self.filter_cutoff is None
                 else ControllerRates(self.outer_hz, self.inner_hz, self.filter_cutoff))
        return self.gains.to_domain(), rates


class PlanarStateConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    x: float
    z: float
    V_i: float
    gamma: float


class TerminalStateConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    x: Optional[float] = None
    z: Optional[float] = None
    V_i: Optional[float] = None
    gamma: Optional[float] = None


class ObstacleConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    x: float
    z: float
    radius: float = Field(gt=0)
    margin: float = Field(default=0.0, ge=0)


class MissionConfig(VersionedConfig):
    """Boundary states in SI units; angles in degrees when angles_in_degrees is set."""
    name: str
    initial: PlanarStateConfig
    terminal: TerminalStateConfig
    obstacles: List[ObstacleConfig] = Field(default_factory=list)
    x_bounds: Tuple[float, float] = (-1e6, 1e6)
    z_bounds: Tuple[float, float] = (-1e6, 1e6)
    altitude_equality: bool = False
    v_max: float = Field(default=30.0, gt=0)
    v_min: float = Field(default=0.1, gt=0)
    angles_in_degrees: bool = False

    def to_domain(self) -> MissionSpec:
        scale = np.pi / 180.0 if self.angles_in_degrees else 1.0
        init = self.initial
        term = self.terminal
        return MissionSpec(
            name=self.name,
            initial=PlanarState(x=init.x, z=init.z, V_i=init.V_i, gamma=init.gamma * scale),
            terminal=TerminalState(
                x=term.x, z=term.z, V_i=term.V_i,
                gamma=None if term.gamma is None else term.gamma * scale,
            ),
            obstacles=tuple(Obstacle(**o.model_dump()) for o in self.obstacles),
            x_bounds=self.x_bounds,
            z_bounds=self.z_bounds,
            altitude_equality=self.altitude_equality,
            v_max=self.v_max,
            v_min=self.v_min,
        )


class SweepMissionEntry(BaseModel):
    """A sweep mission: a planned trajectory CSV, a mission file to plan, or a hover hold."""
    model_config = ConfigDict(extra='forbid', frozen=True)

    label: str
    trajectory: Optional[str] = None
    mission: Optional[str] = None
    hover: Optional[Vector3] = None

    @model_validator(mode='after')
    def _one_source(self) -> 'SweepMissionEntry':
        if sum(v is not None for v in (self.trajectory, self.mission, self.hover)) != 1:
            raise ValueError(f"Mission '{self.label}' needs exactly one of trajectory, mission, hover")
        return self


class PerturbationConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    count: int = Field(default=4, ge=1)
    position_sigma: float = Field(default=1.0, ge=0)
    velocity_sigma: float = Field(default=0.5, ge=0)
    planar: bool = True
    include_nominal: bool = True


class SweepManifest(VersionedConfig):
    """Missions x gain sets x initial-state perturbations; paths relative to the manifest."""
    vehicle: str
    missions: List[SweepMissionEntry] = Field(min_length=1)
    gains: List[GainsConfig] = Field(min_length=1)
    perturbations: PerturbationConfig = Field(default_factory=PerturbationConfig)
    mode: Literal['none', 'optimal', 'perturbed'] = 'optimal'
    duration: float = Field(default=10.0, gt=0)
    dt_plant: float = Field(default=1e-3, gt=0)
    nodes: int = Field(default=40, ge=10)
    seed: int = 0
    workers: int = Field(default=1, ge=1)

    @property
    def feedforward_mode(self) -> FeedforwardMode:
        return FeedforwardMode(self.mode)

    def gain_grid(self) -> List[Gains]:
        return [g.to_domain() for g in self.gains]


class PipelineManifest(VersionedConfig):
    """One reproducible plan-and-fly pipeline."""
    vehicle: str
    mission: str
    gains: str
    mode: Literal['none', 'optimal', 'perturbed'] = 'optimal'
    out: str = 'output'
    seed: int = 0

    def resolve(self, base: Path) -> 'PipelineManifest':
        """Copy with file paths made relative to base and checked for existence."""
        paths = {}
        for key in ('vehicle', 'mission', 'gains'):
            path = resolve_path(base, getattr(self, key))
            if not path.exists():
                raise ConfigError(f"{key} file not found: {path}")
            paths[key] = str(path)
        return self.model_copy(update=paths)


def resolve_path(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else Path(base) / path


def _load(path, model: Type[ModelT]) -> ModelT:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    try:
        config = model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e
    logger.info(f"{model.__name__} loaded from {path}")
    return config


def _to_domain(config, path):
    try:
        return config.to_domain()
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e


def load_vehicle(path) -> VehicleParams:
    return _to_domain(_load(path, VehicleConfig), path)


def load_controller_config(path) -> ControllerConfig:
    return _load(path, ControllerConfig)


def load_mission_config(path) -> MissionSpec:
    return _to_domain(_load(path, MissionConfig), path)


def load_sweep_manifest(path) -> SweepManifest:
    return _load(path, SweepManifest)


def load_pipeline_manifest(path) -> PipelineManifest:
    path = Path(path)
    return _load(path, PipelineManifest).resolve(path.parent)
