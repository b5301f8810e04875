"""Run configuration.

One JSON document configures a run: drive limits, power-model files, solver
tolerances, classification thresholds, the sweep grid and the output
location. The document is found by an explicit path or the
``CRANE_TRAJ_CONFIG`` environment variable, and any field can be overridden
from the environment (``CRANE_TRAJ_SOLVER__N_MAX=20``) or by CLI flags.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from cranetraj.constants import DEFAULT_LOAD_MASS, LIFTING_GEAR_LIMITS, RUNNING_GEAR_LIMITS
from cranetraj.errors import ConfigError
from cranetraj.models.kinematics import HorizontalDirection, KinematicLimits, VerticalDirection
from cranetraj.models.problem import Objective

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "CRANE_TRAJ_CONFIG"


def _limits(values: tuple[float, float, float]) -> KinematicLimits:
    v, a, j = values
    return KinematicLimits(v_max=v, a_max=a, j_max=j)


class DriveConfig(BaseModel):
    """Limits and power-model document of one drive."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    limits: KinematicLimits
    model_path: Path | None = Field(None, description="Power-model JSON; None = packaged default")


class SolverSettings(BaseModel):
    """Tolerances and budgets of the indirect optimizer."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_max: int = Field(40, ge=1, description="Largest number of grid intervals")
    patience: int = Field(3, ge=1, description="Interval counts without improvement before stopping")
    improvement_rtol: float = Field(1e-4, ge=0)
    plans_per_n: int = Field(3, ge=1, description="Plans per interval count solved after seed screening")
    refine_top_k: int = Field(2, ge=0, description="Surrogate candidates refined with the full model")
    seeds_per_plan: int = Field(3, ge=1, le=3)
    max_iterations: int = Field(200, ge=1)
    full_max_iterations: int = Field(15, ge=1, description="SLSQP iterations of a full-model refinement")
    restarts: int = Field(2, ge=0, description="SLSQP restarts after an unsuccessful exit")
    ftol: float = Field(1e-10, gt=0)
    full_fd_step: float = Field(1e-6, gt=0, description="Relative step of full-model finite differences")
    min_segment: float = Field(1e-3, gt=0, description="Shortest admissible interval [s]")
    smoothing_eps: float = Field(1.0, gt=0, description="ε of the smoothed |x| [W]")
    el_samples: int = Field(16, ge=2, description="Bound check points per EL arc")
    quadrature_panels: int = Field(6, ge=1)
    quadrature_nodes: int = Field(4, ge=2)
    max_starts: int = Field(3, ge=1, description="Most separate motion phases in one plan")
    bound_tol: float = Field(1e-6, gt=0, description="Kinematic bound violation, relative to the limit")
    continuity_tol: float = Field(1e-7, gt=0, description="Velocity and acceleration jumps [m/s, m/s²]")
    distance_rtol: float = Field(1e-8, gt=0)
    kkt_tol: float = Field(1e-5, gt=0, description="Stationarity residual with exact derivatives")
    kkt_tol_fd: float = Field(1e-3, gt=0, description="Stationarity residual with finite differences")
    active_tol: float = Field(1e-6, gt=0, description="Inequalities below this count as active")


class ClassificationSettings(BaseModel):
    """Thresholds separating the trajectory families."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dwell_min: float = Field(1e-2, gt=0, description="Shortest standstill counted as a stop [s]")
    velocity_band: float = Field(0.01, gt=0, description="Relative band around the minimal cruise velocity")
    duration_share: float = Field(0.5, gt=0, le=1)
    time_minimal_tol: float = Field(1e-3, gt=0, description="Sup-norm tolerance relative to v_max")
    samples: int = Field(10_000, ge=100)


class SweepGrid(BaseModel):
    """Distance grid of an energy map."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    s_x_min: float = Field(0.5, ge=0)
    s_x_max: float = Field(30.0, ge=0)
    s_x_step: float = Field(0.5, gt=0)
    s_y_min: float = Field(0.5, ge=0)
    s_y_max: float = Field(20.0, ge=0)
    s_y_step: float = Field(0.5, gt=0)
    vertical_direction: VerticalDirection = VerticalDirection.UP
    horizontal_direction: HorizontalDirection = HorizontalDirection.RIGHT
    objective: Objective = Objective.CONSUMPTION


class RunConfig(BaseSettings):
    """Complete configuration of a crane-traj run."""

    model_config = SettingsConfigDict(
        env_prefix="CRANE_TRAJ_",
        env_nested_delimiter="__",
        extra="forbid",
        frozen=True,
    )

    running: DriveConfig = DriveConfig(limits=_limits(RUNNING_GEAR_LIMITS))
    lifting: DriveConfig = DriveConfig(limits=_limits(LIFTING_GEAR_LIMITS))
    load_mass: float = Field(DEFAULT_LOAD_MASS, ge=0, description="Payload [kg]")
    solver: SolverSettings = SolverSettings()
    classification: ClassificationSettings = ClassificationSettings()
    sweep: SweepGrid = SweepGrid()
    output_dir: Path = Path("results")
    workers: int = Field(1, ge=1)
    seed: int = 0


def _deep_merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(path: Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Load the run configuration.

    Args:
        path: JSON document; falls back to $CRANE_TRAJ_CONFIG, then to defaults
        overrides: nested values applied on top of the document

    Raises:
        ConfigError: If the document is missing, not JSON, or invalid
    """
    if path is None and os.environ.get(CONFIG_ENV_VAR):
        path = Path(os.environ[CONFIG_ENV_VAR])

    data: dict[str, Any] = {}
    if path is not None:
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        logger.info(f"Loading run config from {path}")
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in config file {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")

    if overrides:
        data = _deep_merge(data, overrides)

    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def apply_overrides(config: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Validated copy of ``config`` with nested overrides applied."""
    if not overrides:
        return config
    try:
        return RunConfig(**_deep_merge(config.model_dump(mode="json"), overrides))
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration override: {e}") from e


def config_hash(config: RunConfig) -> str:
    """sha256 of the canonical JSON dump."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
