"""Configuration module for crane-traj."""

from cranetraj.config.models import load_power_model
from cranetraj.config.settings import (
    ClassificationSettings,
    DriveConfig,
    RunConfig,
    SolverSettings,
    SweepGrid,
    apply_overrides,
    config_hash,
    load_run_config,
)

__all__ = [
    "ClassificationSettings",
    "DriveConfig",
    "RunConfig",
    "SolverSettings",
    "SweepGrid",
    "apply_overrides",
    "config_hash",
    "load_power_model",
    "load_run_config",
]
