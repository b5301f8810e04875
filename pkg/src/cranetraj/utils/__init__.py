"""Utilities for crane-traj."""

from cranetraj.utils.logging_config import SolveDecisionLogger, get_logger, reset_logger

__all__ = ["SolveDecisionLogger", "get_logger", "reset_logger"]
