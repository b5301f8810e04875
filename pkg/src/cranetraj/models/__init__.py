"""Data models for crane-traj."""

from cranetraj.models.kinematics import (
    Axis,
    Drive,
    HorizontalDirection,
    KinematicLimits,
    TravelSpec,
    VerticalDirection,
)
from cranetraj.models.power import FitDomain, PowerFunction, PowerModel, QuadraticSurrogate
from cranetraj.models.problem import Objective, ProblemSpec, SolveMode, SolveResult
from cranetraj.models.report import BoundCheck, Classification, EnergyReport, TrajectoryClass

__all__ = [
    "Axis",
    "BoundCheck",
    "Classification",
    "Drive",
    "EnergyReport",
    "FitDomain",
    "HorizontalDirection",
    "KinematicLimits",
    "Objective",
    "PowerFunction",
    "PowerModel",
    "ProblemSpec",
    "QuadraticSurrogate",
    "SolveMode",
    "SolveResult",
    "TrajectoryClass",
    "TravelSpec",
    "VerticalDirection",
]
