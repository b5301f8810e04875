"""Energy reports and trajectory classifications."""

import re
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class TrajectoryClass(str, Enum):
    """Families of optimized trajectories observed in energy maps."""

    TIME_MINIMAL_BOTH = "time_minimal_both"
    ALL_CD = "all_CD"
    CD_EL_CD = "CD_EL_CD"
    CONST_MIN_VELOCITY = "const_min_velocity"
    MULTI_START = "multi_start"
    DWELL_MAX = "dwell_max"
    UNKNOWN = "unknown"


class Classification(BaseModel):
    """A trajectory family, with the number of starts for multi-start motion."""

    model_config = ConfigDict(frozen=True)

    kind: TrajectoryClass
    starts: int = Field(1, ge=1)

    @property
    def label(self) -> str:
        if self.kind is TrajectoryClass.MULTI_START:
            return f"multi_start({self.starts})"
        return self.kind.value

    @classmethod
    def from_label(cls, label: str) -> "Classification":
        match = re.fullmatch(r"multi_start\((\d+)\)", label)
        if match:
            return cls(kind=TrajectoryClass.MULTI_START, starts=int(match.group(1)))
        return cls(kind=TrajectoryClass(label))

    def __str__(self) -> str:
        return self.label


class EnergyReport(BaseModel):
    """Exact energy integrals of one travel.

    ``E_rec`` is the energy that is not recuperated, the integral of
    |P_slow + P|. ``E_con`` is the net grid energy, the integral of
    P_slow + P, and may be negative.
    """

    E_rec: float = Field(..., ge=0, description="Non-recuperated energy [J]")
    E_con: float = Field(..., description="Net consumed energy [J]")
    T: float = Field(..., ge=0, description="Horizon [s]")
    n_segments: int = Field(..., ge=0)
    classification: Classification | None = None


class BoundCheck(BaseModel):
    """Pointwise constraint and continuity check of a trajectory."""

    velocity_violation: float = 0.0
    acceleration_violation: float = 0.0
    jerk_violation: float = 0.0
    continuity_defect_v: float = 0.0
    continuity_defect_a: float = 0.0
    boundary_defect: float = 0.0

    @property
    def max_bound_violation(self) -> float:
        return max(self.velocity_violation, self.acceleration_violation, self.jerk_violation)

    @property
    def max_continuity_defect(self) -> float:
        return max(self.continuity_defect_v, self.continuity_defect_a)

    def ok(self, bound_tol: float = 1e-6, continuity_tol: float = 1e-7) -> bool:
        return (
            self.max_bound_violation <= bound_tol
            and self.max_continuity_defect <= continuity_tol
            and self.boundary_defect <= continuity_tol
        )
