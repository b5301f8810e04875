"""Kinematic data models: drive limits and travel requests."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Axis(str, Enum):
    """Crane axes. The running gear moves along x, the lifting gear along y."""

    X = "x"
    Y = "y"


class Drive(str, Enum):
    """The two electrical drives of a stacker crane."""

    RUNNING = "running"
    LIFTING = "lifting"

    @property
    def axis(self) -> Axis:
        return Axis.X if self is Drive.RUNNING else Axis.Y


class VerticalDirection(str, Enum):
    UP = "up"
    DOWN = "down"

    @property
    def sign(self) -> int:
        return 1 if self is VerticalDirection.UP else -1


class HorizontalDirection(str, Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def sign(self) -> int:
        return 1 if self is HorizontalDirection.RIGHT else -1


class KinematicLimits(BaseModel):
    """Velocity, acceleration and jerk bounds of one drive."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"v_max": 3.0, "a_max": 0.5, "j_max": 1.0}},
    )

    v_max: float = Field(..., gt=0, allow_inf_nan=False, description="Velocity bound [m/s]")
    a_max: float = Field(..., gt=0, allow_inf_nan=False, description="Acceleration bound [m/s²]")
    j_max: float = Field(..., gt=0, allow_inf_nan=False, description="Jerk bound [m/s³]")

    def with_velocity(self, v_max: float) -> "KinematicLimits":
        """Same limits with a reduced velocity cap."""
        return KinematicLimits(v_max=v_max, a_max=self.a_max, j_max=self.j_max)


class TravelSpec(BaseModel):
    """A single crane travel from A to B."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "s_x": 15.0,
                "s_y": 10.0,
                "vertical_direction": "up",
                "horizontal_direction": "right",
                "load_mass": 1000.0,
            }
        },
    )

    s_x: float = Field(..., ge=0, allow_inf_nan=False, description="Horizontal distance [m]")
    s_y: float = Field(..., ge=0, allow_inf_nan=False, description="Vertical distance [m]")
    vertical_direction: VerticalDirection = VerticalDirection.UP
    horizontal_direction: HorizontalDirection = HorizontalDirection.RIGHT
    load_mass: float = Field(1000.0, ge=0, allow_inf_nan=False, description="Payload [kg]")

    @model_validator(mode="after")
    def _not_both_zero(self) -> "TravelSpec":
        if self.s_x == 0 and self.s_y == 0:
            raise ValueError("A travel needs a nonzero distance on at least one axis")
        return self

    def distance(self, axis: Axis) -> float:
        return self.s_x if axis is Axis.X else self.s_y
