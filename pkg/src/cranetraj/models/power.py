"""Power-flow models of the crane drives.

Two kinds of power functions P(v, a) are used throughout the package:

- ``PowerModel``: the parameterized drive model (mechanical power divided or
  multiplied by drivetrain efficiency, plus standby and force-quadratic losses).
- ``QuadraticSurrogate``: a least-squares quadratic fit of a PowerModel, for
  which the Euler-Lagrange equation has a closed-form solution.

Both are vectorized over numpy arrays and satisfy the ``PowerFunction``
protocol, so solvers accept either one.

Sign convention: positive power is drawn from the grid, negative power is fed
back. Velocities are nonnegative magnitudes; the travel direction enters only
through the sign of ``gravity_term``.
"""

from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from cranetraj.constants import VELOCITY_SMOOTHING


@runtime_checkable
class PowerFunction(Protocol):
    """Anything that maps (v, a) arrays to electrical power [W]."""

    def power(self, v: ArrayLike, a: ArrayLike) -> NDArray[np.float64]: ...


class PowerModel(BaseModel):
    """Parameterized drive power model."""

    model_config = ConfigDict(frozen=True)

    name: str = "custom"
    effective_mass: float = Field(..., gt=0, description="Vehicle or cabin mass plus load [kg]")
    gravity_term: float = Field(0.0, description="Signed gravity force [N]")
    friction_coulomb: float = Field(0.0, ge=0, description="Coulomb friction [N]")
    friction_viscous: float = Field(0.0, ge=0, description="Viscous friction [N·s/m]")
    drivetrain_efficiency_motor: float = Field(1.0, gt=0, le=1)
    drivetrain_efficiency_regen: float = Field(1.0, gt=0, le=1)
    standby_loss: float = Field(0.0, ge=0, description="Idle consumption [W]")
    copper_loss_coeff: float = Field(0.0, ge=0, description="Loss per squared force [W/N²]")
    switch_smoothing: float = Field(
        0.0, ge=0, description="Width of the motor/regen blend [W], 0 = exact switch"
    )
    velocity_smoothing: float = Field(VELOCITY_SMOOTHING, gt=0, description="v_ε for sgn(v) [m/s]")

    def power(self, v: ArrayLike, a: ArrayLike) -> NDArray[np.float64]:
        from cranetraj.powerflow import power

        return power(self, v, a)


class FitDomain(BaseModel):
    """Rectangle in (v, a) space on which a surrogate is fitted."""

    model_config = ConfigDict(frozen=True)

    v_min: float
    v_max: float
    a_min: float
    a_max: float

    @property
    def is_degenerate(self) -> bool:
        return not (self.v_max > self.v_min and self.a_max > self.a_min)


class QuadraticSurrogate(BaseModel):
    """P̃(v, a) = c00 + c10·v + c01·a + c20·v² + c02·a² + c11·v·a."""

    model_config = ConfigDict(frozen=True)

    c00: float
    c10: float
    c01: float
    c20: float
    c02: float
    c11: float
    fit_domain: FitDomain
    fit_residual: float = Field(0.0, ge=0, description="RMS fit residual [W]")
    c02_clamped: bool = False

    def power(self, v: ArrayLike, a: ArrayLike) -> NDArray[np.float64]:
        v = np.asarray(v, dtype=float)
        a = np.asarray(a, dtype=float)
        return (
            self.c00
            + self.c10 * v
            + self.c01 * a
            + self.c20 * v * v
            + self.c02 * a * a
            + self.c11 * v * a
        )

    def gradient(self, v: ArrayLike, a: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Exact (∂P/∂v, ∂P/∂a)."""
        v = np.asarray(v, dtype=float)
        a = np.asarray(a, dtype=float)
        return self.c10 + 2.0 * self.c20 * v + self.c11 * a, self.c01 + 2.0 * self.c02 * a + self.c11 * v

    def derivatives(
        self, v: ArrayLike, a: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """Exact (∂P/∂v, ∂²P/∂v∂a, ∂²P/∂a²)."""
        v = np.asarray(v, dtype=float)
        a = np.asarray(a, dtype=float)
        p_v = self.c10 + 2.0 * self.c20 * v + self.c11 * a
        p_va = np.full(np.broadcast(v, a).shape, self.c11)
        p_aa = np.full(np.broadcast(v, a).shape, 2.0 * self.c02)
        return p_v, p_va, p_aa

    @property
    def coefficients(self) -> tuple[float, float, float, float, float, float]:
        return (self.c00, self.c10, self.c01, self.c20, self.c02, self.c11)
