"""Power-flow evaluation for the crane drives.

ARCHITECTURE:
    PowerModel document → configure_drive (load, direction) → power(v, a)
                                                           → fit_quadratic → QuadraticSurrogate
    time-minimal Trajectory → slow_profile → SlowPowerProfile (P_slow(t))

Key Design:
- Electrical power is mechanical power divided by the motor efficiency when
  motoring and multiplied by the regenerative efficiency when braking, plus a
  standby loss and a copper loss quadratic in the tractive force
- sgn(v) is smoothed by tanh(v/v_ε) so that P is C¹ in v
- Copper losses are gated by tanh((v/v_ε)²): at standstill the holding brake
  carries the load, hence P(0, 0) equals the standby loss for both gears
- An optional blend of width ``switch_smoothing`` replaces the motor/regen
  switch for solvers that need second derivatives
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import PchipInterpolator, PPoly
from scipy.optimize import brentq

from cranetraj.constants import (
    C02_FLOOR,
    FIRST_DERIVATIVE_STEP,
    FIT_GRID_POINTS,
    GRAVITY,
    NOMINAL_SPEED_RPM,
    NOMINAL_TORQUE_NM,
    SECOND_DERIVATIVE_STEP,
    SLOW_PROFILE_SAMPLES,
)
from cranetraj.errors import DomainError
from cranetraj.models.kinematics import KinematicLimits
from cranetraj.models.power import FitDomain, PowerFunction, PowerModel, QuadraticSurrogate
from cranetraj.trajectory import Trajectory

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class SlowPowerProfile:
    """Power profile P_slow(t) of the time-minimal drive, piecewise cubic in t."""

    grid: FloatArray
    values: FloatArray
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)
    _slope: PPoly = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or len(grid) < 2 or grid.shape != values.shape:
            raise DomainError("A slow power profile needs matching 1-D grid and values")
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0.0):
            raise DomainError("Slow power profile grid must start at 0 and increase strictly")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_interp", PchipInterpolator(grid, values, extrapolate=False))
        object.__setattr__(self, "_slope", self._interp.derivative())

    @classmethod
    def constant(cls, T: float, value: float = 0.0) -> "SlowPowerProfile":
        if T <= 0:
            raise DomainError("Horizon must be positive")
        return cls(np.array([0.0, T]), np.array([value, value]))

    @property
    def T(self) -> float:
        return float(self.grid[-1])

    def __call__(self, t: ArrayLike) -> FloatArray:
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.T)
        return np.asarray(self._interp(t), dtype=float)

    def derivative(self, t: ArrayLike) -> FloatArray:
        """dP_slow/dt; zero outside [0, T] where the profile is held constant."""
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.T)
        slope = np.asarray(self._slope(np.clip(t, 0.0, self.T)), dtype=float)
        return np.where(inside, slope, 0.0)


def power(model: PowerModel, v: ArrayLike, a: ArrayLike) -> FloatArray:
    """Electrical power [W] drawn by a drive at velocity v and acceleration a."""
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    ve = model.velocity_smoothing

    force = (
        model.effective_mass * a
        + model.gravity_term
        + model.friction_coulomb * np.tanh(v / ve)
        + model.friction_viscous * v
    )
    p_mech = force * v
    motor = 1.0 / model.drivetrain_efficiency_motor
    regen = model.drivetrain_efficiency_regen

    s = model.switch_smoothing
    if s > 0.0:
        p_el = 0.5 * ((motor + regen) * p_mech + (motor - regen) * (np.sqrt(p_mech * p_mech + s * s) - s))
    else:
        p_el = np.where(p_mech >= 0.0, p_mech * motor, p_mech * regen)

    gate = np.tanh((v / ve) ** 2)
    return p_el + model.copper_loss_coeff * force * force * gate + model.standby_loss


def configure_drive(
    base: PowerModel, load_mass: float, direction_sign: int, lifting: bool
) -> PowerModel:
    """Drive model for one travel: add the payload and sign gravity by direction.

    Model documents describe the unloaded drive moving up (or right).
    """
    if direction_sign not in (-1, 1):
        raise DomainError(f"direction_sign must be ±1, got {direction_sign}")
    if load_mass < 0:
        raise DomainError(f"load_mass must be nonnegative, got {load_mass}")
    gravity = base.gravity_term
    if lifting:
        gravity = direction_sign * (base.gravity_term + load_mass * GRAVITY)
    suffix = "up" if direction_sign > 0 else "down"
    return base.model_copy(
        update={
            "name": f"{base.name}:{suffix}:{load_mass:g}kg",
            "effective_mass": base.effective_mass + load_mass,
            "gravity_term": gravity,
        }
    )


def first_partials(
    fn: PowerFunction,
    v: ArrayLike,
    a: ArrayLike,
    *,
    v_scale: float = 1.0,
    a_scale: float = 1.0,
) -> tuple[FloatArray, FloatArray]:
    """(∂P/∂v, ∂P/∂a), exact for a surrogate, central differences otherwise."""
    if isinstance(fn, QuadraticSurrogate):
        return fn.gradient(v, a)

    v, a = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(a, dtype=float))
    hv = FIRST_DERIVATIVE_STEP * v_scale
    ha = FIRST_DERIVATIVE_STEP * a_scale
    p = fn.power(np.stack([v + hv, v - hv, v, v]), np.stack([a, a, a + ha, a - ha]))
    return (p[0] - p[1]) / (2.0 * hv), (p[2] - p[3]) / (2.0 * ha)


def derivatives(
    fn: PowerFunction,
    v: ArrayLike,
    a: ArrayLike,
    *,
    v_scale: float = 1.0,
    a_scale: float = 1.0,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """(∂P/∂v, ∂²P/∂v∂a, ∂²P/∂a²) by central finite differences.

    First derivatives use steps of 1e-6 of the scale, second derivatives 1e-4,
    which keeps roundoff in the second differences below truncation error.
    """
    if isinstance(fn, QuadraticSurrogate):
        return fn.derivatives(v, a)

    v, a = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(a, dtype=float))
    h1 = FIRST_DERIVATIVE_STEP * v_scale
    hv = SECOND_DERIVATIVE_STEP * v_scale
    ha = SECOND_DERIVATIVE_STEP * a_scale

    vs = np.stack([v + h1, v - h1, v, v, v, v + hv, v + hv, v - hv, v - hv])
    as_ = np.stack([a, a, a + ha, a, a - ha, a + ha, a - ha, a + ha, a - ha])
    p = fn.power(vs, as_)

    p_v = (p[0] - p[1]) / (2.0 * h1)
    p_aa = (p[2] - 2.0 * p[3] + p[4]) / (ha * ha)
    p_va = (p[5] - p[6] - p[7] + p[8]) / (4.0 * hv * ha)
    return p_v, p_va, p_aa


def characteristic_power(fn: PowerFunction, limits: KinematicLimits) -> float:
    """Largest |P| over the admissible (v, a) box."""
    v = np.linspace(0.0, limits.v_max, FIT_GRID_POINTS)
    a = np.linspace(-limits.a_max, limits.a_max, FIT_GRID_POINTS)
    vv, aa = np.meshgrid(v, a)
    return max(float(np.max(np.abs(fn.power(vv, aa)))), 1.0)


def nominal_efficiency(model: PowerModel, mech_power: float | None = None) -> float:
    """Efficiency P_mech / P at the constant-velocity point delivering mech_power.

    Defaults to the nominal motor point 2π·n_N·M_N.
    """
    if mech_power is None:
        mech_power = 2.0 * math.pi * NOMINAL_SPEED_RPM / 60.0 * NOMINAL_TORQUE_NM
    if mech_power <= 0:
        raise DomainError("Nominal mechanical power must be positive")

    def excess(v: float) -> float:
        force = (
            model.gravity_term
            + model.friction_coulomb * math.tanh(v / model.velocity_smoothing)
            + model.friction_viscous * v
        )
        return force * v - mech_power

    v_hi = 1.0
    while excess(v_hi) <= 0.0:
        v_hi *= 2.0
        if v_hi > 1e4:
            raise DomainError(f"{model.name}: no constant-velocity point delivers {mech_power:.1f} W")
    v_nom = brentq(excess, 0.0, v_hi, xtol=1e-12)
    return mech_power / float(model.power(v_nom, 0.0))


def fit_quadratic(
    fn: PowerFunction, domain: FitDomain, n: int = FIT_GRID_POINTS
) -> QuadraticSurrogate:
    """Least-squares quadratic fit of P on an n×n grid over the domain."""
    if domain.is_degenerate:
        raise DomainError(f"Degenerate fit domain: {domain}")

    v = np.linspace(domain.v_min, domain.v_max, n)
    a = np.linspace(domain.a_min, domain.a_max, n)
    vv, aa = (g.ravel() for g in np.meshgrid(v, a))
    target = fn.power(vv, aa)

    design = np.column_stack([np.ones_like(vv), vv, aa, vv * vv, aa * aa, vv * aa])
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coef - target) ** 2)))
    c00, c10, c01, c20, c02, c11 = (float(c) for c in coef)

    a_span = domain.a_max - domain.a_min
    floor = max(C02_FLOOR, 1e-6 * float(np.ptp(target)) / (a_span * a_span))
    clamped = c02 < floor
    if clamped:
        logger.warning(f"Quadratic fit gave c02 = {c02:.3e}; clamped to {floor:.3e}")
        c02 = floor

    return QuadraticSurrogate(
        c00=c00,
        c10=c10,
        c01=c01,
        c20=c20,
        c02=c02,
        c11=c11,
        fit_domain=domain,
        fit_residual=residual,
        c02_clamped=clamped,
    )


def fit_domain_for(limits: KinematicLimits) -> FitDomain:
    """The admissible box [0, v_max] × [−a_max, a_max]."""
    return FitDomain(v_min=0.0, v_max=limits.v_max, a_min=-limits.a_max, a_max=limits.a_max)


def slow_profile(
    traj: Trajectory, model: PowerFunction, samples: int = SLOW_PROFILE_SAMPLES
) -> SlowPowerProfile:
    """Sample P(v(t), a(t)) along a trajectory, ``samples`` points per segment."""
    if traj.T <= 0.0:
        raise DomainError("slow_profile needs a trajectory with positive duration")
    grid = traj.grid
    t = np.unique(
        np.concatenate([np.linspace(t0, t1, samples + 1) for t0, t1 in zip(grid[:-1], grid[1:])])
    )
    _, v, a, _ = traj.sample(t)
    return SlowPowerProfile(t, model.power(v, a))
