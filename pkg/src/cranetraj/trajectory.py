"""Piecewise trajectories of one drive.

ARCHITECTURE:
    Segment (CD_v | CD_a | CD_j | EL) → Trajectory (non-equidistant grid) → sample / energies

A trajectory is an ordered sequence of segments on the grid
0 = t_0 < t_1 < ... < t_n = T. Constraint-dominated (CD) segments are
polynomials in local time fixed by their start state and a constant jerk;
Euler-Lagrange (EL) segments delegate to an ``ELSegmentSolution``.

Key Design:
- Frozen dataclasses, so trajectories can be shared between workers
- Vectorized sampling: one searchsorted over the grid, one polynomial pass
- Energies are evaluated exactly: zero crossings of P_slow + P are bracketed
  and located by root finding, then each sign-definite piece is integrated by
  adaptive Gauss-Legendre quadrature
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from cranetraj.constants import QUADRATURE_RTOL, ROOT_XTOL, SEGMENT_EPSILON, SIGN_SCAN_POINTS
from cranetraj.errors import DomainError
from cranetraj.models.kinematics import KinematicLimits
from cranetraj.models.power import PowerFunction
from cranetraj.models.report import BoundCheck, EnergyReport

if TYPE_CHECKING:
    from cranetraj.el_solver import ELSegmentSolution
    from cranetraj.powerflow import SlowPowerProfile

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
State = tuple[FloatArray, FloatArray, FloatArray, FloatArray]

_GL10 = np.polynomial.legendre.leggauss(10)
_GL5 = np.polynomial.legendre.leggauss(5)


class SegmentKind(str, Enum):
    """Dynamics type of a trajectory interval."""

    CD_V = "CD_v"  # velocity bound active (or standstill)
    CD_A = "CD_a"  # acceleration bound active
    CD_J = "CD_j"  # jerk bound active
    EL = "EL"  # no bound active, Euler-Lagrange dynamics


@dataclass(frozen=True)
class Segment:
    """One interval of a piecewise trajectory.

    CD segments follow v(τ) = v0 + a0·τ + jerk·τ²/2; CD_v has a0 = jerk = 0 and
    CD_a has jerk = 0. EL segments carry their arc, and v0/a0 mirror its start
    state.
    """

    kind: SegmentKind
    duration: float
    v0: float
    a0: float
    jerk: float = 0.0
    arc: "ELSegmentSolution | None" = None

    def __post_init__(self) -> None:
        if not self.duration > SEGMENT_EPSILON:
            raise DomainError(f"Segment duration must exceed {SEGMENT_EPSILON} s, got {self.duration}")
        if self.kind is SegmentKind.CD_V and self.a0 != 0.0:
            raise DomainError("CD_v segments must start with zero acceleration")
        if self.kind is not SegmentKind.CD_J and self.jerk != 0.0:
            raise DomainError(f"{self.kind.value} segments have no jerk parameter")
        if self.kind is SegmentKind.EL and self.arc is None:
            raise DomainError("EL segments need an arc")

    @classmethod
    def cruise(cls, velocity: float, duration: float) -> "Segment":
        return cls(SegmentKind.CD_V, duration, velocity, 0.0)

    @classmethod
    def slope(cls, v0: float, acceleration: float, duration: float) -> "Segment":
        return cls(SegmentKind.CD_A, duration, v0, acceleration)

    @classmethod
    def ramp(cls, v0: float, a0: float, jerk: float, duration: float) -> "Segment":
        return cls(SegmentKind.CD_J, duration, v0, a0, jerk)

    @classmethod
    def euler_lagrange(cls, arc: "ELSegmentSolution") -> "Segment":
        v0, a0 = arc.start_state
        return cls(SegmentKind.EL, arc.duration, v0, a0, 0.0, arc)

    def sample(self, tau: ArrayLike) -> State:
        """Local (x, v, a, j) at times τ ∈ [0, duration] after the segment start."""
        tau = np.asarray(tau, dtype=float)
        if self.arc is not None:
            return self.arc.sample(tau)
        j = self.jerk
        x = tau * (self.v0 + tau * (self.a0 / 2.0 + tau * j / 6.0))
        v = self.v0 + tau * (self.a0 + tau * j / 2.0)
        a = self.a0 + j * tau
        return x, v, a, np.full_like(tau, j)

    @property
    def displacement(self) -> float:
        if self.arc is not None:
            return self.arc.displacement
        d = self.duration
        return d * (self.v0 + d * (self.a0 / 2.0 + d * self.jerk / 6.0))

    @property
    def end_state(self) -> tuple[float, float]:
        """(v, a) at the end of the segment."""
        if self.arc is not None:
            return self.arc.end_state
        d = self.duration
        return self.v0 + d * (self.a0 + d * self.jerk / 2.0), self.a0 + self.jerk * d

    @property
    def label(self) -> str:
        if self.kind is SegmentKind.CD_J:
            return f"CD_j{'+' if self.jerk > 0 else '-'}"
        if self.kind is SegmentKind.CD_A:
            return f"CD_a{'+' if self.a0 > 0 else '-'}"
        if self.kind is SegmentKind.CD_V:
            return "CD_v" if self.v0 > 0 else "CD_v0"
        return "EL"


@dataclass(frozen=True)
class Trajectory:
    """Ordered segments of one drive on [0, T]."""

    segments: tuple[Segment, ...] = ()
    direction_sign: int = 1
    _starts: FloatArray = field(init=False, repr=False, compare=False)
    _offsets: FloatArray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.direction_sign not in (-1, 1):
            raise DomainError(f"direction_sign must be ±1, got {self.direction_sign}")
        durations = np.array([s.duration for s in self.segments], dtype=float)
        displacements = np.array([s.displacement for s in self.segments], dtype=float)
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "_starts", np.concatenate(([0.0], np.cumsum(durations))))
        object.__setattr__(self, "_offsets", np.concatenate(([0.0], np.cumsum(displacements))))

    # ------------------------------------------------------------------ builders

    @classmethod
    def idle(cls, direction_sign: int = 1) -> "Trajectory":
        return cls((), direction_sign)

    @classmethod
    def dwell(cls, T: float, direction_sign: int = 1) -> "Trajectory":
        if T <= SEGMENT_EPSILON:
            return cls.idle(direction_sign)
        return cls((Segment.cruise(0.0, T),), direction_sign)

    def padded(self, T: float) -> "Trajectory":
        """This trajectory followed by standstill until T."""
        slack = T - self.T
        if slack < -SEGMENT_EPSILON:
            raise DomainError(f"Cannot pad a {self.T:.6f} s trajectory to {T:.6f} s")
        if slack <= SEGMENT_EPSILON:
            return self
        return Trajectory(self.segments + (Segment.cruise(0.0, slack),), self.direction_sign)

    def delayed(self, T: float) -> "Trajectory":
        """Standstill first, then this trajectory, ending at T."""
        slack = T - self.T
        if slack < -SEGMENT_EPSILON:
            raise DomainError(f"Cannot delay a {self.T:.6f} s trajectory to {T:.6f} s")
        if slack <= SEGMENT_EPSILON:
            return self
        return Trajectory((Segment.cruise(0.0, slack),) + self.segments, self.direction_sign)

    # ---------------------------------------------------------------- properties

    @property
    def T(self) -> float:
        return float(self._starts[-1])

    @property
    def grid(self) -> FloatArray:
        return self._starts.copy()

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def has_el(self) -> bool:
        return any(s.kind is SegmentKind.EL for s in self.segments)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.segments]

    # ---------------------------------------------------------------- evaluation

    def sample(self, t: ArrayLike) -> State:
        """Vectorized (x, v, a, j) at absolute times t (clipped to [0, T])."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not self.segments:
            zeros = np.zeros_like(t)
            return zeros, zeros.copy(), zeros.copy(), zeros.copy()

        idx = np.clip(np.searchsorted(self._starts, t, side="right") - 1, 0, len(self.segments) - 1)
        tau = np.clip(t - self._starts[idx], 0.0, None)

        v0 = np.array([s.v0 for s in self.segments])[idx]
        a0 = np.array([s.a0 for s in self.segments])[idx]
        jerk = np.array([s.jerk for s in self.segments])[idx]
        x = self._offsets[idx] + tau * (v0 + tau * (a0 / 2.0 + tau * jerk / 6.0))
        v = v0 + tau * (a0 + tau * jerk / 2.0)
        a = a0 + jerk * tau
        j = jerk.copy()

        for k, segment in enumerate(self.segments):
            if segment.arc is None:
                continue
            mask = idx == k
            if not mask.any():
                continue
            xk, vk, ak, jk = segment.arc.sample(tau[mask])
            x[mask] = self._offsets[k] + xk
            v[mask] = vk
            a[mask] = ak
            j[mask] = jk
        return x, v, a, j

    def eval(self, t: float) -> tuple[float, float, float, float]:
        return evaluate(self, t)


# =============================================================================
# OPERATIONS
# =============================================================================


def evaluate(traj: Trajectory, t: float) -> tuple[float, float, float, float]:
    """(position, v, a, j) at time t ∈ [0, T]."""
    if not (-SEGMENT_EPSILON <= t <= traj.T + SEGMENT_EPSILON):
        raise DomainError(f"t = {t} outside [0, {traj.T}]")
    x, v, a, j = traj.sample(np.array([min(max(t, 0.0), traj.T)]))
    return float(x[0]), float(v[0]), float(a[0]), float(j[0])


def distance(traj: Trajectory) -> float:
    """∫ v dt: closed-form sums on CD segments, adaptive quadrature on EL arcs."""
    total = 0.0
    for segment in traj.segments:
        if segment.arc is None:
            total += segment.displacement
        else:
            arc = segment.arc
            value, _ = quad(
                lambda s: float(arc.sample(np.array([s]))[1][0]),
                0.0,
                segment.duration,
                epsrel=1e-10,
                epsabs=0.0,
                limit=200,
            )
            total += value
    return total


def energies(
    traj: Trajectory,
    model: PowerFunction,
    p_slow: "SlowPowerProfile",
    *,
    rtol: float = QUADRATURE_RTOL,
) -> EnergyReport:
    """Exact E_rec = ∫|P_slow + P| dt and E_con = ∫(P_slow + P) dt."""
    T = traj.T
    if abs(T - p_slow.T) > 1e-9 * max(1.0, T):
        raise DomainError(f"Horizon mismatch: trajectory {T:.9f} s, slow profile {p_slow.T:.9f} s")
    if T <= 0.0:
        return EnergyReport(E_rec=0.0, E_con=0.0, T=0.0, n_segments=0)

    def integrand(t: FloatArray) -> FloatArray:
        shape = np.shape(t)
        flat = np.ravel(t)
        _, v, a, _ = traj.sample(flat)
        return (p_slow(flat) + model.power(v, a)).reshape(shape)

    breaks = np.union1d(traj.grid, p_slow.grid)
    breaks = breaks[(breaks >= 0.0) & (breaks <= T)]
    lo, hi = breaks[:-1], breaks[1:]
    keep = hi - lo > 0.0
    lo, hi = lo[keep], hi[keep]

    lo, hi, scale = _split_at_roots(integrand, lo, hi)
    pieces = _adaptive_gauss(integrand, lo, hi, rtol=rtol, atol_density=rtol * scale)
    return EnergyReport(
        E_rec=float(np.sum(np.abs(pieces))),
        E_con=float(np.sum(pieces)),
        T=T,
        n_segments=traj.n_segments,
    )


def check_bounds(traj: Trajectory, limits: KinematicLimits, n: int = 10_000) -> BoundCheck:
    """Max violations of the kinematic bounds, continuity and boundary conditions."""
    if not traj.segments:
        return BoundCheck()
    t = np.union1d(np.linspace(0.0, traj.T, n), traj.grid)
    _, v, a, j = traj.sample(t)

    defects_v = [0.0]
    defects_a = [0.0]
    for prev, nxt in zip(traj.segments, traj.segments[1:]):
        v_end, a_end = prev.end_state
        defects_v.append(abs(v_end - nxt.v0))
        defects_a.append(abs(a_end - nxt.a0))

    first, last = traj.segments[0], traj.segments[-1]
    v_end, a_end = last.end_state
    boundary = max(abs(first.v0), abs(first.a0), abs(v_end), abs(a_end))

    return BoundCheck(
        velocity_violation=float(max(0.0, v.max() - limits.v_max, -v.min())),
        acceleration_violation=float(max(0.0, np.abs(a).max() - limits.a_max)),
        jerk_violation=float(max(0.0, np.abs(j).max() - limits.j_max)),
        continuity_defect_v=float(max(defects_v)),
        continuity_defect_a=float(max(defects_a)),
        boundary_defect=float(boundary),
    )


def to_dict(traj: Trajectory, sample_dt: float | None = None) -> dict[str, Any]:
    """JSON-ready representation, optionally with a dense sample table."""
    segments = []
    for segment in traj.segments:
        entry: dict[str, Any] = {
            "kind": segment.kind.value,
            "label": segment.label,
            "duration": segment.duration,
            "v0": segment.v0,
            "a0": segment.a0,
        }
        if segment.kind is SegmentKind.CD_J:
            entry["jerk"] = segment.jerk
        if segment.arc is not None:
            entry["lambda_G"] = segment.arc.lambda_G
            entry["method"] = segment.arc.method
            entry["residual"] = segment.arc.residual
            entry["v_end"], entry["a_end"] = segment.arc.end_state
        segments.append(entry)

    data: dict[str, Any] = {
        "T": traj.T,
        "direction_sign": traj.direction_sign,
        "distance": float(traj._offsets[-1]),
        "grid": traj.grid.tolist(),
        "segments": segments,
    }
    if sample_dt is not None and traj.T > 0:
        if sample_dt <= 0:
            raise DomainError("sample_dt must be positive")
        t = np.append(np.arange(0.0, traj.T, sample_dt), traj.T)
        x, v, a, j = traj.sample(t)
        data["samples"] = {
            "t": t.tolist(),
            "x": x.tolist(),
            "v": v.tolist(),
            "a": a.tolist(),
            "j": j.tolist(),
        }
    return data


# =============================================================================
# QUADRATURE HELPERS
# =============================================================================


def _split_at_roots(
    f: Any, lo: FloatArray, hi: FloatArray
) -> tuple[FloatArray, FloatArray, float]:
    """Split intervals at the sign changes of f; also return a magnitude scale of f.

    Sign changes between scan points are bracketed directly. A pair of close
    roots leaves no sign change on the scan, only a dip of |f| towards zero;
    around each such dip f is minimized towards the opposite sign, and both
    roots are bracketed from the minimizer when it crosses zero.
    """
    u = np.linspace(0.0, 1.0, SIGN_SCAN_POINTS)
    t = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    values = f(t)
    scale = float(np.mean(np.abs(values))) if values.size else 0.0

    def scalar(s: float) -> float:
        return float(f(np.array([s]))[0])

    cuts: list[float] = []
    rows, cols = np.nonzero(values[:, :-1] * values[:, 1:] < 0.0)
    for r, c in zip(rows, cols):
        cuts.append(brentq(scalar, t[r, c], t[r, c + 1], xtol=ROOT_XTOL))
    # exact zeros at interior scan points are cuts as well
    rows, cols = np.nonzero(values[:, 1:-1] == 0.0)
    cuts.extend(t[rows, cols + 1].tolist())

    left, mid, right = values[:, :-2], values[:, 1:-1], values[:, 2:]
    same_sign = (left * mid > 0.0) & (mid * right > 0.0)
    dip = (np.abs(mid) <= np.abs(left)) & (np.abs(mid) <= np.abs(right))
    shallow = np.abs(mid) <= np.maximum(np.abs(left - mid), np.abs(right - mid))
    rows, cols = np.nonzero(same_sign & dip & shallow)
    for r, c in zip(rows, cols):
        a, b = t[r, c], t[r, c + 2]
        sign = math.copysign(1.0, values[r, c + 1])
        res = minimize_scalar(
            lambda s: sign * scalar(s), bounds=(a, b), method="bounded", options={"xatol": ROOT_XTOL}
        )
        if res.fun < 0.0:
            cuts.append(brentq(scalar, a, float(res.x), xtol=ROOT_XTOL))
            cuts.append(brentq(scalar, float(res.x), b, xtol=ROOT_XTOL))

    if not cuts:
        return lo, hi, scale
    points = np.union1d(np.concatenate((lo, hi)), np.asarray(cuts))
    return points[:-1], points[1:], scale


def _adaptive_gauss(
    f: Any,
    lo: FloatArray,
    hi: FloatArray,
    *,
    rtol: float,
    atol_density: float,
    max_depth: int = 40,
) -> FloatArray:
    """Signed integrals of f over each [lo_i, hi_i] by GL10 vs GL5 bisection."""
    result = np.zeros(len(lo))
    owner = np.arange(len(lo))
    x10, w10 = _GL10
    x5, w5 = _GL5

    for _ in range(max_depth):
        if len(lo) == 0:
            break
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        i10 = half * (f(mid[:, None] + half[:, None] * x10[None, :]) @ w10)
        i5 = half * (f(mid[:, None] + half[:, None] * x5[None, :]) @ w5)
        tol = np.maximum(rtol * np.abs(i10), atol_density * (hi - lo))
        done = (np.abs(i10 - i5) <= tol) | (hi - lo < 1e-12)
        np.add.at(result, owner[done], i10[done])
        lo, hi, owner, mid = lo[~done], hi[~done], owner[~done], mid[~done]
        lo, hi = np.concatenate((lo, mid)), np.concatenate((mid, hi))
        owner = np.concatenate((owner, owner))
    else:
        if len(lo):
            logger.warning(f"Quadrature depth limit reached on {len(lo)} subintervals")
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            np.add.at(result, owner, half * (f(mid[:, None] + half[:, None] * x10[None, :]) @ w10))
    return result
