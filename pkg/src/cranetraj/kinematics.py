"""Jerk-limited time-minimal motion profiles and the shared travel horizon.

The time-minimal profile of a drive is the symmetric S-curve: a jerk ramp,
an optional constant-acceleration phase, a second jerk ramp, an optional
cruise at v_max, and the mirrored deceleration. Three cases arise:

- d ≥ d₁ = v_max(v_max/a_max + a_max/j_max): seven phases, v_max is reached
- d₂ = 2·a_max³/j_max² ≤ d < d₁: no cruise, a_max is still reached
- d < d₂ (or v_max < a_max²/j_max with d < d₁): jerk phases only

Adjacent phases with the same jerk merge into one CD_j segment.
"""

import logging
import math

from scipy.optimize import bisect, brentq

from cranetraj.constants import HORIZON_TIE_TOLERANCE, IDLE_DISTANCE, SEGMENT_EPSILON
from cranetraj.errors import DomainError
from cranetraj.models.kinematics import Axis, KinematicLimits, TravelSpec
from cranetraj.trajectory import Segment, SegmentKind, Trajectory

logger = logging.getLogger(__name__)


def _check(distance: float, limits: KinematicLimits) -> None:
    if not math.isfinite(distance) or distance <= 0.0:
        raise DomainError(f"Distance must be positive and finite, got {distance}")
    for name in ("v_max", "a_max", "j_max"):
        value = getattr(limits, name)
        if not (math.isfinite(value) and value > 0.0):
            raise DomainError(f"Invalid limit {name} = {value}")


def scurve_phases(distance: float, limits: KinematicLimits) -> tuple[float, float, float, float]:
    """(T_j, T_a, T_v, v_peak) of the symmetric time-minimal profile."""
    v, a, j = limits.v_max, limits.a_max, limits.j_max

    if v >= a * a / j:
        t_j = a / j
        t_a = v / a - a / j
    else:
        t_j = math.sqrt(v / j)
        t_a = 0.0
    d1 = v * (2.0 * t_j + t_a)
    if distance >= d1:
        return t_j, t_a, (distance - d1) / v, v

    d2 = 2.0 * a**3 / (j * j)
    if v >= a * a / j and distance >= d2:
        v_peak = 0.5 * a * (-a / j + math.sqrt(a * a / (j * j) + 4.0 * distance / a))
        return a / j, max(v_peak / a - a / j, 0.0), 0.0, v_peak

    t_j = (distance / (2.0 * j)) ** (1.0 / 3.0)
    return t_j, 0.0, 0.0, j * t_j * t_j


def minimal_duration(distance: float, limits: KinematicLimits) -> float:
    """Duration of the time-minimal profile; 0 for an idle drive."""
    if distance < IDLE_DISTANCE:
        return 0.0
    t_j, t_a, t_v, _ = scurve_phases(distance, limits)
    return 4.0 * t_j + 2.0 * t_a + t_v


def time_minimal_profile(
    distance: float, limits: KinematicLimits, direction_sign: int = 1
) -> Trajectory:
    """The jerk-limited time-minimal trajectory covering ``distance``."""
    _check(distance, limits)
    if distance < IDLE_DISTANCE:
        return Trajectory.idle(direction_sign)

    t_j, t_a, t_v, _ = scurve_phases(distance, limits)
    a, j = limits.a_max, limits.j_max
    phases: list[tuple[SegmentKind, float, float]] = [
        (SegmentKind.CD_J, t_j, j),
        (SegmentKind.CD_A, t_a, a),
        (SegmentKind.CD_J, t_j, -j),
        (SegmentKind.CD_V, t_v, 0.0),
        (SegmentKind.CD_J, t_j, -j),
        (SegmentKind.CD_A, t_a, -a),
        (SegmentKind.CD_J, t_j, j),
    ]
    return Trajectory(tuple(build_segments(phases)), direction_sign)


def build_segments(phases: list[tuple[SegmentKind, float, float]]) -> list[Segment]:
    """Chain CD phases (kind, duration, jerk or slope) from rest, merging repeats."""
    merged: list[tuple[SegmentKind, float, float]] = []
    for kind, duration, param in phases:
        if duration <= SEGMENT_EPSILON:
            continue
        if merged and merged[-1][0] is kind and merged[-1][2] == param:
            merged[-1] = (kind, merged[-1][1] + duration, param)
        else:
            merged.append((kind, duration, param))

    segments: list[Segment] = []
    v0, a0 = 0.0, 0.0
    for kind, duration, param in merged:
        if kind is SegmentKind.CD_J:
            segment = Segment.ramp(v0, a0, param, duration)
        elif kind is SegmentKind.CD_A:
            segment = Segment.slope(v0, param, duration)
        else:
            segment = Segment.cruise(v0, duration)
        segments.append(segment)
        v0, a0 = segment.end_state
    return segments


def horizon(
    spec: TravelSpec, limits_x: KinematicLimits, limits_y: KinematicLimits
) -> tuple[float, Axis]:
    """T = max(T_x, T_y) and the axis attaining it (ties go to x)."""
    t_x = minimal_duration(spec.s_x, limits_x)
    t_y = minimal_duration(spec.s_y, limits_y)
    if abs(t_x - t_y) <= HORIZON_TIE_TOLERANCE or t_x > t_y:
        return max(t_x, t_y), Axis.X
    return t_y, Axis.Y


def is_tie(spec: TravelSpec, limits_x: KinematicLimits, limits_y: KinematicLimits) -> bool:
    t_x = minimal_duration(spec.s_x, limits_x)
    t_y = minimal_duration(spec.s_y, limits_y)
    return abs(t_x - t_y) <= HORIZON_TIE_TOLERANCE


def distance_for_duration(T: float, limits: KinematicLimits, xtol: float = 1e-6) -> float:
    """Largest distance a drive covers time-minimally within T, by bisection."""
    if T <= 0.0:
        return 0.0
    hi = limits.v_max * T
    if minimal_duration(hi, limits) <= T:
        return hi
    return bisect(lambda d: minimal_duration(d, limits) - T, 0.0, hi, xtol=xtol)


def minimal_cruise_velocity(distance: float, T: float, limits: KinematicLimits) -> float:
    """Smallest velocity cap for which the S-curve still finishes within T."""
    if distance < IDLE_DISTANCE:
        return 0.0
    if minimal_duration(distance, limits) >= T - HORIZON_TIE_TOLERANCE:
        return limits.v_max
    lo = distance / T
    return brentq(
        lambda v: minimal_duration(distance, limits.with_velocity(v)) - T,
        lo,
        limits.v_max,
        xtol=1e-12,
    )
