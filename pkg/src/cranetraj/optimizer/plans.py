"""Segment plans: the kind sequences the indirect method searches over.

A plan fixes the type of dynamics on each interval of the time grid. Plans
are generated from motifs: a move accelerates from rest with a jerk ramp
(and optionally a constant-acceleration phase), has a centre (nothing, a
cruise at v_max, or an EL arc), and brakes with the mirrored ramp. Moves
may be preceded, separated and followed by standstill.

Only symmetric moves are generated: the braking ramp has a CD_a phase if
and only if the accelerating ramp has one.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray

from cranetraj.constants import HORIZON_TIE_TOLERANCE, IDLE_DISTANCE, SEED_DWELL_SHARE, SEED_SKEW
from cranetraj.errors import DomainError, InfeasibleError
from cranetraj.kinematics import minimal_cruise_velocity, minimal_duration, scurve_phases
from cranetraj.trajectory import SegmentKind

if TYPE_CHECKING:
    from cranetraj.models.kinematics import KinematicLimits
    from cranetraj.models.power import QuadraticSurrogate
    from cranetraj.models.problem import ProblemSpec

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

SEED_VARIANTS = ("proportional", "front", "back")


@dataclass(frozen=True)
class PlanStep:
    """One interval of a plan.

    ``sign`` is the jerk sign of CD_j, the acceleration sign of CD_a, 1 for a
    cruise at v_max and 0 for standstill; it is 0 for EL.
    """

    kind: SegmentKind
    sign: int = 0

    @property
    def is_dwell(self) -> bool:
        return self.kind is SegmentKind.CD_V and self.sign == 0

    @property
    def label(self) -> str:
        if self.kind in (SegmentKind.CD_J, SegmentKind.CD_A):
            return f"{self.kind.value}{'+' if self.sign > 0 else '-'}"
        if self.kind is SegmentKind.CD_V:
            return "CD_v" if self.sign else "CD_v0"
        return "EL"


J_UP = PlanStep(SegmentKind.CD_J, 1)
J_DOWN = PlanStep(SegmentKind.CD_J, -1)
A_UP = PlanStep(SegmentKind.CD_A, 1)
A_DOWN = PlanStep(SegmentKind.CD_A, -1)
CRUISE = PlanStep(SegmentKind.CD_V, 1)
DWELL = PlanStep(SegmentKind.CD_V, 0)
EL = PlanStep(SegmentKind.EL)


class MoveCenter(str, Enum):
    NONE = "none"
    CRUISE = "cruise"
    EL = "EL"


@dataclass(frozen=True)
class Motif:
    """Generator of a plan: ``starts`` identical moves with optional standstill."""

    center: MoveCenter
    accel: bool
    starts: int = 1
    lead: bool = False
    trail: bool = False

    def move(self) -> list[PlanStep]:
        up = [J_UP, A_UP, J_DOWN] if self.accel else [J_UP, J_DOWN]
        down = [J_DOWN, A_DOWN, J_UP] if self.accel else [J_DOWN, J_UP]
        if self.center is MoveCenter.NONE:
            return up + down[1:]  # J− J− merge
        return up + [CRUISE if self.center is MoveCenter.CRUISE else EL] + down

    def steps(self) -> tuple[PlanStep, ...]:
        steps: list[PlanStep] = [DWELL] if self.lead else []
        for k in range(self.starts):
            if k:
                steps.append(DWELL)
            steps.extend(self.move())
        if self.trail:
            steps.append(DWELL)
        return tuple(steps)

    @property
    def n_dwells(self) -> int:
        return self.starts - 1 + int(self.lead) + int(self.trail)


@dataclass(frozen=True)
class SegmentPlan:
    """Ordered kinds of a trajectory's intervals.

    Decision vector layout: one duration per step, followed by (v_start,
    v_end, λ_G) of the EL arc when the plan has one.
    """

    steps: tuple[PlanStep, ...]
    motif: Motif | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.steps:
            raise DomainError("A plan needs at least one step")
        for prev, nxt in zip(self.steps, self.steps[1:]):
            if prev == nxt:
                raise DomainError(f"Adjacent identical steps must merge: {self.label}")
        if sum(step.kind is SegmentKind.EL for step in self.steps) > 1:
            raise DomainError("At most one EL arc per plan")

    @classmethod
    def from_motif(cls, motif: Motif) -> "SegmentPlan":
        return cls(motif.steps(), motif)

    @classmethod
    def dwell(cls) -> "SegmentPlan":
        return cls((DWELL,))

    @property
    def n(self) -> int:
        return len(self.steps)

    @property
    def el_index(self) -> int | None:
        for i, step in enumerate(self.steps):
            if step.kind is SegmentKind.EL:
                return i
        return None

    @property
    def has_el(self) -> bool:
        return self.el_index is not None

    @property
    def n_variables(self) -> int:
        return self.n + (3 if self.has_el else 0)

    @property
    def n_equalities(self) -> int:
        """Horizon, distance, entry conditions and the terminal state."""
        count = 2
        for i, step in enumerate(self.steps):
            if step.kind is SegmentKind.CD_A:
                count += 1
            elif step.kind is SegmentKind.CD_V and i > 0:
                count += 2
            elif step.kind is SegmentKind.EL:
                count += 2
        if not self.steps[-1].is_dwell:
            count += 2
        return count

    @property
    def is_overdetermined(self) -> bool:
        return self.n_equalities > self.n_variables

    @property
    def starts(self) -> int:
        """Number of separate motion phases."""
        count, moving = 0, False
        for step in self.steps:
            if step.is_dwell:
                moving = False
            elif not moving:
                count, moving = count + 1, True
        return count

    @property
    def label(self) -> str:
        return " ".join(step.label for step in self.steps)

    def __str__(self) -> str:
        return self.label


@lru_cache(maxsize=8)
def _catalogue(max_starts: int) -> tuple[SegmentPlan, ...]:
    plans: dict[tuple[PlanStep, ...], SegmentPlan] = {}
    for starts in range(1, max_starts + 1):
        centers = list(MoveCenter) if starts == 1 else [MoveCenter.CRUISE, MoveCenter.NONE]
        for center in centers:
            for accel in (True, False):
                for lead in (False, True):
                    for trail in (False, True):
                        motif = Motif(center, accel, starts, lead, trail)
                        steps = motif.steps()
                        plans.setdefault(steps, SegmentPlan(steps, motif))
    return tuple(plans.values())


def enumerate_plans(
    n: int, spec: "ProblemSpec | None" = None, *, max_starts: int = 3
) -> list[SegmentPlan]:
    """All plans with exactly n intervals, in deterministic order.

    n = 1 yields only standstill, the plan of a drive that does not move. With
    a spec whose distance is zero nothing else is returned.
    """
    if n < 1:
        raise DomainError(f"Interval count must be ≥ 1, got {n}")
    if n == 1:
        return [SegmentPlan.dwell()]
    if spec is not None and spec.s0 < IDLE_DISTANCE:
        return []
    return [plan for plan in _catalogue(max_starts) if plan.n == n]


# =============================================================================
# SEEDS
# =============================================================================


def _move_durations(motif: Motif, t_j: float, t_a: float, t_v: float) -> list[float]:
    up = [t_j, t_a, t_j] if motif.accel else [t_j, t_j]
    down = list(reversed(up))
    if motif.center is MoveCenter.NONE:
        return up[:-1] + [up[-1] + down[0]] + down[1:]
    return up + [t_v] + down


def _rigid_phases(
    motif: Motif, d_move: float, limits: "KinematicLimits", min_segment: float
) -> tuple[float, float, float]:
    """(T_j, T_a, T_v) of a cruise or merged move, whose phases the distance fixes.

    Raises:
        InfeasibleError: If the move cannot have the motif's shape
    """
    if motif.center is MoveCenter.CRUISE:
        t_j, t_a, t_v, _ = scurve_phases(d_move, limits)
        if t_v < min_segment:
            raise InfeasibleError(f"{d_move:.4g} m are too short to reach v_max = {limits.v_max:g} m/s")
    else:
        t_j, t_a, _, v_peak = scurve_phases(d_move, limits.with_velocity(limits.v_max * 1e3))
        if v_peak > limits.v_max * (1.0 + 1e-9):
            raise InfeasibleError(f"{d_move:.4g} m without cruise would exceed v_max = {limits.v_max:g} m/s")
        t_v = 0.0
    if (t_a >= min_segment) != motif.accel:
        shape = "reaches" if t_a >= min_segment else "does not reach"
        raise InfeasibleError(f"A move of {d_move:.4g} m {shape} a_max = {limits.a_max:g} m/s²")
    return t_j, t_a, t_v


def _dwell_shares(n_dwells: int, variant: str) -> FloatArray:
    if variant == "proportional" or n_dwells < 2:
        return np.full(n_dwells, 1.0 / max(n_dwells, 1))
    weights = np.linspace(1.0 + SEED_SKEW, 1.0 - SEED_SKEW, n_dwells)
    weights = weights if variant == "front" else weights[::-1]
    return weights / weights.sum()


def seed_decision(
    plan: SegmentPlan,
    spec: "ProblemSpec",
    surrogate: "QuadraticSurrogate",
    variant: str = "proportional",
    min_segment: float = 1e-3,
) -> FloatArray:
    """Initial decision vector (native units) for a motif plan.

    Cruise and merged moves are rigid: the distance fixes their phases, so
    they run time-minimally and the standstill intervals take up the slack.
    EL moves run at the reduced cruise velocity that fills the window left
    after giving each standstill a share of the slack, and λ_G starts at the
    value that makes that velocity stationary for the surrogate. The variants
    shift the slack between the standstill intervals (or, without any, skew
    the EL move's phases).

    Raises:
        DomainError: If the plan was not generated from a motif
        InfeasibleError: If the plan's moves cannot fit into, or fill, the horizon
    """
    if plan == SegmentPlan.dwell():
        return np.array([spec.T])
    motif = plan.motif
    if motif is None:
        raise DomainError(f"Plan {plan.label} has no motif to seed from")
    if variant not in SEED_VARIANTS:
        raise DomainError(f"Unknown seed variant {variant!r}")

    limits, T = spec.limits, spec.T
    tie = HORIZON_TIE_TOLERANCE * max(1.0, T)
    d_move = spec.s0 / motif.starts
    t_move = minimal_duration(d_move, limits)
    slack = T - motif.starts * t_move
    if slack < -tie:
        raise InfeasibleError(f"{motif.starts} moves of {d_move:.4g} m do not fit into {T:.4g} s")
    slack = max(slack, 0.0)

    extra: list[float] = []
    if motif.center is MoveCenter.EL:
        dwell_time = SEED_DWELL_SHARE * slack * motif.n_dwells
        v_c = minimal_cruise_velocity(d_move, T - dwell_time, limits)
        t_j, t_a, t_v, _ = scurve_phases(d_move, limits.with_velocity(v_c))
        lam = -(2.0 * surrogate.c20 * v_c + surrogate.c10)
        extra = [v_c, v_c, lam]
    else:
        if motif.n_dwells == 0 and slack > tie:
            raise InfeasibleError(f"{plan.label} has no standstill to take up {slack:.4g} s of slack")
        t_j, t_a, t_v = _rigid_phases(motif, d_move, limits, min_segment)

    move = _move_durations(motif, t_j, t_a, t_v)
    dwells = max(T - motif.starts * sum(move), 0.0) * _dwell_shares(motif.n_dwells, variant)

    durations: list[float] = [dwells[0]] if motif.lead else []
    k_dwell = int(motif.lead)
    for k in range(motif.starts):
        if k:
            durations.append(dwells[k_dwell])
            k_dwell += 1
        durations.extend(move)
    if motif.trail:
        durations.append(dwells[k_dwell])

    d = np.maximum(np.asarray(durations, dtype=float), min_segment)
    if motif.n_dwells == 0 and variant != "proportional":
        weights = np.linspace(1.0 + SEED_SKEW, 1.0 - SEED_SKEW, len(d))
        d = d * (weights if variant == "front" else weights[::-1])
    d = np.maximum(d * T / d.sum(), min_segment)
    return np.concatenate([d, np.asarray(extra, dtype=float)])


def collapse(plan: SegmentPlan, decision: FloatArray, index: int) -> tuple[SegmentPlan, FloatArray]:
    """Remove step ``index`` and merge its neighbours if they become identical.

    The removed duration goes to the left neighbour (the right one for the
    first step), so the decision stays consistent with the horizon.
    """
    if plan.n < 2:
        raise DomainError("Cannot collapse a single-step plan")
    durations = list(decision[: plan.n])
    extra = list(decision[plan.n :])
    steps = list(plan.steps)

    if steps[index].kind is SegmentKind.EL:
        extra = []
    freed = durations.pop(index)
    steps.pop(index)
    durations[max(index - 1, 0)] += freed

    if 0 < index < len(steps) and steps[index - 1] == steps[index]:
        durations[index - 1] += durations.pop(index)
        steps.pop(index)

    return SegmentPlan(tuple(steps)), np.asarray(durations + extra, dtype=float)
