"""Energy maps: one optimized travel per (s_x, s_y) cell.

ARCHITECTURE:
    TravelSpec → build_problem → ProblemSpec (slow drive time-minimal, P_slow fixed)
               → optimize + baseline → classify → MapCell
    SweepSpec  → SweepEngine (concurrent cells) → CSV rows + SweepSummary

Key Design:
- The drive with the longer time-minimal duration sets the horizon and moves
  time-minimally; the other one is optimized. Ties go to the running gear
- A cell never raises: failures are recorded in its ``error`` field
- Summary statistics use converged cells only
"""

import asyncio
import json
import logging
from collections import Counter, defaultdict
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray

from cranetraj import __version__
from cranetraj.config.models import load_power_model
from cranetraj.config.settings import ClassificationSettings
from cranetraj.constants import IDLE_DISTANCE
from cranetraj.errors import DomainError
from cranetraj.kinematics import (
    distance_for_duration,
    horizon,
    minimal_cruise_velocity,
    minimal_duration,
    time_minimal_profile,
)
from cranetraj.models.energymap import CellTask, CurvePoints, MapCell, SweepSpec, SweepSummary
from cranetraj.models.kinematics import Axis, Drive, KinematicLimits, TravelSpec
from cranetraj.models.problem import Objective, ProblemSpec, SolveResult
from cranetraj.models.report import Classification, TrajectoryClass
from cranetraj.optimizer import baseline, optimize
from cranetraj.powerflow import configure_drive, slow_profile
from cranetraj.trajectory import Trajectory, to_dict

if TYPE_CHECKING:
    from cranetraj.config.settings import RunConfig

logger = logging.getLogger(__name__)

__all__ = [
    "build_problem",
    "classify",
    "dominance_boundary",
    "econ_sign_boundary",
    "minimal_cruise_velocity",
    "saving_rate",
    "solve_cell",
    "summarize",
    "sweep",
]


def build_problem(
    travel: TravelSpec, config: "RunConfig | SweepSpec", objective: Objective
) -> tuple[ProblemSpec, Trajectory, Axis]:
    """Problem of the drive that is not time-critical.

    Returns:
        (problem, trajectory of the time-critical drive padded to T, its axis)
    """
    limits = {Axis.X: config.running.limits, Axis.Y: config.lifting.limits}
    T, slow_axis = horizon(travel, limits[Axis.X], limits[Axis.Y])
    if T <= 0.0:
        raise DomainError(f"Travel ({travel.s_x:g} m, {travel.s_y:g} m) is below the idle threshold")

    signs = {Axis.X: travel.horizontal_direction.sign, Axis.Y: travel.vertical_direction.sign}
    models = {
        Axis.X: configure_drive(
            load_power_model(config.running.model_path, Drive.RUNNING),
            travel.load_mass,
            signs[Axis.X],
            lifting=False,
        ),
        Axis.Y: configure_drive(
            load_power_model(config.lifting.model_path, Drive.LIFTING),
            travel.load_mass,
            signs[Axis.Y],
            lifting=True,
        ),
    }
    fast_axis = Axis.Y if slow_axis is Axis.X else Axis.X

    slow = time_minimal_profile(travel.distance(slow_axis), limits[slow_axis], signs[slow_axis]).padded(T)
    problem = ProblemSpec(
        objective=objective,
        s0=travel.distance(fast_axis),
        T=T,
        limits=limits[fast_axis],
        model=models[fast_axis],
        p_slow=slow_profile(slow, models[slow_axis]),
        direction_sign=signs[fast_axis],
        optimized_axis=fast_axis,
    )
    return problem, slow, slow_axis


# =============================================================================
# CLASSIFICATION
# =============================================================================


def _runs(mask: NDArray[np.bool_]) -> list[tuple[int, int]]:
    """Inclusive index ranges of the True runs of a boolean array."""
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), stops.tolist()))


def classify(
    result: SolveResult, spec: ProblemSpec, settings: ClassificationSettings | None = None
) -> Classification:
    """Trajectory family of an optimized travel.

    Checked in order: unconverged → unknown; interior standstill →
    multi_start(k); equal to the time-minimal profile (padded or delayed) →
    time_minimal_both; standstill over most of T → dwell_max; holding the
    minimal constant velocity over most of T → const_min_velocity; otherwise
    CD_EL_CD or all_CD by presence of an EL interval.
    """
    settings = settings or ClassificationSettings()
    if not result.converged:
        return Classification(kind=TrajectoryClass.UNKNOWN)

    traj = result.traj
    T, v_max = spec.T, spec.limits.v_max
    t = np.linspace(0.0, T, settings.samples)
    _, v, _, _ = traj.sample(t)

    still = _runs(v <= 1e-6 * v_max)
    interior = [
        (i, j) for i, j in still if i > 0 and j < len(t) - 1 and t[j] - t[i] >= settings.dwell_min
    ]
    if spec.s0 >= IDLE_DISTANCE and interior:
        return Classification(kind=TrajectoryClass.MULTI_START, starts=len(interior) + 1)

    if spec.s0 < IDLE_DISTANCE:
        references = [Trajectory.dwell(T, spec.direction_sign)]
    else:
        profile = time_minimal_profile(spec.s0, spec.limits, spec.direction_sign)
        references = [profile.padded(T), profile.delayed(T)]
    for reference in references:
        _, v_ref, _, _ = reference.sample(t)
        if np.max(np.abs(v - v_ref)) <= settings.time_minimal_tol * v_max:
            return Classification(kind=TrajectoryClass.TIME_MINIMAL_BOTH)

    share = settings.duration_share * T
    if any(t[j] - t[i] >= share for i, j in still):
        return Classification(kind=TrajectoryClass.DWELL_MAX)

    v_min = minimal_cruise_velocity(spec.s0, T, spec.limits)
    band = _runs(np.abs(v - v_min) <= settings.velocity_band * v_min)
    if any(t[j] - t[i] >= share for i, j in band):
        return Classification(kind=TrajectoryClass.CONST_MIN_VELOCITY)

    return Classification(kind=TrajectoryClass.CD_EL_CD if traj.has_el else TrajectoryClass.ALL_CD)


def saving_rate(E_base: float, E_opt: float) -> float:
    """(E_base − E_opt)/|E_base|; 0 when the baseline needs no energy."""
    if E_base == 0.0:
        return 0.0
    return (E_base - E_opt) / abs(E_base)


# =============================================================================
# BOUNDARIES
# =============================================================================


def dominance_boundary(
    limits_x: KinematicLimits, limits_y: KinematicLimits, s_y_values: list[float]
) -> list[tuple[float, float]]:
    """(s_x, s_y) points where both drives need the same time-minimal duration."""
    points = []
    for s_y in s_y_values:
        T = minimal_duration(s_y, limits_y)
        points.append((distance_for_duration(T, limits_x, xtol=1e-6), s_y))
    return points


def econ_sign_boundary(cells: list[MapCell]) -> list[tuple[float, float]]:
    """First E_con sign change along s_y in each s_x column, linearly interpolated."""
    columns: dict[float, list[MapCell]] = defaultdict(list)
    for cell in cells:
        if cell.converged and cell.E_con is not None:
            columns[cell.s_x].append(cell)

    points = []
    for s_x in sorted(columns):
        column = sorted(columns[s_x], key=lambda c: c.s_y)
        for lower, upper in zip(column, column[1:]):
            e0, e1 = lower.E_con, upper.E_con
            assert e0 is not None and e1 is not None
            if e0 == 0.0:
                points.append((s_x, lower.s_y))
                break
            if e0 * e1 < 0.0:
                points.append((s_x, lower.s_y + (upper.s_y - lower.s_y) * e0 / (e0 - e1)))
                break
    return points


# =============================================================================
# CELLS AND SWEEPS
# =============================================================================


def solve_cell(task: CellTask) -> MapCell:
    """Optimize one cell; every failure is captured in the returned cell."""
    spec = task.sweep
    header = {
        "s_x": task.s_x,
        "s_y": task.s_y,
        "direction": spec.vertical_direction,
        "objective": spec.objective,
    }
    try:
        travel = TravelSpec(
            s_x=task.s_x,
            s_y=task.s_y,
            vertical_direction=spec.vertical_direction,
            horizontal_direction=spec.horizontal_direction,
            load_mass=spec.load_mass,
        )
        problem, _, slow_axis = build_problem(travel, spec, spec.objective)
        base = baseline(problem)
        result = optimize(problem, spec.solver)
        classification = classify(result, problem, spec.classification)
    except Exception as e:  # noqa: BLE001  a failing cell must not abort the sweep
        logger.warning(f"Cell ({task.s_x:g}, {task.s_y:g}) failed: {type(e).__name__}: {e}")
        return MapCell(**header, error=f"{type(e).__name__}: {e}")

    if task.dump_path is not None:
        task.dump_path.parent.mkdir(parents=True, exist_ok=True)
        with open(task.dump_path, "w") as f:
            json.dump(to_dict(result.traj, task.dump_dt), f)

    return MapCell(
        **header,
        dominant_axis=slow_axis,
        T=problem.T,
        E_opt=result.objective_value,
        E_base=base.objective_value,
        saving_rate=saving_rate(base.objective_value, result.objective_value),
        classification=classification.label,
        n_segments=result.n_intervals,
        converged=result.converged,
        E_rec=result.report.E_rec,
        E_con=result.report.E_con,
        evaluations=result.evaluations,
        surrogate_s=result.surrogate_s,
    )


def summarize(
    cells: list[MapCell],
    spec: SweepSpec,
    config_hash: str = "",
    elapsed_s: float = 0.0,
) -> SweepSummary:
    """Means, class counts and boundary curves over the converged cells."""
    converged = [c for c in cells if c.converged]
    failed = [c for c in cells if c.error is not None]
    rates = [c.saving_rate for c in converged]

    dominance = dominance_boundary(spec.running.limits, spec.lifting.limits, spec.s_y_values())
    econ = econ_sign_boundary(cells) if spec.objective is Objective.CONSUMPTION else []

    return SweepSummary(
        direction=spec.vertical_direction,
        objective=spec.objective,
        n_cells=len(cells),
        n_converged=len(converged),
        n_unconverged=len(cells) - len(converged) - len(failed),
        n_failed=len(failed),
        mean_E_rec_J=SweepSummary._mean([c.E_rec for c in converged if c.E_rec is not None]),
        mean_E_con_J=SweepSummary._mean([c.E_con for c in converged if c.E_con is not None]),
        mean_E_opt_J=SweepSummary._mean([c.E_opt for c in converged]),
        mean_saving_rate=SweepSummary._mean(rates),
        min_saving_rate=min(rates) if rates else None,
        classification_counts=dict(sorted(Counter(c.classification for c in converged).items())),
        dominance_curve=CurvePoints.from_pairs(dominance),
        econ_sign_curve=CurvePoints.from_pairs(econ),
        config_hash=config_hash,
        version=__version__,
        elapsed_s=elapsed_s,
        cells_per_second=len(cells) / elapsed_s if elapsed_s > 0 else 0.0,
        evaluations=sum(c.evaluations for c in cells),
        surrogate_s=sum(c.surrogate_s for c in cells),
    )


def sweep(
    spec: SweepSpec,
    *,
    workers: int = 1,
    out_dir: Path | None = None,
    resume: bool = False,
    config_hash: str = "",
) -> tuple[list[MapCell], SweepSummary]:
    """Solve every cell of the grid; cells are ordered by (s_x, s_y)."""
    from cranetraj.engine import SweepEngine

    engine = SweepEngine(max_concurrent=workers)
    return asyncio.run(engine.run(spec, out_dir=out_dir, resume=resume, config_hash=config_hash))
