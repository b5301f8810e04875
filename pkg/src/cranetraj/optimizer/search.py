"""Outer iteration of the indirect method.

For n = 3, 4, ... the plans with n intervals are ranked by the surrogate
objective of their seeds, and the best few are solved with the quadratic
surrogate from a few deterministic seeds. Plans whose moves cannot fill the
horizon drop out before any solve. The best candidates are refined
with the full power model, warm-started from their surrogate solution.
The search stops once ``patience`` consecutive interval counts bring no
relative improvement, or at n_max. The time-minimal baseline always takes
part in the final ranking, so the result is never worse than it.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from cranetraj.config.settings import SolverSettings
from cranetraj.constants import FULL_MOTIF_INTERVALS, HORIZON_TIE_TOLERANCE, IDLE_DISTANCE
from cranetraj.errors import CraneTrajError
from cranetraj.kinematics import time_minimal_profile
from cranetraj.models.power import QuadraticSurrogate
from cranetraj.models.problem import ProblemSpec, SolveMode, SolveResult
from cranetraj.optimizer.nlp import PlanProblem, check_feasible, solve_fixed_plan
from cranetraj.optimizer.plans import SEED_VARIANTS, SegmentPlan, collapse, enumerate_plans, seed_decision
from cranetraj.powerflow import fit_domain_for, fit_quadratic
from cranetraj.trajectory import Trajectory, check_bounds, energies
from cranetraj.utils.logging_config import get_logger

logger = logging.getLogger(__name__)

Candidate = tuple[SegmentPlan, SolveResult]


@dataclass
class _SurrogateStep:
    """Candidates and bookkeeping of the surrogate search."""

    candidates: list[Candidate] = field(default_factory=list)
    solves: int = 0
    evaluations: int = 0
    elapsed_s: float = 0.0


def baseline(spec: ProblemSpec) -> SolveResult:
    """The optimized drive moving time-minimally, then standing until T.

    Raises:
        InfeasibleError: If the time-minimal profile does not fit into T
    """
    check_feasible(spec)
    if spec.s0 < IDLE_DISTANCE:
        trajectory = Trajectory.dwell(spec.T, spec.direction_sign)
    else:
        trajectory = time_minimal_profile(spec.s0, spec.limits, spec.direction_sign).padded(spec.T)
    report = energies(trajectory, spec.model, spec.p_slow)
    bounds = check_bounds(trajectory, spec.limits)
    return SolveResult(
        trajectory=trajectory,
        report=report,
        n_intervals=trajectory.n_segments,
        converged=True,
        objective_value=spec.objective_value(report),
        plan_label=" ".join(trajectory.labels),
        mode=SolveMode.BASELINE,
        bound_violation=bounds.max_bound_violation,
        message="time-minimal baseline",
    )


def optimize(spec: ProblemSpec, settings: SolverSettings | None = None) -> SolveResult:
    """Energy-optimal trajectory of the drive that is not time-critical.

    Raises:
        InfeasibleError: If the distance cannot be covered within T
    """
    settings = settings or SolverSettings()
    decisions = get_logger()
    request_id = decisions.log_solve_request(
        objective=spec.objective.value,
        s0=spec.s0,
        T=spec.T,
        optimized_axis=spec.optimized_axis.value,
        direction_sign=spec.direction_sign,
        model=spec.model.name,
    )
    started = time.perf_counter()
    try:
        base = baseline(spec)
        result, step = _search(spec, settings, base)
    except CraneTrajError as e:
        decisions.log_solve_error(request_id, e)
        raise

    elapsed = time.perf_counter() - started
    result = result.model_copy(
        update={
            "plan_solves": step.solves,
            "evaluations": step.evaluations,
            "surrogate_s": step.elapsed_s,
            "elapsed_s": elapsed,
        }
    )
    decisions.log_solve_result(
        request_id=request_id,
        plan=result.plan_label,
        n_intervals=result.n_intervals,
        objective_value=result.objective_value,
        baseline_value=base.objective_value,
        converged=result.converged,
        mode=result.mode.value,
        plan_solves=step.solves,
        evaluations=step.evaluations,
        elapsed_s=elapsed,
    )
    return result


def _search(
    spec: ProblemSpec, settings: SolverSettings, base: SolveResult
) -> tuple[SolveResult, _SurrogateStep]:
    if spec.s0 < IDLE_DISTANCE:
        return base, _SurrogateStep()
    t_min = check_feasible(spec)
    if spec.T - t_min <= HORIZON_TIE_TOLERANCE * max(1.0, spec.T):
        logger.info("Horizon equals the time-minimal duration; the baseline is the only feasible point")
        return base, _SurrogateStep()

    surrogate = fit_quadratic(spec.model, fit_domain_for(spec.limits))
    step = _surrogate_sweep(spec, settings, surrogate, base.objective_value)
    candidates = step.candidates

    refined: list[Candidate] = []
    for plan, candidate in _top_plans(candidates, settings.refine_top_k):
        try:
            result = solve_fixed_plan(
                plan, spec, False, candidate.decision, surrogate=surrogate, settings=settings
            )
        except CraneTrajError as e:
            logger.debug(f"Full-model refinement of {plan.label} failed: {e}")
            continue
        finally:
            step.solves += 1
        if result.converged:
            refined.append((plan, result))

    ranked = _rank(candidates + refined)
    if ranked:
        collapsed = _collapse_floor(ranked[0], spec, settings, surrogate)
        if collapsed is not None:
            step.solves += 1
            ranked = _rank(ranked + [collapsed])

    if ranked and ranked[0][1].objective_value < base.objective_value:
        best = ranked[0][1]
        logger.info(
            f"Best plan {best.plan_label} [{best.mode.value}]: {best.objective_value:.6g} J "
            f"vs baseline {base.objective_value:.6g} J"
        )
        return best, step
    logger.info("No plan beats the time-minimal baseline")
    return base, step


def _screen(
    plans: list[SegmentPlan], spec: ProblemSpec, settings: SolverSettings, surrogate: QuadraticSurrogate
) -> tuple[list[SegmentPlan], int]:
    """The plans_per_n plans whose seeds have the lowest surrogate objective.

    Plans whose moves cannot fill the horizon drop out here. Also returns the
    number of trajectories evaluated.
    """
    scored: list[tuple[float, SegmentPlan]] = []
    evaluations = 0
    for plan in plans:
        try:
            decision = seed_decision(plan, spec, surrogate, "proportional", settings.min_segment)
            problem = PlanProblem(plan, spec, surrogate, SolveMode.SURROGATE, settings)
            score = problem.evaluate(problem.to_scaled(decision)).objective
            evaluations += problem.evaluations
        except CraneTrajError as e:
            logger.debug(f"{plan.label} screened out: {e}")
            continue
        scored.append((score, plan))
    scored.sort(key=lambda item: item[0])
    return [plan for _, plan in scored[: settings.plans_per_n]], evaluations


def _seeds(
    plan: SegmentPlan, spec: ProblemSpec, settings: SolverSettings, surrogate: QuadraticSurrogate
) -> list[str]:
    """Seed variants of a plan that yield distinct decision vectors."""
    variants: list[str] = []
    seen: list[np.ndarray] = []
    for variant in SEED_VARIANTS[: settings.seeds_per_plan]:
        decision = seed_decision(plan, spec, surrogate, variant, settings.min_segment)
        if any(np.allclose(decision, other, rtol=0.0, atol=1e-12) for other in seen):
            continue
        seen.append(decision)
        variants.append(variant)
    return variants


def _surrogate_sweep(
    spec: ProblemSpec, settings: SolverSettings, surrogate: QuadraticSurrogate, best: float
) -> _SurrogateStep:
    step = _SurrogateStep()
    started = time.perf_counter()
    stale = 0
    for n in range(3, settings.n_max + 1):
        plans = [p for p in enumerate_plans(n, spec, max_starts=settings.max_starts) if not p.is_overdetermined]
        if not plans:
            continue
        plans, screened = _screen(plans, spec, settings, surrogate)
        step.evaluations += screened
        n_best = math.inf
        for plan in plans:
            for seed in _seeds(plan, spec, settings, surrogate):
                step.solves += 1
                try:
                    result = solve_fixed_plan(plan, spec, True, surrogate=surrogate, settings=settings, seed=seed)
                except CraneTrajError as e:
                    logger.debug(f"{plan.label} ({seed}) failed: {e}")
                    continue
                step.evaluations += result.evaluations
                if result.converged:
                    step.candidates.append((plan, result))
                    n_best = min(n_best, result.objective_value)

        if math.isinf(n_best):
            # interval counts without a feasible plan say nothing about convergence
            logger.debug(f"n = {n}: no converged plan")
            continue
        logger.info(f"n = {n}: {len(plans)} plans solved, best {n_best:.6g} J")
        if best - n_best > settings.improvement_rtol * abs(best):
            best, stale = n_best, 0
        elif n >= FULL_MOTIF_INTERVALS:
            stale += 1
        if stale >= settings.patience:
            logger.debug(f"No improvement for {stale} interval counts; stopping at n = {n}")
            break
    step.elapsed_s = time.perf_counter() - started
    return step


def _rank(candidates: list[Candidate]) -> list[Candidate]:
    # stable sort: ties keep discovery order, which is deterministic
    return sorted(candidates, key=lambda c: c[1].objective_value)


def _top_plans(candidates: list[Candidate], k: int) -> list[Candidate]:
    """Best surrogate solution of each plan, best k plans."""
    best: dict[str, Candidate] = {}
    for plan, result in _rank(candidates):
        best.setdefault(plan.label, (plan, result))
    return list(best.values())[:k]


def _collapse_floor(
    candidate: Candidate, spec: ProblemSpec, settings: SolverSettings, surrogate: QuadraticSurrogate
) -> Candidate | None:
    """Re-solve without the first interval that sits at the minimum duration."""
    plan, result = candidate
    if result.decision is None or plan.n < 2:
        return None
    floor = settings.min_segment * (1.0 + 1e-3)
    index = next((i for i, d in enumerate(result.decision[: plan.n]) if d <= floor), None)
    if index is None:
        return None

    reduced, decision = collapse(plan, result.decision, index)  # type: ignore[arg-type]
    if reduced.is_overdetermined:
        return None
    logger.debug(f"Collapsing interval {index} of {plan.label} → {reduced.label}")
    try:
        resolved = solve_fixed_plan(
            reduced,
            spec,
            result.mode is not SolveMode.FULL,
            decision,
            surrogate=surrogate,
            settings=settings,
        )
    except CraneTrajError as e:
        logger.debug(f"Collapsed plan {reduced.label} failed: {e}")
        return None
    return (reduced, resolved) if resolved.converged else None
