"""Indirect trajectory optimization: segment plans, fixed-plan NLP, outer search."""

from cranetraj.optimizer.nlp import PlanProblem, solve_fixed_plan
from cranetraj.optimizer.plans import Motif, MoveCenter, PlanStep, SegmentPlan, enumerate_plans, seed_decision
from cranetraj.optimizer.search import baseline, optimize

__all__ = [
    "Motif",
    "MoveCenter",
    "PlanProblem",
    "PlanStep",
    "SegmentPlan",
    "baseline",
    "enumerate_plans",
    "optimize",
    "seed_decision",
    "solve_fixed_plan",
]
