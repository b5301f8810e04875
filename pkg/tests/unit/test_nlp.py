"""Tests for the nonlinear program of one fixed plan."""

import time

import numpy as np
import pytest

from cranetraj.models.problem import Objective, SolveMode
from cranetraj.optimizer import Motif, MoveCenter, SegmentPlan, seed_decision
from cranetraj.optimizer.nlp import PlanProblem
from cranetraj.powerflow import fit_domain_for, fit_quadratic

MOTIFS = {
    "el": (Motif(MoveCenter.EL, accel=True, trail=True), 30.0),
    "cruise": (Motif(MoveCenter.CRUISE, accel=True, lead=True, trail=True), 30.0),
    "two_starts": (Motif(MoveCenter.NONE, accel=True, starts=2, trail=True), 4.0),
}


@pytest.fixture
def surrogate(travel_problem):
    return fit_quadratic(travel_problem.model, fit_domain_for(travel_problem.limits))


def make_problem(travel_problem, surrogate, name, objective=Objective.CONSUMPTION, mode=SolveMode.SURROGATE):
    motif, s0 = MOTIFS[name]
    spec = travel_problem.model_copy(update={"s0": s0, "objective": objective})
    plan = SegmentPlan.from_motif(motif)
    problem = PlanProblem(plan, spec, surrogate, mode)
    z0 = problem.to_scaled(seed_decision(plan, spec, surrogate))
    return problem, z0


def near(problem, z0, rng, scale=1e-3):
    lo = np.array([b[0] if b[0] is not None else -np.inf for b in problem.bounds()])
    hi = np.array([b[1] if b[1] is not None else np.inf for b in problem.bounds()])
    return np.clip(z0 + rng.normal(scale=scale, size=problem.size), lo + scale, hi - scale)


def central(fn, z, h=1e-6):
    """Central-difference Jacobian of fn at z, one column per variable."""
    columns = []
    for i in range(len(z)):
        step = np.zeros(len(z))
        step[i] = h
        columns.append((np.atleast_1d(fn(z + step)) - np.atleast_1d(fn(z - step))) / (2.0 * h))
    return np.stack(columns, axis=-1)


class TestDerivatives:
    """The forward sensitivities agree with central differences."""

    @pytest.mark.parametrize("objective", [Objective.CONSUMPTION, Objective.RECUPERATION])
    @pytest.mark.parametrize("name", list(MOTIFS))
    def test_gradient(self, travel_problem, surrogate, name, objective):
        problem, z0 = make_problem(travel_problem, surrogate, name, objective)
        rng = np.random.default_rng(7)

        assert problem.analytic
        for _ in range(10):
            z = near(problem, z0, rng)
            expected = central(problem.objective, z)[0]

            assert problem.gradient(z) == pytest.approx(expected, rel=1e-4, abs=1e-8)

    @pytest.mark.parametrize("name", list(MOTIFS))
    def test_constraint_jacobians(self, travel_problem, surrogate, name):
        problem, z0 = make_problem(travel_problem, surrogate, name)
        rng = np.random.default_rng(11)

        for _ in range(10):
            z = near(problem, z0, rng)

            eq = central(problem.equalities, z)
            ineq = central(problem.inequalities, z)

            assert problem.eq_jacobian(z).ravel() == pytest.approx(eq.ravel(), rel=1e-4, abs=1e-7)
            assert problem.ineq_jacobian(z).ravel() == pytest.approx(ineq.ravel(), rel=1e-4, abs=1e-7)

    def test_full_model_arc_uses_differences(self, travel_problem, surrogate):
        """A full-model EL arc has no closed form, so derivatives come from differences."""
        problem, z0 = make_problem(travel_problem, surrogate, "el", mode=SolveMode.FULL)

        evaluation = problem.evaluate(z0)

        assert not problem.analytic
        assert evaluation.gradient is None
        assert problem.gradient(z0).shape == (problem.size,)

    def test_full_model_without_arc_is_analytic(self, travel_problem, surrogate):
        problem, z0 = make_problem(travel_problem, surrogate, "cruise", mode=SolveMode.FULL)

        assert problem.analytic
        assert problem.evaluate(z0).gradient is not None


class TestEvaluation:
    """Tests for trajectory evaluation and counting."""

    def test_spans_horizon(self, travel_problem, surrogate):
        problem, z0 = make_problem(travel_problem, surrogate, "el")

        trajectory = problem.evaluate(z0).trajectory

        assert trajectory.T == pytest.approx(travel_problem.T, rel=1e-12)
        assert trajectory.labels == problem.plan.label.split()

    def test_repeated_points_are_cached(self, travel_problem, surrogate):
        problem, z0 = make_problem(travel_problem, surrogate, "el")

        problem.evaluate(z0)
        problem.evaluate(z0.copy())

        assert problem.evaluations == 1

    def test_throughput(self, travel_problem, surrogate):
        """Surrogate trajectories with all derivatives evaluate at 100 per second or more."""
        problem, z0 = make_problem(travel_problem, surrogate, "el")
        rng = np.random.default_rng(3)
        points = [near(problem, z0, rng) for _ in range(200)]

        start = time.perf_counter()
        for z in points:
            problem.evaluate(z)
        elapsed = time.perf_counter() - start

        assert problem.evaluations == 200
        assert problem.evaluations / elapsed >= 100.0


class TestStationarity:
    """Tests for the KKT residual."""

    def test_no_free_parameters(self, travel_problem, surrogate):
        idle = travel_problem.model_copy(update={"s0": 0.0})
        problem = PlanProblem(SegmentPlan.dwell(), idle, surrogate)

        assert problem.stationarity(np.zeros(0)) == 0.0

    def test_small_at_solution(self, travel_problem, surrogate):
        problem, z0 = make_problem(travel_problem, surrogate, "el")

        z, _, status, _ = problem.solve(z0)

        assert status == 0
        assert problem.infeasibility(z) < 1e-8
        assert problem.stationarity(z) <= problem.settings.kkt_tol
