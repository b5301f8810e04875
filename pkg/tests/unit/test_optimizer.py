"""Tests for the baseline, the fixed-plan solver and the search shortcuts."""

import json

import numpy as np
import pytest

from cranetraj.energymap import build_problem
from cranetraj.errors import DomainError, InfeasibleError
from cranetraj.kinematics import distance_for_duration, minimal_duration
from cranetraj.models.kinematics import Axis, TravelSpec
from cranetraj.models.problem import Objective, SolveMode
from cranetraj.optimizer import Motif, MoveCenter, SegmentPlan, baseline, optimize, solve_fixed_plan
from cranetraj.optimizer.nlp import PlanProblem, check_feasible
from cranetraj.trajectory import check_bounds, distance
from cranetraj.utils import get_logger

TIME_MINIMAL = "CD_j+ CD_a+ CD_j- CD_v CD_j- CD_a- CD_j+"
EL_PLAN = SegmentPlan.from_motif(Motif(MoveCenter.EL, accel=True, trail=True))


@pytest.fixture
def idle_problem(run_config):
    """The running gear stands still while the lifting gear climbs 10 m."""
    problem, _, _ = build_problem(TravelSpec(s_x=0.0, s_y=10.0), run_config, Objective.CONSUMPTION)
    return problem


class TestBaseline:
    """Tests for the time-minimal reference."""

    def test_padded_time_minimal(self, travel_problem):
        """The optimized drive moves time-minimally, then waits."""
        result = baseline(travel_problem)

        assert result.mode is SolveMode.BASELINE
        assert result.converged
        assert result.traj.T == pytest.approx(travel_problem.T)
        assert result.traj.labels[-1] == "CD_v0"
        assert result.objective_value == pytest.approx(result.report.E_con)

    def test_recuperation_objective(self, travel_problem):
        problem = travel_problem.model_copy(update={"objective": Objective.RECUPERATION})

        result = baseline(problem)

        assert result.objective_value == pytest.approx(result.report.E_rec)
        assert result.report.E_rec >= abs(result.report.E_con)

    def test_cruising_move_has_eight_intervals(self, travel_problem):
        """A 30 m move cruises, so the padded reference has seven moving intervals and a standstill."""
        result = baseline(travel_problem)

        assert result.n_intervals == 8
        assert result.plan_label == TIME_MINIMAL + " CD_v0"
        assert result.mode is SolveMode.BASELINE

    def test_infeasible_horizon(self, travel_problem):
        short = travel_problem.model_copy(update={"T": 10.0})

        with pytest.raises(InfeasibleError):
            check_feasible(short)
        with pytest.raises(InfeasibleError):
            baseline(short)


class TestSolveFixedPlan:
    """Tests for the single-plan solver."""

    def test_dwell_plan_needs_no_solve(self, idle_problem):
        """Standstill has no free parameters and matches the baseline."""
        result = solve_fixed_plan(SegmentPlan.dwell(), idle_problem)

        assert result.converged
        assert result.decision == pytest.approx([idle_problem.T])
        assert result.objective_value == pytest.approx(baseline(idle_problem).objective_value)

    def test_decision_length(self, travel_problem):
        with pytest.raises(DomainError):
            solve_fixed_plan(SegmentPlan.dwell(), travel_problem, warm_start=[1.0, 2.0])

    def test_el_plan_meets_every_criterion(self, travel_problem):
        """A converged solution is continuous, covers the distance and is stationary."""
        result = solve_fixed_plan(EL_PLAN, travel_problem)
        bounds = check_bounds(result.traj, travel_problem.limits)

        assert result.converged, result.message
        assert result.kkt_residual <= 1e-5
        assert max(bounds.max_continuity_defect, bounds.boundary_defect) <= 1e-7
        assert bounds.max_bound_violation <= 1e-6
        assert distance(result.traj) == pytest.approx(travel_problem.s0, rel=1e-8)
        assert result.evaluations > 0

    def test_failed_exit_is_not_converged(self, travel_problem, monkeypatch):
        """A feasible point from an unsuccessful SLSQP exit is reported as such."""
        monkeypatch.setattr(PlanProblem, "solve", lambda self, z0: (np.asarray(z0), 3, 9, "Iteration limit reached"))

        result = solve_fixed_plan(EL_PLAN, travel_problem)

        assert not result.converged
        assert "SLSQP status 9" in result.message

    def test_el_equation_is_checked(self, travel_problem, monkeypatch):
        monkeypatch.setattr("cranetraj.optimizer.nlp.el_residual", lambda fn, arc, limits: 1.0)

        result = solve_fixed_plan(EL_PLAN, travel_problem)

        assert not result.converged
        assert "EL residual" in result.message

    def test_rigid_plan_without_standstill(self, travel_problem):
        """The time-minimal plan cannot fill a longer horizon."""
        with pytest.raises(InfeasibleError):
            solve_fixed_plan(SegmentPlan.from_motif(Motif(MoveCenter.CRUISE, accel=True)), travel_problem)


class TestOptimizeShortcuts:
    """Cases the search answers without solving any plan."""

    def test_idle_drive(self, idle_problem):
        """A drive that does not move stays at rest."""
        result = optimize(idle_problem)

        assert idle_problem.optimized_axis is Axis.X
        assert result.plan_solves == 0
        assert result.traj.labels == ["CD_v0"]
        assert result.objective_value == pytest.approx(baseline(idle_problem).objective_value)

    def test_horizon_tie(self, run_config):
        """On the dominance boundary both drives move time-minimally."""
        T_y = minimal_duration(20.0, run_config.lifting.limits)
        s_x = distance_for_duration(T_y, run_config.running.limits, xtol=1e-12)
        problem, _, slow_axis = build_problem(TravelSpec(s_x=s_x, s_y=20.0), run_config, Objective.CONSUMPTION)

        result = optimize(problem)

        assert slow_axis is Axis.X
        assert result.mode is SolveMode.BASELINE
        assert result.plan_solves == 0

    def test_infeasible_raises(self, travel_problem):
        with pytest.raises(InfeasibleError):
            optimize(travel_problem.model_copy(update={"T": 10.0}))


class TestDecisionLog:
    """Tests for the JSONL trace of optimizer decisions."""

    def test_request_and_result(self, idle_problem, tmp_path):
        decisions = get_logger(log_dir=tmp_path, enable_file_logging=True)

        optimize(idle_problem)

        lines = decisions.log_file.read_text().splitlines()
        events = [json.loads(line) for line in lines]
        assert [e["event_type"] for e in events] == ["solve_request", "solve_result"]
        assert events[0]["request_id"] == events[1]["request_id"]
        assert events[1]["output"]["plan"] == "CD_v0"

    def test_error(self, travel_problem, tmp_path):
        decisions = get_logger(log_dir=tmp_path, enable_file_logging=True)

        with pytest.raises(InfeasibleError):
            optimize(travel_problem.model_copy(update={"T": 10.0}))

        events = [json.loads(line) for line in decisions.log_file.read_text().splitlines()]
        assert events[-1]["event_type"] == "solve_error"
        assert events[-1]["error"]["type"] == "InfeasibleError"
