"""Tests for problem construction, classification and map boundaries."""

import math

import pytest

from cranetraj.energymap import (
    build_problem,
    classify,
    dominance_boundary,
    econ_sign_boundary,
    saving_rate,
    solve_cell,
    summarize,
)
from cranetraj.errors import DomainError
from cranetraj.kinematics import minimal_cruise_velocity, time_minimal_profile
from cranetraj.models.energymap import CellTask, MapCell, SweepSpec
from cranetraj.models.kinematics import Axis, TravelSpec, VerticalDirection
from cranetraj.models.problem import Objective, SolveMode, SolveResult
from cranetraj.models.report import EnergyReport, TrajectoryClass
from cranetraj.optimizer import baseline
from cranetraj.trajectory import Segment, Trajectory


def _result(trajectory: Trajectory, converged: bool = True) -> SolveResult:
    return SolveResult(
        trajectory=trajectory,
        report=EnergyReport(E_rec=0.0, E_con=0.0, T=trajectory.T, n_segments=trajectory.n_segments),
        n_intervals=trajectory.n_segments,
        converged=converged,
        objective_value=0.0,
        mode=SolveMode.SURROGATE,
    )


@pytest.fixture
def sweep_spec(run_config):
    return SweepSpec.from_config(run_config)


class TestBuildProblem:
    """Tests for the split into time-critical and optimized drive."""

    def test_lifting_is_time_critical(self, run_config):
        problem, slow, slow_axis = build_problem(TravelSpec(s_x=30.0, s_y=20.0), run_config, Objective.CONSUMPTION)

        assert slow_axis is Axis.Y
        assert problem.optimized_axis is Axis.X
        assert problem.s0 == 30.0
        assert problem.T == pytest.approx(24.7222, abs=1e-4)
        assert slow.T == pytest.approx(problem.T)
        assert problem.p_slow.T == pytest.approx(problem.T)

    def test_running_is_time_critical(self, run_config):
        problem, slow, slow_axis = build_problem(TravelSpec(s_x=30.0, s_y=2.0), run_config, Objective.RECUPERATION)

        assert slow_axis is Axis.X
        assert problem.optimized_axis is Axis.Y
        assert problem.T == pytest.approx(16.5)
        assert problem.limits == run_config.lifting.limits

    def test_down_travel_regenerates(self, run_config):
        """The lifting gear moving down gets a negative gravity term."""
        problem, _, _ = build_problem(
            TravelSpec(s_x=30.0, s_y=2.0, vertical_direction=VerticalDirection.DOWN),
            run_config,
            Objective.CONSUMPTION,
        )

        assert problem.direction_sign == -1
        assert problem.model.gravity_term < 0.0


class TestClassify:
    """Tests for the trajectory families."""

    def test_unconverged(self, travel_problem):
        result = _result(baseline(travel_problem).traj, converged=False)

        assert classify(result, travel_problem).kind is TrajectoryClass.UNKNOWN

    def test_baseline_is_time_minimal(self, travel_problem):
        assert classify(baseline(travel_problem), travel_problem).kind is TrajectoryClass.TIME_MINIMAL_BOTH

    def test_delayed_is_time_minimal(self, travel_problem):
        delayed = time_minimal_profile(30.0, travel_problem.limits).delayed(travel_problem.T)

        assert classify(_result(delayed), travel_problem).kind is TrajectoryClass.TIME_MINIMAL_BOTH

    def test_multi_start(self, travel_problem):
        """Two moves separated by standstill."""
        move = time_minimal_profile(15.0, travel_problem.limits)
        wait = travel_problem.T - 2 * move.T
        traj = Trajectory(move.segments + (Segment.cruise(0.0, wait),) + move.segments)
        spec = travel_problem.model_copy(update={"T": traj.T})

        classification = classify(_result(traj), spec)

        assert classification.kind is TrajectoryClass.MULTI_START
        assert classification.starts == 2
        assert classification.label == "multi_start(2)"

    def test_dwell_max(self, run_config):
        """A short move followed by a long standstill."""
        problem, _, _ = build_problem(TravelSpec(s_x=2.0, s_y=20.0), run_config, Objective.CONSUMPTION)
        move = time_minimal_profile(2.0, problem.limits)
        traj = Trajectory(
            (Segment.cruise(0.0, 1.0),) + move.segments + (Segment.cruise(0.0, problem.T - move.T - 1.0),)
        )

        assert classify(_result(traj), problem).kind is TrajectoryClass.DWELL_MAX

    def test_const_min_velocity(self, travel_problem):
        """The S-curve capped at the minimal cruise velocity."""
        v_min = minimal_cruise_velocity(30.0, travel_problem.T, travel_problem.limits)
        traj = time_minimal_profile(30.0, travel_problem.limits.with_velocity(v_min))
        spec = travel_problem.model_copy(update={"T": traj.T})

        assert classify(_result(traj), spec).kind is TrajectoryClass.CONST_MIN_VELOCITY


class TestSavingRate:
    def test_relative_saving(self):
        assert saving_rate(100.0, 80.0) == pytest.approx(0.2)

    def test_negative_baseline(self):
        """Net regeneration: saving more makes E more negative."""
        assert saving_rate(-100.0, -120.0) == pytest.approx(0.2)

    def test_zero_baseline(self):
        assert saving_rate(0.0, 5.0) == 0.0


class TestBoundaries:
    """Tests for the map's boundary curves."""

    def test_dominance_at_twenty_metres(self, run_config):
        ((s_x, s_y),) = dominance_boundary(run_config.running.limits, run_config.lifting.limits, [20.0])

        assert s_y == 20.0
        assert s_x == pytest.approx(54.6667, abs=1e-3)

    def test_econ_sign_change(self):
        """The zero crossing of E_con is interpolated along s_y."""
        cells = [
            MapCell(s_x=1.0, s_y=1.0, direction="down", objective="consumption", converged=True, E_con=-10.0),
            MapCell(s_x=1.0, s_y=2.0, direction="down", objective="consumption", converged=True, E_con=10.0),
            MapCell(s_x=2.0, s_y=1.0, direction="down", objective="consumption", converged=True, E_con=5.0),
            MapCell(s_x=2.0, s_y=2.0, direction="down", objective="consumption", converged=True, E_con=6.0),
        ]

        assert econ_sign_boundary(cells) == [(1.0, pytest.approx(1.5))]

    def test_unconverged_cells_are_ignored(self):
        cells = [
            MapCell(s_x=1.0, s_y=1.0, direction="up", objective="consumption", E_con=-10.0),
            MapCell(s_x=1.0, s_y=2.0, direction="up", objective="consumption", converged=True, E_con=10.0),
        ]

        assert econ_sign_boundary(cells) == []


class TestSolveCell:
    """Tests for single map cells."""

    def test_failure_is_captured(self, sweep_spec):
        """A cell never raises; the error is recorded."""
        cell = solve_cell(CellTask(s_x=0.0, s_y=0.0, sweep=sweep_spec))

        assert not cell.converged
        assert cell.error is not None
        assert math.isnan(cell.E_opt)

    def test_idle_running_gear(self, sweep_spec, tmp_path):
        """A purely vertical cell needs no optimization; the dump is written."""
        dump = tmp_path / "cell.json"

        cell = solve_cell(CellTask(s_x=0.0, s_y=5.0, sweep=sweep_spec, dump_path=dump, dump_dt=0.5))

        assert cell.converged
        assert cell.error is None
        assert cell.dominant_axis is Axis.Y
        assert cell.saving_rate == pytest.approx(0.0)
        assert cell.classification == "time_minimal_both"
        assert dump.exists()


class TestSummarize:
    def test_counts(self, sweep_spec):
        cells = [
            MapCell(s_x=1.0, s_y=1.0, direction="up", objective="consumption", converged=True,
                    E_opt=1.0, saving_rate=0.1, classification="all_CD", E_con=1.0, E_rec=1.0),
            MapCell(s_x=1.0, s_y=2.0, direction="up", objective="consumption", converged=True,
                    E_opt=3.0, saving_rate=0.3, classification="all_CD", E_con=3.0, E_rec=3.0),
            MapCell(s_x=2.0, s_y=1.0, direction="up", objective="consumption", error="DomainError: x"),
        ]

        summary = summarize(cells, sweep_spec, config_hash="abc", elapsed_s=2.0)

        assert summary.n_cells == 3
        assert summary.n_converged == 2
        assert summary.n_failed == 1
        assert summary.n_unconverged == 0
        assert summary.mean_saving_rate == pytest.approx(0.2)
        assert summary.min_saving_rate == pytest.approx(0.1)
        assert summary.classification_counts == {"all_CD": 2}
        assert summary.cells_per_second == pytest.approx(1.5)
        assert "Energy Map" in summary.to_report()

    def test_invalid_grid(self, sweep_spec):
        data = sweep_spec.model_dump()
        data.update(s_x_min=5.0, s_x_max=1.0)

        with pytest.raises(ValueError):
            SweepSpec(**data)

    def test_cells_skip_origin(self, sweep_spec):
        spec = sweep_spec.model_copy(update={"s_x_min": 0.0, "s_y_min": 0.0, "s_x_max": 1.0, "s_y_max": 1.0})

        cells = spec.cells()

        assert (0.0, 0.0) not in cells
        assert len(cells) == 3 * 3 - 1


def test_build_problem_rejects_idle_travel(run_config):
    """Both distances below the idle threshold leave no horizon."""
    with pytest.raises(DomainError):
        build_problem(TravelSpec(s_x=1e-8, s_y=1e-8), run_config, Objective.CONSUMPTION)
