"""End-to-end optimization runs.

These solve real plans with scipy and take from seconds to minutes.
Skip them with ``-m "not slow"``.
"""

import time

import pytest

from cranetraj.config import apply_overrides
from cranetraj.energymap import build_problem
from cranetraj.engine import SweepEngine, map_stem
from cranetraj.models.energymap import SweepSpec
from cranetraj.models.kinematics import TravelSpec, VerticalDirection
from cranetraj.models.problem import Objective, SolveMode
from cranetraj.models.report import Classification, TrajectoryClass
from cranetraj.optimizer import Motif, MoveCenter, SegmentPlan, baseline, optimize, solve_fixed_plan
from cranetraj.trajectory import check_bounds
from cranetraj.validation import DirectOracle, Validator


@pytest.fixture
def quick_config(run_config):
    return apply_overrides(run_config, {"solver": {"n_max": 9, "patience": 1, "refine_top_k": 1}})


@pytest.fixture
def search_config(run_config):
    return apply_overrides(run_config, {"solver": {"n_max": 12}})


def grid(config, s_x, s_y, **update):
    """SweepSpec over the given axis values (evenly spaced)."""
    step_x = s_x[1] - s_x[0] if len(s_x) > 1 else 1.0
    step_y = s_y[1] - s_y[0] if len(s_y) > 1 else 1.0
    return SweepSpec.from_config(config).model_copy(
        update={
            "s_x_min": s_x[0],
            "s_x_max": s_x[-1],
            "s_x_step": step_x,
            "s_y_min": s_y[0],
            "s_y_max": s_y[-1],
            "s_y_step": step_y,
            **update,
        }
    )


class TestOptimize:
    """Tests for the full plan search."""

    @pytest.mark.integration
    @pytest.mark.slow
    @pytest.mark.parametrize("objective", [Objective.CONSUMPTION, Objective.RECUPERATION])
    def test_never_worse_than_baseline(self, travel_problem, quick_config, objective):
        """The optimum lies between the time-minimal reference and zero loss."""
        problem = travel_problem.model_copy(update={"objective": objective})

        result = optimize(problem, quick_config.solver)
        reference = baseline(problem)

        assert result.objective_value <= reference.objective_value + 1e-6 * abs(reference.objective_value)
        assert result.traj.T == pytest.approx(problem.T, rel=1e-6)
        bounds = check_bounds(result.traj, problem.limits)
        assert bounds.max_bound_violation <= 1e-6
        assert bounds.boundary_defect <= 1e-7
        assert bounds.max_continuity_defect <= 1e-7

    @pytest.mark.integration
    @pytest.mark.slow
    def test_el_plan_converges(self, travel_problem, quick_config):
        """The CD-EL-CD plan beats the padded time-minimal move on a long horizon."""
        plan = SegmentPlan.from_motif(Motif(MoveCenter.EL, accel=True))

        result = solve_fixed_plan(plan, travel_problem, surrogate_only=False, settings=quick_config.solver)

        assert result.converged, result.message
        assert result.constraint_violation < 1e-8
        assert result.objective_value < baseline(travel_problem).objective_value

    @pytest.mark.integration
    @pytest.mark.slow
    @pytest.mark.parametrize("objective", [Objective.CONSUMPTION, Objective.RECUPERATION])
    def test_short_up_travel_saves_energy(self, search_config, objective):
        """15 m beside a 10 m climb leaves the running gear slack it can turn into a saving."""
        problem, _, _ = build_problem(TravelSpec(s_x=15.0, s_y=10.0), search_config, objective)

        result = optimize(problem, search_config.solver)
        reference = baseline(problem)

        assert result.converged
        assert result.mode is not SolveMode.BASELINE
        assert result.objective_value < reference.objective_value * (1.0 - 1e-3)

    @pytest.mark.integration
    @pytest.mark.slow
    def test_climb_optimum_has_few_intervals(self, travel_problem, search_config):
        """Beside a lifting-dominated climb the optimum needs no more than seven intervals."""
        result = optimize(travel_problem, search_config.solver)

        assert result.converged
        assert result.n_intervals <= 7
        assert result.mode is not SolveMode.BASELINE

    @pytest.mark.integration
    @pytest.mark.slow
    def test_surrogate_throughput(self, travel_problem, quick_config):
        """The surrogate step evaluates at least 100 trajectories per second."""
        result = optimize(travel_problem, quick_config.solver)

        assert result.evaluations > 0
        assert result.surrogate_s > 0.0
        assert result.trajectories_per_second >= 100.0

    @pytest.mark.integration
    @pytest.mark.slow
    def test_descent_regenerates(self, quick_config):
        """A short move beside a 20 m descent leaves a net energy gain."""
        travel = TravelSpec(s_x=3.0, s_y=20.0, vertical_direction=VerticalDirection.DOWN)
        problem, _, _ = build_problem(travel, quick_config, Objective.CONSUMPTION)

        result = optimize(problem, quick_config.solver)

        assert result.converged
        assert result.report.E_con < 0.0


class TestSweep:
    @pytest.mark.integration
    @pytest.mark.slow
    async def test_small_map(self, tmp_path, quick_config):
        spec = grid(quick_config, [10.0, 20.0], [5.0])

        cells, summary = await SweepEngine(max_concurrent=2).run(spec, out_dir=tmp_path)

        assert len(cells) == 2
        assert summary.n_failed == 0
        assert all(c.saving_rate >= -1e-9 for c in cells if c.converged)

    @pytest.mark.integration
    @pytest.mark.slow
    async def test_rerun_is_byte_identical(self, tmp_path, quick_config):
        spec = grid(quick_config, [10.0, 20.0], [5.0, 10.0])

        await SweepEngine(max_concurrent=1).run(spec, out_dir=tmp_path / "first")
        await SweepEngine(max_concurrent=1).run(spec, out_dir=tmp_path / "second")

        name = f"{map_stem(spec)}.csv"
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()

    @pytest.mark.integration
    @pytest.mark.slow
    async def test_objectives_agree_on_climbs(self, quick_config):
        """Beside a lifting-dominated climb the total power stays positive, so both objectives agree."""
        s_x, s_y = [3.0, 6.0, 9.0, 12.0, 15.0], [12.0, 14.0, 16.0, 18.0, 20.0]
        engine = SweepEngine(max_concurrent=4)

        consumption, _ = await engine.run(grid(quick_config, s_x, s_y, objective=Objective.CONSUMPTION))
        recuperation, _ = await engine.run(grid(quick_config, s_x, s_y, objective=Objective.RECUPERATION))

        pairs = [(c, r) for c, r in zip(consumption, recuperation) if c.converged and r.converged]
        assert len(pairs) >= 20
        for c, r in pairs:
            assert c.key == r.key
            assert r.E_opt == pytest.approx(c.E_opt, rel=0.02)

    @pytest.mark.integration
    @pytest.mark.slow
    async def test_descent_recuperation_restarts(self, quick_config):
        """Short moves beside a long descent pay off with more than one start."""
        config = apply_overrides(quick_config, {"solver": {"n_max": 16, "patience": 3, "refine_top_k": 2}})
        spec = grid(
            config,
            [2.0, 4.0],
            [20.0],
            vertical_direction=VerticalDirection.DOWN,
            objective=Objective.RECUPERATION,
        )

        cells, _ = await SweepEngine(max_concurrent=2).run(spec)

        classes = [Classification.from_label(c.classification) for c in cells if c.converged]
        assert any(k.kind is TrajectoryClass.MULTI_START and k.starts >= 2 for k in classes)

    @pytest.mark.integration
    @pytest.mark.slow
    async def test_full_map(self, quick_config):
        """On a 10×10 map the optimum never loses to the reference and mostly saves."""
        s_x = [3.0 * k for k in range(1, 11)]
        s_y = [2.0 * k for k in range(1, 11)]
        spec = grid(quick_config, s_x, s_y, objective=Objective.RECUPERATION)

        started = time.perf_counter()
        cells, summary = await SweepEngine(max_concurrent=4).run(spec)
        elapsed = time.perf_counter() - started

        converged = [c for c in cells if c.converged]
        assert len(cells) == 100
        assert summary.n_failed == 0
        assert all(c.E_opt <= c.E_base + 1e-9 * abs(c.E_base) for c in converged)
        assert sum(1 for c in converged if c.saving_rate > 0.0) >= 80
        assert elapsed < 600.0


class TestOracle:
    @pytest.mark.integration
    @pytest.mark.slow
    def test_single_case(self, quick_config):
        """The plan search is at least as good as a coarse direct transcription."""
        validator = Validator(quick_config, DirectOracle(dt=0.2, starts=2), tolerance=0.02)
        (case,) = Validator.grid_cases(1, s_x_range=(10.0, 10.0), s_y_range=(5.0, 5.0))

        result = validator.validate_single(case)

        assert result.error is None
        assert result.direct_starts_converged >= 1
        assert result.passed
