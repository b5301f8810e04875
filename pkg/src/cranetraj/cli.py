"""Command-line interface for crane-traj.

ARCHITECTURE:
    CLI Commands → RunConfig → kinematics / optimizer / SweepEngine / Validator → JSON + CSV output

Workflows: timemin (single drive), optimize (single travel), sweep (energy
map), validate-model (power model check), validate (direct-oracle benchmark)

Key Design:
- Typer framework for auto-help and type validation
- One JSON config document; flags override its scalars
- Exit codes: 0 success, 2 usage or configuration error, 3 solver failure
"""

import json
import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Optional

import numpy as np
import typer
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from cranetraj import __version__
from cranetraj.config import RunConfig, config_hash, load_power_model, load_run_config
from cranetraj.errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    IllPosedSurrogateError,
    InfeasibleError,
    SingularELError,
)
from cranetraj.models.kinematics import Drive, TravelSpec, VerticalDirection
from cranetraj.models.problem import Objective
from cranetraj.utils.logging_config import get_logger

load_dotenv()

app = typer.Typer(
    name="cranetraj",
    help="Energy-optimal trajectories for stacker cranes",
    add_completion=False,
)

EXIT_USAGE = 2
EXIT_SOLVER = 3


@contextmanager
def _exit_codes() -> Iterator[None]:
    try:
        yield
    except (ConfigError, DomainError, ValidationError, FileNotFoundError, ValueError) as e:
        print(f"Error: {e}")
        raise typer.Exit(EXIT_USAGE) from e
    except (InfeasibleError, SingularELError, DivergenceError, IllPosedSurrogateError) as e:
        print(f"Solver failure: {e}")
        raise typer.Exit(EXIT_SOLVER) from e


def _setup(verbose: bool, log: bool, log_dir: Optional[Path]) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO if log else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    get_logger(log_dir=log_dir, enable_file_logging=log, enable_console_logging=verbose)


def _config(config: Optional[Path], overrides: dict[str, Any]) -> RunConfig:
    return load_run_config(config, {k: v for k, v in overrides.items() if v is not None and v != {}})


def _solver(n_max: Optional[int], patience: Optional[int], refine_top_k: Optional[int]) -> dict[str, int]:
    knobs = {"n_max": n_max, "patience": patience, "refine_top_k": refine_top_k}
    return {k: v for k, v in knobs.items() if v is not None}


def _write_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(data, f, indent=2)


@app.command()
def timemin(
    distance: float = typer.Option(..., "--distance", "-d", help="Travel distance [m]"),
    drive: Drive = typer.Option(Drive.RUNNING, "--drive", help="running or lifting"),
    config: Optional[Path] = typer.Option(None, "--config", help="Run configuration JSON"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory"),
    sample_dt: Optional[float] = typer.Option(None, "--sample-dt", help="Add a sample table at this step [s]"),
) -> None:
    """Time-minimal jerk-limited profile of one drive."""
    from cranetraj.kinematics import time_minimal_profile
    from cranetraj.trajectory import to_dict

    with _exit_codes():
        run = _config(config, {"output_dir": out})
        if distance <= 0:
            raise DomainError(f"Distance must be positive, got {distance}")
        limits = run.running.limits if drive is Drive.RUNNING else run.lifting.limits
        profile = time_minimal_profile(distance, limits)

        print(f"\n{drive.value} gear, {distance:g} m: T = {profile.T:.4f} s ({profile.n_segments} segments)")
        print(f"  {' '.join(profile.labels)}")

        path = run.output_dir / f"timemin_{drive.value}_{distance:g}.json"
        _write_json(path, {"drive": drive.value, "distance": distance, **to_dict(profile, sample_dt)})
        print(f"Saved to {path}")


@app.command()
def optimize(
    sx: float = typer.Option(..., "--sx", help="Horizontal distance [m]"),
    sy: float = typer.Option(..., "--sy", help="Vertical distance [m]"),
    direction: VerticalDirection = typer.Option(VerticalDirection.UP, "--direction", help="up or down"),
    objective: Objective = typer.Option(Objective.CONSUMPTION, "--objective", help="recuperation or consumption"),
    config: Optional[Path] = typer.Option(None, "--config", help="Run configuration JSON"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory"),
    load_mass: Optional[float] = typer.Option(None, "--load-mass", help="Payload [kg]"),
    n_max: Optional[int] = typer.Option(None, "--n-max", help="Largest number of intervals"),
    patience: Optional[int] = typer.Option(None, "--patience", help="Interval counts without improvement"),
    refine_top_k: Optional[int] = typer.Option(None, "--refine-top-k", help="Candidates refined with the full model"),
    sample_dt: Optional[float] = typer.Option(None, "--sample-dt", help="Add a sample table at this step [s]"),
    log: bool = typer.Option(False, "--log/--no-log", help="Enable solve decision logging"),
    log_dir: Optional[Path] = typer.Option(None, "--log-dir", help="Directory for decision logs"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug output"),
    profile: bool = typer.Option(False, "--profile", help="Print solver throughput"),
) -> None:
    """Energy-optimal trajectory of a single travel."""
    from cranetraj.energymap import build_problem, classify, saving_rate
    from cranetraj.optimizer import baseline
    from cranetraj.optimizer import optimize as run_optimize
    from cranetraj.trajectory import to_dict

    _setup(verbose, log, log_dir)
    with _exit_codes():
        run = _config(
            config,
            {"output_dir": out, "load_mass": load_mass, "solver": _solver(n_max, patience, refine_top_k)},
        )
        travel = TravelSpec(s_x=sx, s_y=sy, vertical_direction=direction, load_mass=run.load_mass)
        problem, slow, slow_axis = build_problem(travel, run, objective)

        print(f"\nOptimizing {direction.value}-travel s_x={sx:g} m, s_y={sy:g} m ({objective.value})...")
        base = baseline(problem)
        result = run_optimize(problem, run.solver)
        classification = classify(result, problem, run.classification)
        report = result.report.model_copy(update={"classification": classification})
        result = result.model_copy(update={"report": report})

        print(result.to_report(baseline=base, slow_axis=slow_axis))
        if profile:
            print(
                f"Surrogate step: {result.evaluations} trajectories in {result.surrogate_s:.2f} s "
                f"({result.trajectories_per_second:.0f} trajectories/s); "
                f"{result.plan_solves} plan solves in {result.elapsed_s:.2f} s total"
            )

        stem = f"optimize_{direction.value}_{objective.value}_{sx:g}_{sy:g}"
        axes = {
            "optimized_axis": problem.optimized_axis.value,
            "slow_axis": slow_axis.value,
        }
        _write_json(
            run.output_dir / f"{stem}_trajectory.json",
            {
                **axes,
                "trajectory": to_dict(result.traj, sample_dt),
                "slow_trajectory": to_dict(slow, sample_dt),
            },
        )
        _write_json(
            run.output_dir / f"{stem}_report.json",
            {
                **axes,
                "report": report.model_dump(mode="json"),
                "baseline": base.report.model_dump(mode="json"),
                "objective_value": result.objective_value,
                "baseline_value": base.objective_value,
                "saving_rate": saving_rate(base.objective_value, result.objective_value),
                "plan": result.plan_label,
                "mode": result.mode.value,
                "converged": result.converged,
                "partial": not result.converged,
                "config_hash": config_hash(run),
                "version": __version__,
            },
        )
        print(f"Saved to {run.output_dir / stem}_*.json")

    if not result.converged:
        print("Warning: optimizer did not converge; artifacts are flagged partial")
        raise typer.Exit(EXIT_SOLVER)


@app.command()
def sweep(
    direction: Optional[VerticalDirection] = typer.Option(None, "--direction", help="up or down"),
    objective: Optional[Objective] = typer.Option(None, "--objective", help="recuperation or consumption"),
    config: Optional[Path] = typer.Option(None, "--config", help="Run configuration JSON"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker processes"),
    resume: bool = typer.Option(False, "--resume", help="Skip cells found in the partial CSV"),
    sx_min: Optional[float] = typer.Option(None, "--sx-min"),
    sx_max: Optional[float] = typer.Option(None, "--sx-max"),
    sx_step: Optional[float] = typer.Option(None, "--sx-step"),
    sy_min: Optional[float] = typer.Option(None, "--sy-min"),
    sy_max: Optional[float] = typer.Option(None, "--sy-max"),
    sy_step: Optional[float] = typer.Option(None, "--sy-step"),
    dump_trajectories: bool = typer.Option(False, "--dump-trajectories", help="Write one trajectory JSON per cell"),
    dump_dt: Optional[float] = typer.Option(None, "--dump-dt", help="Sample step of the dumps [s]"),
    n_max: Optional[int] = typer.Option(None, "--n-max", help="Largest number of intervals"),
    patience: Optional[int] = typer.Option(None, "--patience", help="Interval counts without improvement"),
    refine_top_k: Optional[int] = typer.Option(None, "--refine-top-k", help="Candidates refined with the full model"),
    log: bool = typer.Option(False, "--log/--no-log", help="Enable solve decision logging"),
    log_dir: Optional[Path] = typer.Option(None, "--log-dir", help="Directory for decision logs"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug output"),
    profile: bool = typer.Option(False, "--profile", help="Print sweep throughput"),
) -> None:
    """Energy map over a grid of travel distances."""
    import asyncio

    from cranetraj.engine import SweepEngine
    from cranetraj.models.energymap import SweepSpec

    _setup(verbose, log, log_dir)
    with _exit_codes():
        grid = {
            "s_x_min": sx_min,
            "s_x_max": sx_max,
            "s_x_step": sx_step,
            "s_y_min": sy_min,
            "s_y_max": sy_max,
            "s_y_step": sy_step,
        }
        run = _config(
            config,
            {
                "output_dir": out,
                "workers": workers,
                "sweep": {k: v for k, v in grid.items() if v is not None},
                "solver": _solver(n_max, patience, refine_top_k),
            },
        )
        spec = SweepSpec.from_config(run, direction, objective)
        print(f"\nSweeping {len(spec.cells())} cells ({spec.vertical_direction.value}, {spec.objective.value})...")

        engine = SweepEngine(max_concurrent=run.workers, dump_trajectories=dump_trajectories, dump_dt=dump_dt)
        started = time.perf_counter()
        cells, summary = asyncio.run(
            engine.run(spec, out_dir=run.output_dir, resume=resume, config_hash=config_hash(run))
        )
        elapsed = time.perf_counter() - started

        print(summary.to_report())
        if profile:
            print(
                f"Surrogate step: {summary.evaluations} trajectories in {summary.surrogate_s:.2f} s "
                f"({summary.trajectories_per_second:.0f} trajectories/s); "
                f"{len(cells)} cells in {elapsed:.1f} s ({summary.cells_per_second:.2f} cells/s)"
            )
        print(f"Results saved to {run.output_dir}")


@app.command("validate-model")
def validate_model(
    drive: Drive = typer.Option(Drive.RUNNING, "--drive", help="running or lifting"),
    model: Optional[Path] = typer.Option(None, "--model", help="Power-model JSON; default is the configured one"),
    config: Optional[Path] = typer.Option(None, "--config", help="Run configuration JSON"),
    direction: VerticalDirection = typer.Option(VerticalDirection.UP, "--direction", help="up or down"),
    points: int = typer.Option(5, "--points", help="Samples per axis"),
) -> None:
    """Print P(v, a) samples and the quadratic-fit residual of a power model."""
    from cranetraj.powerflow import configure_drive, fit_domain_for, fit_quadratic, nominal_efficiency

    with _exit_codes():
        run = _config(config, {})
        drive_config = run.running if drive is Drive.RUNNING else run.lifting
        base = load_power_model(model or drive_config.model_path, drive)
        configured = configure_drive(base, run.load_mass, direction.sign, lifting=drive is Drive.LIFTING)
        limits = drive_config.limits

        v = np.linspace(0.0, limits.v_max, points)
        a = np.linspace(-limits.a_max, limits.a_max, points)
        table = Table(title=f"P(v, a) [kW] of {configured.name}")
        table.add_column("v \\ a", justify="right")
        for ak in a:
            table.add_column(f"{ak:+.2f}", justify="right")
        for vk in v:
            row = configured.power(np.full_like(a, vk), a) / 1e3
            table.add_row(f"{vk:.2f}", *(f"{p:.2f}" for p in row))

        surrogate = fit_quadratic(configured, fit_domain_for(limits))
        console = Console()
        console.print(table)
        print(f"Quadratic fit residual (RMS): {surrogate.fit_residual:.2f} W")
        names = ("c00", "c10", "c01", "c20", "c02", "c11")
        print("Coefficients: " + ", ".join(f"{k}={c:.4g}" for k, c in zip(names, surrogate.coefficients)))
        if surrogate.c02_clamped:
            print("Warning: c02 was clamped to keep the surrogate convex in a")
        print(f"Efficiency at the nominal motor point: {nominal_efficiency(configured):.1%}")


@app.command()
def validate(
    n: int = typer.Option(3, "--n", help="Grid cases per axis"),
    cases: Optional[Path] = typer.Option(None, "--cases", help="JSON file with cases instead of a grid"),
    direction: VerticalDirection = typer.Option(VerticalDirection.UP, "--direction", help="up or down"),
    objective: Objective = typer.Option(Objective.CONSUMPTION, "--objective", help="recuperation or consumption"),
    config: Optional[Path] = typer.Option(None, "--config", help="Run configuration JSON"),
    starts: int = typer.Option(20, "--starts", help="Random starts of the direct oracle"),
    dt: float = typer.Option(0.05, "--dt", help="Time step of the direct oracle [s]"),
    tolerance: float = typer.Option(0.01, "--tolerance", help="Relative slack of the indirect objective"),
    max_concurrent: int = typer.Option(2, "--max-concurrent", "-c", help="Max concurrent cases"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output file"),
    n_max: Optional[int] = typer.Option(None, "--n-max", help="Largest number of intervals"),
    patience: Optional[int] = typer.Option(None, "--patience", help="Interval counts without improvement"),
    refine_top_k: Optional[int] = typer.Option(None, "--refine-top-k", help="Candidates refined with the full model"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug output"),
) -> None:
    """Benchmark the optimizer against a direct-transcription oracle."""
    from cranetraj.validation import DirectOracle, Validator

    _setup(verbose, False, None)
    with _exit_codes():
        run = _config(config, {"solver": _solver(n_max, patience, refine_top_k)})
        oracle = DirectOracle(dt=dt, starts=starts, seed=run.seed)
        validator = Validator(run, oracle, tolerance)
        entries = (
            validator.load_cases(cases)
            if cases is not None
            else validator.grid_cases(n, direction=direction, objective=objective)
        )
        print(f"\nBenchmarking {len(entries)} cases...")
        metrics = validator.validate_grid(entries, max_concurrent=max_concurrent)
        print(metrics.to_report())

        if output:
            _write_json(output, metrics.model_dump(mode="json"))
            print(f"\nDetailed results saved to {output}")

    if metrics.passed_cases < metrics.total_cases:
        raise typer.Exit(EXIT_SOLVER)


@app.command()
def version() -> None:
    """Show version information."""
    print(f"crane-traj version {__version__}")


if __name__ == "__main__":
    app()
