"""Optimization problem and result models."""

from enum import Enum
from typing import TYPE_CHECKING, Any

from pydantic import BaseModel, ConfigDict, Field
from rich.console import Console
from rich.panel import Panel

from cranetraj.models.kinematics import Axis, KinematicLimits
from cranetraj.models.power import PowerModel
from cranetraj.models.report import EnergyReport

if TYPE_CHECKING:
    from cranetraj.powerflow import SlowPowerProfile
    from cranetraj.trajectory import Trajectory


class Objective(str, Enum):
    """Energy criterion minimized for the optimized drive."""

    RECUPERATION = "recuperation"  # ∫|P_slow + P| dt
    CONSUMPTION = "consumption"  # ∫(P_slow + P) dt


class SolveMode(str, Enum):
    BASELINE = "baseline"
    SURROGATE = "surrogate"
    FULL = "full"


class ProblemSpec(BaseModel):
    """Optimization problem for the drive that is not time-critical."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    objective: Objective
    s0: float = Field(..., ge=0, description="Distance of the optimized drive [m]")
    T: float = Field(..., gt=0, description="Horizon [s]")
    limits: KinematicLimits
    model: PowerModel
    p_slow: Any = Field(..., description="SlowPowerProfile of the time-minimal drive")
    direction_sign: int = Field(1, description="±1, the sign of the travel direction")
    optimized_axis: Axis = Axis.X

    def objective_value(self, report: EnergyReport) -> float:
        return report.E_rec if self.objective is Objective.RECUPERATION else report.E_con

    @property
    def slow(self) -> "SlowPowerProfile":
        return self.p_slow


class SolveResult(BaseModel):
    """Outcome of a trajectory optimization."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    trajectory: Any = Field(..., description="Trajectory of the optimized drive")
    report: EnergyReport
    n_intervals: int = Field(..., ge=0)
    converged: bool
    objective_value: float
    iterations: int = 0
    plan_label: str = ""
    mode: SolveMode = SolveMode.SURROGATE
    constraint_violation: float = 0.0
    bound_violation: float = 0.0
    decision: list[float] | None = None
    plan_solves: int = 0
    evaluations: int = Field(0, ge=0, description="Trajectories evaluated by the NLP")
    kkt_residual: float = 0.0
    elapsed_s: float = 0.0
    surrogate_s: float = Field(0.0, ge=0, description="Wall time of the surrogate search [s]")
    message: str = ""

    @property
    def traj(self) -> "Trajectory":
        return self.trajectory

    @property
    def trajectories_per_second(self) -> float:
        """Throughput of the surrogate search."""
        return self.evaluations / self.surrogate_s if self.surrogate_s > 0 else 0.0

    def to_report(self, baseline: "SolveResult | None" = None, slow_axis: Axis | None = None) -> str:
        """Pretty summary with Rich formatting."""
        console = Console(width=80, force_terminal=True)

        status = "[bold green]converged[/bold green]" if self.converged else "[bold red]not converged[/bold red]"
        lines = [
            f"[bold cyan]{self.plan_label or 'trajectory'}[/bold cyan]  |  {status}  |  mode: {self.mode.value}",
            "",
            f"[dim]Horizon:[/dim] T = {self.report.T:.4f} s",
        ]
        if slow_axis is not None:
            lines.append(f"[dim]Slow axis:[/dim] {slow_axis.value}")
        lines.extend(
            [
                f"[dim]Segments:[/dim] {self.n_intervals}",
                f"[dim]E_rec:[/dim] {self.report.E_rec / 1e3:.3f} kJ",
                f"[dim]E_con:[/dim] {self.report.E_con / 1e3:.3f} kJ",
                f"[dim]Objective:[/dim] {self.objective_value / 1e3:.3f} kJ",
            ]
        )
        if self.report.classification is not None:
            lines.append(f"[dim]Class:[/dim] {self.report.classification.label}")
        if baseline is not None:
            base = baseline.objective_value
            rate = (base - self.objective_value) / abs(base) if base != 0 else 0.0
            lines.append(f"[dim]Baseline:[/dim] {base / 1e3:.3f} kJ")
            lines.append(f"[bold green]Saving rate: {rate:.2%}[/bold green]")
        if self.message:
            lines.append(f"[dim]{self.message}[/dim]")

        panel = Panel(
            "\n".join(lines),
            title="[bold white]Trajectory Optimization[/bold white]",
            border_style="blue",
            padding=(1, 2),
        )
        with console.capture() as capture:
            console.print(panel)
        return capture.get()
