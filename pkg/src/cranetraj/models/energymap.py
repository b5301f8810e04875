"""Energy-map models: sweep grids, map cells and sweep summaries."""

import math
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from rich.console import Console
from rich.panel import Panel

from cranetraj.config.settings import ClassificationSettings, DriveConfig, RunConfig, SolverSettings
from cranetraj.constants import COORDINATE_DECIMALS
from cranetraj.models.kinematics import Axis, HorizontalDirection, VerticalDirection
from cranetraj.models.problem import Objective


def _axis_values(lo: float, hi: float, step: float) -> list[float]:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, COORDINATE_DECIMALS) for k in range(count)]


class SweepSpec(BaseModel):
    """One energy map: a distance grid for one direction and objective."""

    model_config = ConfigDict(frozen=True)

    s_x_min: float = Field(0.5, ge=0)
    s_x_max: float = Field(30.0, ge=0)
    s_x_step: float = Field(0.5, gt=0)
    s_y_min: float = Field(0.5, ge=0)
    s_y_max: float = Field(20.0, ge=0)
    s_y_step: float = Field(0.5, gt=0)
    vertical_direction: VerticalDirection = VerticalDirection.UP
    horizontal_direction: HorizontalDirection = HorizontalDirection.RIGHT
    objective: Objective = Objective.CONSUMPTION
    load_mass: float = Field(1000.0, ge=0)
    running: DriveConfig
    lifting: DriveConfig
    solver: SolverSettings = SolverSettings()
    classification: ClassificationSettings = ClassificationSettings()

    @model_validator(mode="after")
    def _ordered_ranges(self) -> "SweepSpec":
        if self.s_x_max < self.s_x_min or self.s_y_max < self.s_y_min:
            raise ValueError("Sweep ranges must satisfy min ≤ max")
        return self

    @classmethod
    def from_config(
        cls,
        config: RunConfig,
        vertical_direction: VerticalDirection | None = None,
        objective: Objective | None = None,
    ) -> "SweepSpec":
        grid = config.sweep
        return cls(
            s_x_min=grid.s_x_min,
            s_x_max=grid.s_x_max,
            s_x_step=grid.s_x_step,
            s_y_min=grid.s_y_min,
            s_y_max=grid.s_y_max,
            s_y_step=grid.s_y_step,
            vertical_direction=vertical_direction or grid.vertical_direction,
            horizontal_direction=grid.horizontal_direction,
            objective=objective or grid.objective,
            load_mass=config.load_mass,
            running=config.running,
            lifting=config.lifting,
            solver=config.solver,
            classification=config.classification,
        )

    def s_x_values(self) -> list[float]:
        return _axis_values(self.s_x_min, self.s_x_max, self.s_x_step)

    def s_y_values(self) -> list[float]:
        return _axis_values(self.s_y_min, self.s_y_max, self.s_y_step)

    def cells(self) -> list[tuple[float, float]]:
        """Grid coordinates in (s_x, s_y) order, skipping the origin."""
        return [
            (s_x, s_y)
            for s_x in self.s_x_values()
            for s_y in self.s_y_values()
            if s_x > 0 or s_y > 0
        ]


class MapCell(BaseModel):
    """One cell of an energy map."""

    s_x: float
    s_y: float
    direction: VerticalDirection
    objective: Objective
    dominant_axis: Axis | None = None
    T: float = math.nan
    E_opt: float = math.nan
    E_base: float = math.nan
    saving_rate: float = math.nan
    classification: str = "unknown"
    n_segments: int = 0
    converged: bool = False
    E_rec: float | None = None
    E_con: float | None = None
    error: str | None = None
    evaluations: int = Field(0, ge=0, description="Trajectories evaluated in the surrogate step")
    surrogate_s: float = Field(0.0, ge=0, description="Wall time of the surrogate step [s]")

    @property
    def key(self) -> tuple[float, float]:
        return (round(self.s_x, COORDINATE_DECIMALS), round(self.s_y, COORDINATE_DECIMALS))

    @property
    def E_con_sign(self) -> int | None:
        if self.E_con is None or math.isnan(self.E_con):
            return None
        return 1 if self.E_con >= 0 else -1

    def to_row(self) -> dict[str, Any]:
        return {
            "s_x": self.s_x,
            "s_y": self.s_y,
            "direction": self.direction.value,
            "objective": self.objective.value,
            "dominant_axis": self.dominant_axis.value if self.dominant_axis else "",
            "T": self.T,
            "E_opt_J": self.E_opt,
            "E_base_J": self.E_base,
            "saving_rate": self.saving_rate,
            "classification": self.classification,
            "n_segments": self.n_segments,
            "converged": self.converged,
            "E_rec_J": self.E_rec if self.E_rec is not None else math.nan,
            "E_con_J": self.E_con if self.E_con is not None else math.nan,
            "error": self.error or "",
        }

    @classmethod
    def from_row(cls, row: dict[str, Any]) -> "MapCell":
        def optional(value: Any) -> float | None:
            if value is None or (isinstance(value, float) and math.isnan(value)):
                return None
            return float(value)

        axis = row.get("dominant_axis")
        error = row.get("error")
        return cls(
            s_x=float(row["s_x"]),
            s_y=float(row["s_y"]),
            direction=VerticalDirection(row["direction"]),
            objective=Objective(row["objective"]),
            dominant_axis=Axis(axis) if isinstance(axis, str) and axis else None,
            T=float(row["T"]),
            E_opt=float(row["E_opt_J"]),
            E_base=float(row["E_base_J"]),
            saving_rate=float(row["saving_rate"]),
            classification=str(row["classification"]),
            n_segments=int(row["n_segments"]),
            converged=str(row["converged"]).lower() == "true",
            E_rec=optional(row.get("E_rec_J")),
            E_con=optional(row.get("E_con_J")),
            error=error if isinstance(error, str) and error else None,
        )


class CurvePoints(BaseModel):
    """A polyline as coordinate arrays."""

    s_x: list[float] = Field(default_factory=list)
    s_y: list[float] = Field(default_factory=list)

    @classmethod
    def from_pairs(cls, pairs: list[tuple[float, float]]) -> "CurvePoints":
        return cls(s_x=[p[0] for p in pairs], s_y=[p[1] for p in pairs])


class SweepSummary(BaseModel):
    """Aggregate statistics of one energy map, over converged cells only."""

    direction: VerticalDirection
    objective: Objective
    n_cells: int = 0
    n_converged: int = 0
    n_unconverged: int = 0
    n_failed: int = 0
    mean_E_rec_J: float | None = None
    mean_E_con_J: float | None = None
    mean_E_opt_J: float | None = None
    mean_saving_rate: float | None = None
    min_saving_rate: float | None = None
    classification_counts: dict[str, int] = Field(default_factory=dict)
    dominance_curve: CurvePoints = Field(default_factory=CurvePoints)
    econ_sign_curve: CurvePoints = Field(default_factory=CurvePoints)
    config_hash: str = ""
    version: str = ""
    elapsed_s: float = 0.0
    cells_per_second: float = 0.0
    evaluations: int = Field(0, ge=0, description="Surrogate-step trajectories, summed over cells")
    surrogate_s: float = Field(0.0, ge=0, description="Surrogate-step time, summed over cells [s]")

    @property
    def trajectories_per_second(self) -> float:
        """Surrogate-step throughput of one worker."""
        return self.evaluations / self.surrogate_s if self.surrogate_s > 0 else 0.0

    @staticmethod
    def _mean(values: list[float]) -> float | None:
        return float(np.mean(values)) if values else None

    def to_report(self) -> str:
        """Pretty summary with Rich formatting."""
        console = Console(width=80, force_terminal=True)

        def kj(value: float | None) -> str:
            return "n/a" if value is None else f"{value / 1e3:.2f} kJ"

        rate = "n/a" if self.mean_saving_rate is None else f"{self.mean_saving_rate:.2%}"
        lines = [
            f"[bold cyan]{self.direction.value}-travel[/bold cyan]  |  objective: {self.objective.value}",
            "",
            f"[dim]Cells:[/dim] {self.n_cells}  (converged {self.n_converged}, "
            f"unconverged {self.n_unconverged}, failed {self.n_failed})",
            f"[dim]Mean E_rec:[/dim] {kj(self.mean_E_rec_J)}",
            f"[dim]Mean E_con:[/dim] {kj(self.mean_E_con_J)}",
            f"[bold green]Mean saving rate: {rate}[/bold green]",
            "",
            "[dim]Classes:[/dim]",
        ]
        for label, count in sorted(self.classification_counts.items()):
            lines.append(f"  {label}: {count}")
        if self.cells_per_second:
            lines.append(f"\n[dim]Throughput:[/dim] {self.cells_per_second:.2f} cells/s")

        panel = Panel(
            "\n".join(lines),
            title="[bold white]Energy Map[/bold white]",
            border_style="blue",
            padding=(1, 2),
        )
        with console.capture() as capture:
            console.print(panel)
        return capture.get()


class CellTask(BaseModel):
    """Work item of a sweep: one grid cell. Picklable for process pools."""

    model_config = ConfigDict(frozen=True)

    s_x: float = Field(..., ge=0)
    s_y: float = Field(..., ge=0)
    sweep: SweepSpec
    dump_path: Path | None = None
    dump_dt: float | None = Field(None, gt=0)
