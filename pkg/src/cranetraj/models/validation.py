"""Benchmark models for the direct-transcription oracle.

The indirect optimizer searches a low-dimensional space of segment plans, so
it could in principle miss a better trajectory. The oracle solves the same
problem by brute force (velocity nodes every dt, bounds imposed pointwise)
from many random starts. A case passes when the indirect optimum is no worse
than the oracle's by more than the tolerance, which covers the oracle's
discretization error.
"""

from pydantic import BaseModel, Field

from cranetraj.models.kinematics import VerticalDirection
from cranetraj.models.problem import Objective


class OracleCase(BaseModel):
    """One travel to benchmark."""

    s_x: float = Field(..., ge=0)
    s_y: float = Field(..., ge=0)
    direction: VerticalDirection = VerticalDirection.UP
    objective: Objective = Objective.CONSUMPTION

    @property
    def display(self) -> str:
        return f"s_x={self.s_x:g} m, s_y={self.s_y:g} m, {self.direction.value}, {self.objective.value}"


class OracleResult(BaseModel):
    """Indirect vs direct objective of one case."""

    case: OracleCase
    E_indirect: float
    E_direct: float
    relative_gap: float  # (E_indirect − E_direct) / |E_direct|
    passed: bool
    direct_starts_converged: int = 0
    error: str | None = None


class OracleMetrics(BaseModel):
    """Aggregate benchmark results."""

    tolerance: float = 0.01
    total_cases: int = 0
    passed_cases: int = 0
    pass_rate: float = 0.0
    max_gap: float = 0.0
    mean_gap: float = 0.0
    failure_analysis: list[dict[str, str]] = Field(default_factory=list)

    def add_result(self, result: OracleResult) -> None:
        self.total_cases += 1
        if result.passed:
            self.passed_cases += 1
            return
        self.failure_analysis.append(
            {
                "case": result.case.display,
                "E_indirect": f"{result.E_indirect / 1e3:.3f} kJ",
                "E_direct": f"{result.E_direct / 1e3:.3f} kJ",
                "gap": f"{result.relative_gap:+.2%}",
                "error": result.error or "",
                "command": (
                    f"cranetraj optimize --sx {result.case.s_x:g} --sy {result.case.s_y:g} "
                    f"--direction {result.case.direction.value} --objective {result.case.objective.value}"
                ),
            }
        )

    def calculate(self, results: list[OracleResult]) -> None:
        if not results:
            return
        for result in results:
            self.add_result(result)
        self.pass_rate = self.passed_cases / self.total_cases
        gaps = [r.relative_gap for r in results if r.error is None]
        if gaps:
            self.max_gap = max(gaps)
            self.mean_gap = sum(gaps) / len(gaps)

    def to_report(self) -> str:
        lines = [
            "=" * 80,
            "DIRECT-ORACLE BENCHMARK",
            "=" * 80,
            f"\nTotal Cases: {self.total_cases}",
            f"Passed: {self.passed_cases}",
            f"Pass Rate: {self.pass_rate:.2%}",
            f"Tolerance: {self.tolerance:.2%}",
            f"Max Gap: {self.max_gap:+.3%}",
            f"Mean Gap: {self.mean_gap:+.3%}",
        ]
        if self.failure_analysis:
            lines.append(f"\n{'-' * 80}")
            lines.append(f"FAILURES ({len(self.failure_analysis)})")
            lines.append(f"{'-' * 80}")
            for idx, failure in enumerate(self.failure_analysis, 1):
                lines.append(f"\n{idx}. {failure['case']}")
                lines.append(
                    f"   Indirect: {failure['E_indirect']} | Direct: {failure['E_direct']} | Gap: {failure['gap']}"
                )
                if failure["error"]:
                    lines.append(f"   Error: {failure['error']}")
                lines.append(f"   Test: {failure['command']}")
        lines.append(f"\n{'=' * 80}")
        return "\n".join(lines)
