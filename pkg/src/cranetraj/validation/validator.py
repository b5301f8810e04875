"""Benchmark of the indirect optimizer against a direct-transcription oracle.

Key Design:
- The oracle discretizes the velocity on a uniform grid and hands the
  problem to a general NLP solver from many seeded random starts
- Oracle optima are re-evaluated exactly on the piecewise-linear velocity,
  so both methods are compared with the same quadrature
- Semaphore for concurrency control; failures are recorded, not raised
"""

import asyncio
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from cranetraj.config.settings import RunConfig
from cranetraj.energymap import build_problem
from cranetraj.models.kinematics import TravelSpec, VerticalDirection
from cranetraj.models.problem import Objective, ProblemSpec
from cranetraj.models.validation import OracleCase, OracleMetrics, OracleResult
from cranetraj.optimizer import baseline, optimize
from cranetraj.trajectory import Segment, Trajectory, energies

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class OracleSolution:
    objective_value: float
    trajectory: Trajectory
    starts_converged: int


class DirectOracle:
    """Direct transcription: velocity nodes every dt, bounds imposed pointwise.

    Node velocities v_1 … v_{N−1} are the unknowns (v_0 = v_N = 0).
    Accelerations are forward differences per interval, jerks are differences
    of those with zero acceleration before the start and after the end.
    """

    def __init__(
        self,
        dt: float = 0.05,
        starts: int = 20,
        seed: int = 0,
        smoothing_eps: float = 1.0,
        max_iterations: int = 300,
        perturbation: float = 0.05,
    ) -> None:
        self.dt = dt
        self.starts = starts
        self.seed = seed
        self.smoothing_eps = smoothing_eps
        self.max_iterations = max_iterations
        self.perturbation = perturbation

    def solve(self, problem: ProblemSpec) -> OracleSolution:
        limits, T = problem.limits, problem.T
        N = max(int(math.ceil(T / self.dt)), 2)
        h = T / N
        M = N - 1

        # a = Ma @ u, j = Mj @ u
        diff = (np.eye(N + 1, k=1) - np.eye(N + 1))[:N] / h
        Ma = diff[:, 1:-1]
        padded = np.vstack([np.zeros(M), Ma, np.zeros(M)])
        Mj = np.diff(padded, axis=0) / h
        G = np.vstack([-Ma, Ma, -Mj, Mj])
        c = np.concatenate(
            [np.full(2 * N, limits.a_max), np.full(2 * (N + 1), limits.j_max)]
        )

        t_mid = (np.arange(N) + 0.5) * h
        p_slow = problem.p_slow(t_mid)
        recuperation = problem.objective is Objective.RECUPERATION
        eps = self.smoothing_eps
        hv = 1e-6 * limits.v_max
        ha = 1e-6 * limits.a_max

        def full(u: FloatArray) -> FloatArray:
            return np.concatenate(([0.0], u, [0.0]))

        def objective(u: FloatArray) -> tuple[float, FloatArray]:
            v = full(u)
            v_mid = 0.5 * (v[:-1] + v[1:])
            a = np.diff(v) / h
            x = p_slow + problem.model.power(v_mid, a)
            p_v = (problem.model.power(v_mid + hv, a) - problem.model.power(v_mid - hv, a)) / (2.0 * hv)
            p_a = (problem.model.power(v_mid, a + ha) - problem.model.power(v_mid, a - ha)) / (2.0 * ha)
            if recuperation:
                root = np.sqrt(x * x + eps * eps)
                value, slope = float(h * np.sum(root)), x / root
            else:
                value, slope = float(h * np.sum(x)), np.ones_like(x)
            g_v, g_a = h * slope * p_v, h * slope * p_a
            grad = np.zeros(N + 1)
            grad[:-1] += 0.5 * g_v - g_a / h
            grad[1:] += 0.5 * g_v + g_a / h
            return value, grad[1:-1]

        constraints = [
            {"type": "eq", "fun": lambda u: h * np.sum(u) - problem.s0, "jac": lambda u: np.full(M, h)},
            {"type": "ineq", "fun": lambda u: c + G @ u, "jac": lambda u: G},
        ]
        bounds = [(0.0, limits.v_max)] * M

        nodes = np.linspace(0.0, T, N + 1)[1:-1]
        _, reference, _, _ = baseline(problem).traj.sample(nodes)
        rng = np.random.default_rng(self.seed)

        best_u: FloatArray | None = None
        best_value = math.inf
        converged = 0
        for k in range(self.starts):
            u0 = reference.copy()
            if k:
                u0 = np.clip(u0 + rng.normal(0.0, self.perturbation * limits.v_max, M), 0.0, limits.v_max)
            res = minimize(
                objective,
                u0,
                jac=True,
                method="SLSQP",
                bounds=bounds,
                constraints=constraints,
                options={"maxiter": self.max_iterations, "ftol": 1e-10},
            )
            u = np.clip(res.x, 0.0, limits.v_max)
            feasible = abs(h * np.sum(u) - problem.s0) <= 1e-6 * max(problem.s0, 1.0) and np.all(
                c + G @ u >= -1e-6 * limits.a_max
            )
            if not feasible:
                logger.debug(f"Oracle start {k} infeasible: {res.message}")
                continue
            converged += 1
            if res.fun < best_value:
                best_value, best_u = float(res.fun), u

        if best_u is None:
            logger.warning("No oracle start converged; falling back to the baseline")
            best_u = reference

        trajectory = self._trajectory(full(best_u), h, problem.direction_sign)
        report = energies(trajectory, problem.model, problem.p_slow)
        return OracleSolution(problem.objective_value(report), trajectory, converged)

    @staticmethod
    def _trajectory(v: FloatArray, h: float, direction_sign: int) -> Trajectory:
        """Piecewise-linear velocity through the nodes."""
        a = np.diff(v) / h
        return Trajectory(
            tuple(Segment.slope(float(v0), float(ak), h) for v0, ak in zip(v[:-1], a)),
            direction_sign,
        )


class Validator:
    """Validator for benchmarking the indirect optimizer against the oracle."""

    def __init__(
        self,
        config: RunConfig | None = None,
        oracle: DirectOracle | None = None,
        tolerance: float = 0.01,
    ) -> None:
        """Initialize the validator.

        Args:
            config: Run configuration (limits, models, solver settings)
            oracle: Direct-transcription oracle
            tolerance: Relative slack granted to the indirect objective
        """
        self.config = config or RunConfig()
        self.oracle = oracle or DirectOracle(seed=self.config.seed)
        self.tolerance = tolerance

    @staticmethod
    def grid_cases(
        n: int,
        s_x_range: tuple[float, float] = (5.0, 25.0),
        s_y_range: tuple[float, float] = (2.0, 15.0),
        direction: VerticalDirection = VerticalDirection.UP,
        objective: Objective = Objective.CONSUMPTION,
    ) -> list[OracleCase]:
        """n × n cases spread evenly over the given ranges."""
        return [
            OracleCase(s_x=round(float(s_x), 9), s_y=round(float(s_y), 9), direction=direction, objective=objective)
            for s_x in np.linspace(*s_x_range, n)
            for s_y in np.linspace(*s_y_range, n)
        ]

    @staticmethod
    def load_cases(path: str | Path) -> list[OracleCase]:
        """Load cases from a JSON list (or a dict with a "cases" key).

        Raises:
            FileNotFoundError: If file does not exist
            ValueError: If JSON is invalid
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Case file not found: {path}")
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in case file: {e}") from e
        if isinstance(data, dict) and "cases" in data:
            data = data["cases"]
        if not isinstance(data, list):
            raise ValueError("Case file must hold a list of cases")
        return [OracleCase(**entry) for entry in data]

    def validate_single(self, case: OracleCase) -> OracleResult:
        """Solve one case both ways and compare the objectives."""
        travel = TravelSpec(
            s_x=case.s_x,
            s_y=case.s_y,
            vertical_direction=case.direction,
            load_mass=self.config.load_mass,
        )
        problem, _, _ = build_problem(travel, self.config, case.objective)
        indirect = optimize(problem, self.config.solver).objective_value
        direct = self.oracle.solve(problem)
        scale = max(abs(direct.objective_value), 1e-12)
        gap = (indirect - direct.objective_value) / scale
        return OracleResult(
            case=case,
            E_indirect=indirect,
            E_direct=direct.objective_value,
            relative_gap=gap,
            passed=gap <= self.tolerance,
            direct_starts_converged=direct.starts_converged,
        )

    async def validate_dataset(self, cases: list[OracleCase], max_concurrent: int = 2) -> OracleMetrics:
        """Validate all cases.

        Args:
            cases: Travels to benchmark
            max_concurrent: Maximum concurrent cases

        Returns:
            Aggregate benchmark metrics
        """
        logger.info(f"Starting oracle benchmark of {len(cases)} cases")
        semaphore = asyncio.Semaphore(max_concurrent)

        async def validate_with_semaphore(case: OracleCase) -> OracleResult:
            async with semaphore:
                return await asyncio.to_thread(self.validate_single, case)

        results = await asyncio.gather(*(validate_with_semaphore(c) for c in cases), return_exceptions=True)

        oracle_results = []
        for case, result in zip(cases, results):
            if isinstance(result, BaseException):
                logger.error(f"Benchmark failed for {case.display}: {result}")
                result = OracleResult(
                    case=case,
                    E_indirect=math.nan,
                    E_direct=math.nan,
                    relative_gap=math.nan,
                    passed=False,
                    error=f"{type(result).__name__}: {str(result).splitlines()[0] if str(result) else ''}",
                )
            oracle_results.append(result)

        metrics = OracleMetrics(tolerance=self.tolerance)
        metrics.calculate(oracle_results)
        logger.info(f"Oracle benchmark complete: {metrics.passed_cases}/{metrics.total_cases} passed")
        return metrics

    def validate_grid(self, cases: list[OracleCase], max_concurrent: int = 2) -> OracleMetrics:
        return asyncio.run(self.validate_dataset(cases, max_concurrent))
