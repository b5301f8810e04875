"""The nonlinear program of one fixed segment plan.

ARCHITECTURE:
    SegmentPlan + decision vector → PlanProblem.evaluate → Trajectory, equalities, inequalities,
                                                           objective and their derivatives
                                  → SLSQP (square and underdetermined plans)
                                  → least_squares (overdetermined plans, feasibility polish)

Key Design:
- The decision vector is scaled: durations by T, EL boundary velocities by
  v_max, λ_G by P_char / v_max
- The last duration is T minus the others, so every iterate spans the
  horizon exactly; its lower bound becomes an inequality constraint
- Segments are chained from rest; the kind-specific entry conditions (a = ±a_max
  on CD_a, v = v_max and a = 0 on a cruise, v = a = 0 on standstill, the arc's
  boundary state on EL) become equality constraints
- Kinematic bounds are inequality constraints at the points where each
  segment kind can attain its extremes: the velocity turning point of a jerk
  ramp, the end of a slope, sample points of an EL arc
- Derivatives are propagated forward through the chain of segments, exactly
  for the closed-form surrogate arcs and CD segments; plans with a full-model
  EL arc fall back to central differences
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import least_squares, lsq_linear, minimize

from cranetraj.config.settings import SolverSettings
from cranetraj.constants import (
    EL_RESIDUAL_TOLERANCE,
    FEASIBILITY_POLISH_EVALUATIONS,
    HORIZON_TIE_TOLERANCE,
    SEGMENT_EPSILON,
)
from cranetraj.el_solver import (
    ELSegmentSolution,
    el_boundary_sensitivities,
    el_closed_form_boundary,
    el_numeric_bvp,
    el_residual,
)
from cranetraj.errors import DomainError, InfeasibleError, SingularELError
from cranetraj.kinematics import minimal_duration
from cranetraj.models.power import PowerFunction, QuadraticSurrogate
from cranetraj.models.problem import Objective, ProblemSpec, SolveMode, SolveResult
from cranetraj.optimizer.plans import PlanStep, SegmentPlan, seed_decision
from cranetraj.powerflow import characteristic_power, first_partials, fit_domain_for, fit_quadratic
from cranetraj.trajectory import Segment, SegmentKind, Trajectory, check_bounds, distance, energies

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

_CACHE_LIMIT = 4096

# columns of a segment's local partials: entry state, duration at fixed ξ, EL parameters
_LOCAL_COLUMNS = 6


@dataclass(frozen=True)
class Evaluation:
    """Everything the NLP needs at one decision vector.

    The derivative fields are None when the problem differentiates
    numerically.
    """

    trajectory: Trajectory
    equalities: FloatArray
    inequalities: FloatArray
    objective: float
    gradient: FloatArray | None = None
    eq_jacobian: FloatArray | None = None
    ineq_jacobian: FloatArray | None = None


def check_feasible(spec: ProblemSpec) -> float:
    """Time-minimal duration of the optimized drive; raises when it exceeds T."""
    t_min = minimal_duration(spec.s0, spec.limits)
    if spec.T < t_min - HORIZON_TIE_TOLERANCE * max(1.0, t_min):
        raise InfeasibleError(f"{spec.s0:g} m need at least {t_min:.6f} s, horizon is {spec.T:.6f} s")
    return t_min


class PlanProblem:
    """Objective, constraints and their derivatives for one plan.

    The scaled vector ``z`` holds the first n−1 durations, then the EL
    parameters. Native decision vectors hold all n durations.
    """

    def __init__(
        self,
        plan: SegmentPlan,
        spec: ProblemSpec,
        surrogate: QuadraticSurrogate,
        mode: SolveMode = SolveMode.SURROGATE,
        settings: SolverSettings | None = None,
    ):
        self.plan = plan
        self.spec = spec
        self.surrogate = surrogate
        self.mode = mode
        self.settings = settings or SolverSettings()
        self.power_fn: PowerFunction = surrogate if mode is SolveMode.SURROGATE else spec.model
        self.analytic = mode is SolveMode.SURROGATE or not plan.has_el
        self.recuperation = spec.objective is Objective.RECUPERATION

        limits = spec.limits
        p_char = characteristic_power(spec.model, limits)
        self.lambda_scale = p_char / limits.v_max
        self.energy_scale = p_char * spec.T
        self.distance_scale = max(spec.s0, 1.0)
        self.min_share = self.settings.min_segment / spec.T
        self.n_free = plan.n - 1

        x, w = np.polynomial.legendre.leggauss(self.settings.quadrature_nodes)
        panels = self.settings.quadrature_panels
        self._nodes = np.concatenate([(k + 0.5 * (x + 1.0)) / panels for k in range(panels)])
        self._weights = np.tile(0.5 * w / panels, panels)
        self._el_checks = np.linspace(0.0, 1.0, self.settings.el_samples)

        # native durations and EL parameters as linear maps of z
        self._D = np.zeros((plan.n, self.size))
        self._P = np.zeros((3, self.size))
        for k in range(self.n_free):
            self._D[k, k] = spec.T
            self._D[plan.n - 1, k] = -spec.T
        if plan.has_el:
            for i, scale in enumerate(self._el_scales()):
                self._P[i, self.n_free + i] = scale

        self._cache: dict[bytes, Evaluation] = {}
        self._fd_cache: dict[bytes, tuple[FloatArray, FloatArray, FloatArray]] = {}
        self.evaluations = 0

    # ------------------------------------------------------------------ scaling

    @property
    def size(self) -> int:
        return self.plan.n_variables - 1

    def _el_scales(self) -> FloatArray:
        v_max = self.spec.limits.v_max
        return np.array([v_max, v_max, self.lambda_scale]) if self.plan.has_el else np.zeros(0)

    def to_scaled(self, decision: FloatArray) -> FloatArray:
        decision = np.asarray(decision, dtype=float)
        n = self.plan.n
        return np.concatenate([decision[: n - 1] / self.spec.T, decision[n:] / self._el_scales()])

    def to_native(self, z: FloatArray) -> FloatArray:
        z = np.asarray(z, dtype=float)
        durations = z[: self.n_free] * self.spec.T
        last = self.spec.T - float(np.sum(durations))
        return np.concatenate([durations, [last], z[self.n_free :] * self._el_scales()])

    def bounds(self) -> list[tuple[float | None, float | None]]:
        bounds: list[tuple[float | None, float | None]] = [(self.min_share, 1.0)] * self.n_free
        if self.plan.has_el:
            bounds += [(0.0, 1.0), (0.0, 1.0), (None, None)]
        return bounds

    def _bound_arrays(self) -> tuple[FloatArray, FloatArray]:
        lo = np.array([b[0] if b[0] is not None else -np.inf for b in self.bounds()])
        hi = np.array([b[1] if b[1] is not None else np.inf for b in self.bounds()])
        return lo, hi

    def last_share(self, z: FloatArray) -> float:
        """Slack of the derived last duration above its lower bound (scaled)."""
        return 1.0 - float(np.sum(np.asarray(z)[: self.n_free])) - self.min_share

    # --------------------------------------------------------------- evaluation

    def _arc(self, lambda_G: float, v_start: float, v_end: float, duration: float) -> ELSegmentSolution:
        if self.mode is SolveMode.SURROGATE:
            return el_closed_form_boundary(self.surrogate, lambda_G, v_start, v_end, duration, check=False)
        try:
            guess: ELSegmentSolution | None = el_closed_form_boundary(
                self.surrogate, lambda_G, v_start, v_end, duration, check=False
            )
        except SingularELError:
            guess = None
        return el_numeric_bvp(
            self.spec.model,
            lambda_G,
            v_start,
            v_end,
            duration,
            limits=self.spec.limits,
            guess=guess,
            check=False,
        )

    def evaluate(self, z: FloatArray) -> Evaluation:
        z = np.asarray(z, dtype=float)
        key = z.tobytes()
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if len(self._cache) > _CACHE_LIMIT:
            self._cache.clear()
        result = self._evaluate(z)
        self._cache[key] = result
        self.evaluations += 1
        return result

    def _local(
        self, step: PlanStep, segment: Segment, d: float, xi: FloatArray, params: FloatArray
    ) -> tuple[FloatArray, FloatArray | None]:
        """Local (x, v, a, j) at τ = ξ·d, and their partials.

        Partials have shape (4, m, 6), with respect to the entry velocity and
        acceleration, the duration at fixed ξ, and (v_start, v_end, λ_G).
        """
        tau = xi * d
        if step.kind is SegmentKind.EL and self.analytic:
            v_s, v_e, lambda_G = (float(p) for p in params)
            values, partials = el_boundary_sensitivities(self.surrogate, lambda_G, v_s, v_e, d, tau)
            k2 = self.surrogate.c20 / self.surrogate.c02
            local = np.zeros((4, len(xi), _LOCAL_COLUMNS))
            local[:, :, 3:] = partials[:, :, :3]
            rates = np.vstack([values[1], values[2], values[3], k2 * values[2]])
            local[:, :, 2] = partials[:, :, 3] + xi * rates
            return values, local

        values = np.vstack(segment.sample(tau))
        if not self.analytic:
            return values, None
        local = np.zeros((4, len(xi), _LOCAL_COLUMNS))
        if step.kind is SegmentKind.CD_J:
            local[0, :, 0] = tau
            local[1, :, 0] = 1.0
            local[0, :, 1] = 0.5 * tau * tau
            local[1, :, 1] = tau
            local[2, :, 1] = 1.0
            local[:3, :, 2] = xi * values[1:]
        elif step.kind is SegmentKind.CD_A:
            local[0, :, 0] = tau
            local[1, :, 0] = 1.0
            local[:2, :, 2] = xi * values[1:3]
        else:
            local[0, :, 2] = xi * values[1]
        return values, local

    def _evaluate(self, z: FloatArray) -> Evaluation:
        spec, plan, limits = self.spec, self.plan, self.spec.limits
        V, A, J = limits.v_max, limits.a_max, limits.j_max
        native = self.to_native(z)
        durations = np.maximum(native[: plan.n], 2.0 * SEGMENT_EPSILON)
        params = native[plan.n :]
        sens = self.analytic
        size = self.size
        n_nodes = len(self._nodes)

        eq: list[float] = []
        eq_rows: list[FloatArray] = []
        ineq: list[float] = []
        ineq_rows: list[FloatArray] = []
        segments: list[Segment] = []
        energy = 0.0
        grad = np.zeros(size)

        v = a = t0 = x = 0.0
        dv, da, dt, dx = (np.zeros(size) for _ in range(4))

        def bound_rows(value: float, row: FloatArray | None, limit: float, lower: bool) -> None:
            # limit − value ≥ 0, and value + limit ≥ 0 (or value ≥ 0 for velocities)
            ineq.extend([1.0 - value / limit, value / limit + (0.0 if lower else 1.0)])
            if sens:
                ineq_rows.extend([-row / limit, row / limit])  # type: ignore[operator]

        for i, (step, d) in enumerate(zip(plan.steps, durations)):
            d = float(d)
            nxt = plan.steps[i + 1] if i + 1 < plan.n else None

            if step.kind is SegmentKind.CD_J:
                segment = Segment.ramp(v, a, step.sign * J, d)
                turn = min(max(-a / (step.sign * J * d), 0.0), 1.0)
                xi = np.concatenate([self._nodes, [turn, 1.0]])
            elif step.kind is SegmentKind.CD_A:
                eq.append((a - step.sign * A) / A)
                eq_rows.append(da / A)
                segment = Segment.slope(v, step.sign * A, d)
                xi = np.append(self._nodes, 1.0)
            elif step.kind is SegmentKind.CD_V:
                target = V if step.sign else 0.0
                if i > 0:
                    eq.extend([(v - target) / V, a / A])
                    eq_rows.extend([dv / V, da / A])
                segment = Segment.cruise(target, d)
                xi = np.append(self._nodes, 1.0)
            else:
                v_s, v_e, lambda_G = (float(p) for p in params)
                arc = self._arc(lambda_G, v_s, v_e, d)
                segment = Segment.euler_lagrange(arc)
                xi = np.concatenate([self._nodes, self._el_checks])
            segments.append(segment)

            values, local = self._local(step, segment, d, xi, params)
            if sens:
                basis = np.vstack([dv, da, self._D[i], self._P])
                total = np.einsum("qmk,ks->qms", local, basis)
            else:
                total = np.zeros((4, len(xi), 0))

            if step.kind is SegmentKind.EL:
                eq.extend([(v - v_s) / V, (a - values[2, n_nodes]) / A])
                if sens:
                    eq_rows.extend([(dv - self._P[0]) / V, (da - total[2, n_nodes]) / A])

            # objective; the integral of P_slow is constant unless it sits inside |·|
            vq, aq = values[1, :n_nodes], values[2, :n_nodes]
            tq = t0 + d * self._nodes
            p = self.power_fn.power(vq, aq)
            if self.recuperation:
                p = p + spec.p_slow(tq)
                smooth = np.sqrt(p * p + self.settings.smoothing_eps**2)
                slope = p / smooth
                p = smooth
            segment_energy = float(np.dot(self._weights, p))
            energy += d * segment_energy
            if sens:
                p_v, p_a = first_partials(self.power_fn, vq, aq, v_scale=V, a_scale=A)
                dp = p_v[:, None] * total[1, :n_nodes] + p_a[:, None] * total[2, :n_nodes]
                weights = self._weights
                if self.recuperation:
                    dtime = dt[None, :] + self._nodes[:, None] * self._D[i][None, :]
                    dp = dp + spec.p_slow.derivative(tq)[:, None] * dtime
                    weights = weights * slope
                grad += self._D[i] * segment_energy + d * (weights @ dp)

            # kinematic bounds
            row = (lambda q, k: total[q, k]) if sens else (lambda q, k: None)
            if step.kind is SegmentKind.CD_J:
                # a ramp into a cruise or standstill meets its velocity there as an equality
                if nxt is not None and nxt.kind is not SegmentKind.CD_V:
                    bound_rows(values[1, n_nodes], row(1, n_nodes), V, True)
                if nxt is not None and nxt.kind is SegmentKind.CD_J:
                    bound_rows(values[2, -1], row(2, -1), A, False)
            elif step.kind is SegmentKind.CD_A:
                bound_rows(values[1, -1], row(1, -1), V, True)
            elif step.kind is SegmentKind.EL:
                for k in range(n_nodes, len(xi)):
                    bound_rows(values[1, k], row(1, k), V, True)
                    bound_rows(values[2, k], row(2, k), A, False)
                    bound_rows(values[3, k], row(3, k), J, False)

            v, a = float(values[1, -1]), float(values[2, -1])
            x += float(values[0, -1])
            t0 += d
            if sens:
                dv, da = total[1, -1].copy(), total[2, -1].copy()
                dx = dx + total[0, -1]
                dt = dt + self._D[i]

        if not plan.steps[-1].is_dwell:
            eq.extend([v / V, a / A])
            eq_rows.extend([dv / V, da / A])
        eq.insert(0, (x - spec.s0) / self.distance_scale)
        eq_rows.insert(0, dx / self.distance_scale)

        ineq.append(self.last_share(z))
        last_row = np.zeros(size)
        last_row[: self.n_free] = -1.0
        ineq_rows.append(last_row)

        trajectory = Trajectory(tuple(segments), spec.direction_sign)
        return Evaluation(
            trajectory=trajectory,
            equalities=np.asarray(eq, dtype=float),
            inequalities=np.asarray(ineq, dtype=float),
            objective=energy / self.energy_scale,
            gradient=grad / self.energy_scale if sens else None,
            eq_jacobian=np.array(eq_rows).reshape(len(eq), size) if sens else None,
            ineq_jacobian=np.array(ineq_rows).reshape(len(ineq), size) if sens else None,
        )

    # -------------------------------------------------------------- derivatives

    def objective(self, z: FloatArray) -> float:
        return self.evaluate(z).objective

    def equalities(self, z: FloatArray) -> FloatArray:
        return self.evaluate(z).equalities

    def inequalities(self, z: FloatArray) -> FloatArray:
        return self.evaluate(z).inequalities

    def _differences(self, z: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
        z = np.asarray(z, dtype=float)
        key = z.tobytes()
        cached = self._fd_cache.get(key)
        if cached is not None:
            return cached
        if len(self._fd_cache) > _CACHE_LIMIT:
            self._fd_cache.clear()

        h = self.settings.full_fd_step
        base = self.evaluate(z)
        grad = np.zeros(self.size)
        eq_jac = np.zeros((len(base.equalities), self.size))
        ineq_jac = np.zeros((len(base.inequalities), self.size))
        for i in range(self.size):
            step = np.zeros(self.size)
            step[i] = h * max(1.0, abs(z[i]))
            plus, minus = self.evaluate(z + step), self.evaluate(z - step)
            grad[i] = (plus.objective - minus.objective) / (2.0 * step[i])
            eq_jac[:, i] = (plus.equalities - minus.equalities) / (2.0 * step[i])
            ineq_jac[:, i] = (plus.inequalities - minus.inequalities) / (2.0 * step[i])
        self._fd_cache[key] = (grad, eq_jac, ineq_jac)
        return grad, eq_jac, ineq_jac

    def gradient(self, z: FloatArray) -> FloatArray:
        evaluation = self.evaluate(z)
        return evaluation.gradient if evaluation.gradient is not None else self._differences(z)[0]

    def eq_jacobian(self, z: FloatArray) -> FloatArray:
        evaluation = self.evaluate(z)
        return evaluation.eq_jacobian if evaluation.eq_jacobian is not None else self._differences(z)[1]

    def ineq_jacobian(self, z: FloatArray) -> FloatArray:
        evaluation = self.evaluate(z)
        return evaluation.ineq_jacobian if evaluation.ineq_jacobian is not None else self._differences(z)[2]

    def stationarity(self, z: FloatArray) -> float:
        """Residual of the KKT stationarity condition at z, relative to max(1, |∇f|).

        Multipliers of the equalities are free, those of the active inequalities
        and variable bounds nonnegative; they are fitted by bounded linear least
        squares.
        """
        if self.size == 0:
            return 0.0
        z = np.asarray(z, dtype=float)
        grad = self.gradient(z)
        tol = self.settings.active_tol
        active = self.inequalities(z) <= tol
        lo, hi = self._bound_arrays()
        eye = np.eye(self.size)
        eq_jac = self.eq_jacobian(z)
        columns = np.hstack(
            [eq_jac.T, self.ineq_jacobian(z)[active].T, eye[:, z - lo <= tol], -eye[:, hi - z <= tol]]
        )
        n_eq = eq_jac.shape[0]
        lower = np.concatenate([np.full(n_eq, -np.inf), np.zeros(columns.shape[1] - n_eq)])
        fit = lsq_linear(columns, grad, bounds=(lower, np.full(columns.shape[1], np.inf)))
        residual = columns @ fit.x - grad
        return float(np.max(np.abs(residual)) / max(1.0, float(np.max(np.abs(grad)))))

    # ------------------------------------------------------------------- solves

    def _residuals(self, z: FloatArray) -> FloatArray:
        return np.concatenate([self.equalities(z), np.minimum(self.inequalities(z), 0.0)])

    def _residual_jacobian(self, z: FloatArray) -> FloatArray:
        violated = (self.inequalities(z) < 0.0)[:, None]
        return np.vstack([self.eq_jacobian(z), np.where(violated, self.ineq_jacobian(z), 0.0)])

    def _least_squares(self, z0: FloatArray, max_nfev: int | None) -> FloatArray:
        lo, hi = self._bound_arrays()
        z0 = np.clip(z0, lo, hi)
        try:
            res = least_squares(
                self._residuals,
                z0,
                jac=self._residual_jacobian,
                bounds=(lo, hi),
                method="trf",
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
                max_nfev=max_nfev,
            )
        except (ValueError, SingularELError) as e:
            logger.debug(f"Feasibility solve failed for {self.plan.label}: {e}")
            return z0
        return np.asarray(res.x, dtype=float)

    def infeasibility(self, z: FloatArray) -> float:
        return float(np.max(np.abs(self._residuals(z))))

    def solve(self, z0: FloatArray) -> tuple[FloatArray, int, int, str]:
        """(z*, iterations, status, message); status 0 is a successful exit."""
        lo, hi = self._bound_arrays()
        z0 = np.clip(np.asarray(z0, dtype=float), lo, hi)
        if self.size == 0:
            return z0, 0, 0, "no free parameters"
        if self.plan.is_overdetermined:
            z = self._least_squares(z0, self.settings.max_iterations)
            return z, 0, 0, "overdetermined plan solved as least squares"

        full = self.mode is SolveMode.FULL
        max_iterations = self.settings.full_max_iterations if full else self.settings.max_iterations
        z, iterations, status, message = z0, 0, -1, ""
        for attempt in range(self.settings.restarts + 1):
            res = minimize(
                self.objective,
                z,
                jac=self.gradient,
                method="SLSQP",
                bounds=self.bounds(),
                constraints=[
                    {"type": "eq", "fun": self.equalities, "jac": self.eq_jacobian},
                    {"type": "ineq", "fun": self.inequalities, "jac": self.ineq_jacobian},
                ],
                options={"maxiter": max_iterations, "ftol": self.settings.ftol},
            )
            iterations += int(res.nit)
            status, message = int(res.status), str(res.message)
            if not np.all(np.isfinite(res.x)):
                break
            z = np.clip(np.asarray(res.x, dtype=float), lo, hi)
            if status in (0, 9):
                break
            logger.debug(f"{self.plan.label}: SLSQP exit {status} ({message}), restart {attempt + 1}")

        polished = self._least_squares(z, FEASIBILITY_POLISH_EVALUATIONS)
        if self.infeasibility(polished) < self.infeasibility(z):
            z = polished
        return z, iterations, status, message


def solve_fixed_plan(
    plan: SegmentPlan,
    spec: ProblemSpec,
    surrogate_only: bool = True,
    warm_start: FloatArray | list[float] | None = None,
    *,
    surrogate: QuadraticSurrogate | None = None,
    settings: SolverSettings | None = None,
    seed: str = "proportional",
) -> SolveResult:
    """Optimize the free parameters of one plan.

    A solution counts as converged when SLSQP exits successfully, the
    trajectory meets the kinematic bounds, is continuous in v and a and covers
    the distance, the KKT stationarity residual is small, and its EL arc (if
    any) satisfies the EL equation of the power model it was solved with.

    Args:
        plan: Kind sequence of the intervals
        spec: Problem to solve
        surrogate_only: EL arcs and the objective use the quadratic surrogate
        warm_start: Native decision vector; seeded from the plan's motif if None
        surrogate: Fitted surrogate; fitted on the admissible box if None
        settings: Solver settings
        seed: Seed variant used without a warm start

    Returns:
        SolveResult whose energies are evaluated exactly with the full model.
        Non-convergence is reported through ``converged``, not raised.

    Raises:
        InfeasibleError: If the distance cannot be covered within T, or the
            plan's moves cannot fill the horizon
    """
    settings = settings or SolverSettings()
    check_feasible(spec)
    if surrogate is None:
        surrogate = fit_quadratic(spec.model, fit_domain_for(spec.limits))
    mode = SolveMode.SURROGATE if surrogate_only else SolveMode.FULL
    problem = PlanProblem(plan, spec, surrogate, mode, settings)

    if warm_start is None:
        decision = seed_decision(plan, spec, surrogate, seed, settings.min_segment)
    else:
        decision = np.asarray(warm_start, dtype=float)
    if len(decision) != plan.n_variables:
        raise DomainError(f"Decision of length {len(decision)} does not fit plan {plan.label}")

    z, iterations, status, message = problem.solve(problem.to_scaled(decision))
    trajectory = problem.evaluate(z).trajectory

    feasibility = problem.infeasibility(z)
    bounds = check_bounds(trajectory, spec.limits)
    report = energies(trajectory, spec.model, spec.p_slow)
    distance_error = abs(distance(trajectory) - spec.s0)
    kkt = 0.0 if plan.is_overdetermined else problem.stationarity(z)
    kkt_tol = settings.kkt_tol if problem.analytic else settings.kkt_tol_fd

    el_error = 0.0
    if plan.el_index is not None:
        arc = trajectory.segments[plan.el_index].arc
        if arc is not None:
            el_error = el_residual(problem.power_fn, arc, spec.limits)

    failures = []
    if status != 0:
        failures.append(f"SLSQP status {status}")
    if not bounds.ok(settings.bound_tol, settings.continuity_tol):
        failures.append(
            f"bounds {bounds.max_bound_violation:.1e}, continuity "
            f"{max(bounds.max_continuity_defect, bounds.boundary_defect):.1e}"
        )
    if distance_error > settings.distance_rtol * max(spec.s0, 1.0):
        failures.append(f"distance error {distance_error:.1e} m")
    if kkt > kkt_tol:
        failures.append(f"KKT residual {kkt:.1e}")
    if el_error > EL_RESIDUAL_TOLERANCE:
        failures.append(f"EL residual {el_error:.1e}")
    converged = not failures
    if failures:
        message = f"{message}; " + ", ".join(failures)

    logger.debug(
        f"{plan.label} [{mode.value}]: objective {spec.objective_value(report):.6g} J, "
        f"feasibility {feasibility:.2e}, KKT {kkt:.1e}, status {status}, {problem.evaluations} evaluations"
    )
    if not converged:
        logger.debug(f"{plan.label} did not converge: {message}")

    return SolveResult(
        trajectory=trajectory,
        report=report,
        n_intervals=trajectory.n_segments,
        converged=converged,
        objective_value=spec.objective_value(report),
        iterations=iterations,
        plan_label=plan.label,
        mode=mode,
        constraint_violation=feasibility,
        bound_violation=bounds.max_bound_violation,
        decision=problem.to_native(z).tolist(),
        plan_solves=1,
        evaluations=problem.evaluations,
        kkt_residual=kkt,
        message=message,
    )
