"""Euler-Lagrange arcs of the energy functional.

On an interval without active kinematic bound the optimal velocity satisfies

    ∂P/∂v − d/dt ∂P/∂a + λ_G = 0,

with λ_G the multiplier of the distance constraint. Expanding the time
derivative gives the explicit second-order ODE

    v̈ = (∂P/∂v − ∂²P/∂v∂a · a + λ_G) / ∂²P/∂a²,

which needs ∂²P/∂a² ≠ 0 along the arc.

For a quadratic surrogate this is linear, v̈ = k2·v + g with k2 = c20/c02 and
g = (c10 + λ_G)/(2·c02), and is solved in closed form. For the full model it
is integrated numerically, either as an initial value problem or as a
two-point boundary value problem.
"""

import logging
import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_bvp, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from cranetraj.constants import (
    EL_ATOL,
    EL_BVP_TOL,
    EL_DIVERGENCE_FACTOR,
    EL_RESIDUAL_POINTS,
    EL_RESIDUAL_TOLERANCE,
    EL_RTOL,
    EL_SINGULAR_FLOOR,
)
from cranetraj.errors import DivergenceError, IllPosedSurrogateError, SingularELError
from cranetraj.models.kinematics import KinematicLimits
from cranetraj.models.power import PowerFunction, QuadraticSurrogate
from cranetraj.powerflow import characteristic_power, derivatives

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
State = tuple[FloatArray, FloatArray, FloatArray, FloatArray]

_SERIES_TERMS = 16
_SERIES = [
    np.array([1.0 / math.factorial(2 * k + shift) for k in range(_SERIES_TERMS)])
    for shift in range(4)
]


class ArcEvaluator(Protocol):
    def __call__(self, tau: FloatArray) -> State: ...


@dataclass(frozen=True)
class ELSegmentSolution:
    """Velocity function of one EL arc on [0, duration] and its EL residual."""

    lambda_G: float
    duration: float
    residual: float
    method: str
    start_state: tuple[float, float]
    end_state: tuple[float, float]
    displacement: float
    evaluator: ArcEvaluator | None = None

    @classmethod
    def empty(cls, lambda_G: float, v0: float, a0: float, method: str) -> "ELSegmentSolution":
        return cls(lambda_G, 0.0, 0.0, method, (v0, a0), (v0, a0), 0.0, None)

    @property
    def is_empty(self) -> bool:
        return self.evaluator is None

    def sample(self, tau: ArrayLike) -> State:
        """Local (x, v, a, j) at τ ∈ [0, duration]."""
        tau = np.clip(np.asarray(tau, dtype=float), 0.0, self.duration)
        if self.evaluator is None:
            v0, a0 = self.start_state
            return np.zeros_like(tau), np.full_like(tau, v0), np.full_like(tau, a0), np.zeros_like(tau)
        return self.evaluator(tau)

    def velocity(self, tau: ArrayLike) -> FloatArray:
        return self.sample(tau)[1]


# =============================================================================
# CLOSED FORM
# =============================================================================


def _basis(k2: float, t: ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """C, S, Q, R with C' = k2·S, S' = C, Q' = S, R' = Q and C(0) = 1, S(0) = Q(0) = R(0) = 0.

    Power series for |k2·t²| < 1, cosh/sinh (k2 > 0) or cos/sin (k2 < 0)
    beyond, so Q and R never suffer cancellation.
    """
    t = np.asarray(t, dtype=float)
    z = k2 * t * t
    small = np.abs(z) < 1.0
    zs = np.where(small, z, 0.0)
    powers = zs[..., None] ** np.arange(_SERIES_TERMS)
    c = powers @ _SERIES[0]
    s = t * (powers @ _SERIES[1])
    q = t * t * (powers @ _SERIES[2])
    r = t * t * t * (powers @ _SERIES[3])
    if k2 == 0.0 or np.all(small):
        return c, s, q, r

    with np.errstate(over="ignore", invalid="ignore"):
        if k2 > 0.0:
            kappa = math.sqrt(k2)
            x = np.minimum(kappa * t, 700.0)
            cc = np.cosh(x)
            sc = np.sinh(x) / kappa
            qc = (cc - 1.0) / k2
            rc = (np.sinh(x) - x) / (k2 * kappa)
        else:
            omega = math.sqrt(-k2)
            x = omega * t
            cc = np.cos(x)
            sc = np.sin(x) / omega
            qc = (1.0 - cc) / -k2
            rc = (x - np.sin(x)) / (-k2 * omega)
    return (
        np.where(small, c, cc),
        np.where(small, s, sc),
        np.where(small, q, qc),
        np.where(small, r, rc),
    )


@dataclass(frozen=True)
class _ClosedFormArc:
    k2: float
    g: float
    v_start: float
    a_start: float
    v_end: float
    a_end: float
    duration: float
    two_sided: bool
    x_end: float

    def __call__(self, tau: FloatArray) -> State:
        k2, g = self.k2, self.g
        split = 0.5 * self.duration if self.two_sided else np.inf
        forward = tau <= split

        c, s, q, r = _basis(k2, tau)
        v = self.v_start * c + self.a_start * s + g * q
        a = self.v_start * k2 * s + self.a_start * c + g * s
        x = self.v_start * s + self.a_start * q + g * r

        if not forward.all():
            back = self.duration - tau
            c, s, q, r = _basis(k2, back)
            vb, ab = self.v_end, self.a_end
            v = np.where(forward, v, vb * c - ab * s + g * q)
            a = np.where(forward, a, -vb * k2 * s + ab * c - g * s)
            x = np.where(forward, x, self.x_end - (vb * s - ab * q + g * r))
        return x, v, a, k2 * v + g


def _closed_form_coefficients(surrogate: QuadraticSurrogate, lambda_G: float) -> tuple[float, float]:
    if surrogate.c02 <= 0.0:
        raise IllPosedSurrogateError(f"c02 = {surrogate.c02} must be positive")
    k2 = surrogate.c20 / surrogate.c02
    g = (surrogate.c10 + lambda_G) / (2.0 * surrogate.c02)
    return k2, g


def el_closed_form(
    surrogate: QuadraticSurrogate,
    lambda_G: float,
    v0: float,
    a0: float,
    duration: float,
    *,
    check: bool = True,
) -> ELSegmentSolution:
    """Closed-form EL arc of a quadratic surrogate from its initial state (v0, a0)."""
    k2, g = _closed_form_coefficients(surrogate, lambda_G)
    if duration <= 0.0:
        return ELSegmentSolution.empty(lambda_G, v0, a0, "closed_form")

    c, s, q, r = (float(b) for b in _basis(k2, np.array(duration)))
    v_end = v0 * c + a0 * s + g * q
    a_end = v0 * k2 * s + a0 * c + g * s
    x_end = v0 * s + a0 * q + g * r
    arc = _ClosedFormArc(k2, g, v0, a0, v_end, a_end, duration, False, x_end)
    return _finish(surrogate, lambda_G, arc, duration, "closed_form", None, check)


def _boundary_arc(
    k2: float, g: float, v_start: float, v_end: float, duration: float
) -> tuple[float, float, float]:
    """(a_start, a_end, x_end) of the arc joining v_start to v_end in ``duration``."""
    c, s, q, _ = (float(b) for b in _basis(k2, np.array(duration)))
    if abs(s) < 1e-12 * max(duration, 1.0):
        raise SingularELError(f"Boundary problem is resonant (k2 = {k2:.3e}, duration = {duration:.3e})")
    a_start = (v_end - v_start * c - g * q) / s
    a_end = (v_end * c + g * q - v_start) / s

    _, sh, qh, rh = (float(b) for b in _basis(k2, np.array(0.5 * duration)))
    x_end = (v_start + v_end) * sh + 2.0 * g * rh + (a_start - a_end) * qh
    return a_start, a_end, x_end


def el_closed_form_boundary(
    surrogate: QuadraticSurrogate,
    lambda_G: float,
    v_start: float,
    v_end: float,
    duration: float,
    *,
    check: bool = True,
) -> ELSegmentSolution:
    """Closed-form EL arc fixed by its boundary velocities.

    The arc is evaluated forward from the start on its first half and backward
    from the end on its second half, so long hyperbolic arcs keep full
    precision at both ends.
    """
    k2, g = _closed_form_coefficients(surrogate, lambda_G)
    if duration <= 0.0:
        return ELSegmentSolution.empty(lambda_G, v_start, 0.0, "closed_form_boundary")

    a_start, a_end, x_end = _boundary_arc(k2, g, v_start, v_end, duration)
    arc = _ClosedFormArc(k2, g, v_start, a_start, v_end, a_end, duration, True, x_end)
    return _finish(surrogate, lambda_G, arc, duration, "closed_form_boundary", None, check)


def el_boundary_sensitivities(
    surrogate: QuadraticSurrogate,
    lambda_G: float,
    v_start: float,
    v_end: float,
    duration: float,
    tau: ArrayLike,
) -> tuple[FloatArray, FloatArray]:
    """State of a closed-form boundary arc at τ and its partial derivatives.

    Returns:
        values of shape (4, m): x, v, a, j at the m times τ
        partials of shape (4, m, 4): derivatives of those values with respect
        to (v_start, v_end, λ_G, duration), the duration taken at fixed τ

    Raises:
        SingularELError: If the boundary problem is resonant
    """
    k2, g = _closed_form_coefficients(surrogate, lambda_G)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    d = duration
    a_s, a_e, _ = _boundary_arc(k2, g, v_start, v_end, d)
    arc = _ClosedFormArc(k2, g, v_start, a_s, v_end, a_e, d, True, 0.0)
    x_rel, v, a, j = arc(tau)

    c_d, s_d, q_d, _ = (float(b) for b in _basis(k2, np.array(d)))
    h = 0.5 * d
    ch, sh, qh, rh = (float(b) for b in _basis(k2, np.array(h)))

    # linear parameters (v_start, v_end, g), then mapped to λ_G through ∂g/∂λ_G
    dvs = np.array([1.0, 0.0, 0.0])
    dve = np.array([0.0, 1.0, 0.0])
    dg = np.array([0.0, 0.0, 1.0])
    das = (-c_d * dvs + dve - q_d * dg) / s_d
    dae = (-dvs + c_d * dve + q_d * dg) / s_d
    dx_end = (dvs + dve) * sh + 2.0 * dg * rh + (das - dae) * qh

    # duration at fixed τ
    das_d = -(k2 * v_start + g) - a_s * c_d / s_d
    dae_d = (k2 * v_end + g) - a_e * c_d / s_d
    v_mid = v_start * ch + a_s * sh + g * qh
    dx_end_d = v_mid + (das_d - dae_d) * qh
    x_end = (v_start + v_end) * sh + 2.0 * g * rh + (a_s - a_e) * qh

    m = len(tau)
    values = np.empty((4, m))
    partials = np.zeros((4, m, 4))
    forward = tau <= h

    c, s, q, r = _basis(k2, tau)
    fw = np.nonzero(forward)[0]
    if len(fw):
        cf, sf, qf, rf = c[fw], s[fw], q[fw], r[fw]
        lin_v = np.outer(cf, dvs) + np.outer(sf, das) + np.outer(qf, dg)
        lin_a = np.outer(k2 * sf, dvs) + np.outer(cf, das) + np.outer(sf, dg)
        lin_x = np.outer(sf, dvs) + np.outer(qf, das) + np.outer(rf, dg)
        partials[0, fw, :3] = lin_x
        partials[1, fw, :3] = lin_v
        partials[2, fw, :3] = lin_a
        partials[0, fw, 3] = das_d * qf
        partials[1, fw, 3] = das_d * sf
        partials[2, fw, 3] = das_d * cf
        values[0, fw] = x_rel[fw]

    bw = np.nonzero(~forward)[0]
    if len(bw):
        cb, sb, qb, rb = _basis(k2, d - tau[bw])
        lin_v = np.outer(cb, dve) - np.outer(sb, dae) + np.outer(qb, dg)
        lin_a = -np.outer(k2 * sb, dve) + np.outer(cb, dae) - np.outer(sb, dg)
        lin_x = dx_end[None, :] - (np.outer(sb, dve) - np.outer(qb, dae) + np.outer(rb, dg))
        partials[0, bw, :3] = lin_x
        partials[1, bw, :3] = lin_v
        partials[2, bw, :3] = lin_a
        partials[0, bw, 3] = dx_end_d - v[bw] + dae_d * qb
        partials[1, bw, 3] = -a[bw] - dae_d * sb
        partials[2, bw, 3] = -j[bw] + dae_d * cb
        values[0, bw] = x_end + x_rel[bw]

    values[1], values[2], values[3] = v, a, j
    partials[3, :, :3] = k2 * partials[1, :, :3] + dg[None, :]
    partials[3, :, 3] = k2 * partials[1, :, 3]
    partials[..., 2] /= 2.0 * surrogate.c02
    return values, partials


# =============================================================================
# NUMERIC
# =============================================================================


@dataclass(frozen=True)
class _Scales:
    limits: KinematicLimits
    p_char: float
    floor: float

    @classmethod
    def of(cls, fn: PowerFunction, limits: KinematicLimits) -> "_Scales":
        p_char = characteristic_power(fn, limits)
        return cls(limits, p_char, EL_SINGULAR_FLOOR * p_char / limits.a_max**2)


def _default_limits(fn: PowerFunction, v0: float, a0: float) -> KinematicLimits:
    if isinstance(fn, QuadraticSurrogate):
        d = fn.fit_domain
        return KinematicLimits(
            v_max=max(abs(d.v_min), abs(d.v_max)),
            a_max=max(abs(d.a_min), abs(d.a_max)),
            j_max=1.0,
        )
    return KinematicLimits(v_max=max(1.0, abs(v0)), a_max=max(1.0, abs(a0)), j_max=1.0)


def _jerk(fn: PowerFunction, lambda_G: float, scales: _Scales, v: ArrayLike, a: ArrayLike) -> FloatArray:
    lim = scales.limits
    p_v, p_va, p_aa = derivatives(fn, v, a, v_scale=lim.v_max, a_scale=lim.a_max)
    if np.any(np.abs(p_aa) < scales.floor):
        raise SingularELError(
            f"∂²P/∂a² = {float(np.min(np.abs(p_aa))):.3e} below floor {scales.floor:.3e}"
        )
    return (p_v - p_va * a + lambda_G) / p_aa


@dataclass(frozen=True)
class _DenseArc:
    """DOP853 dense output of the state (x, v, a)."""

    dense: object
    fn: PowerFunction
    lambda_G: float
    scales: _Scales

    def __call__(self, tau: FloatArray) -> State:
        y = np.asarray(self.dense(tau))  # type: ignore[operator]
        x, v, a = y[0], y[1], y[2]
        return x, v, a, _jerk(self.fn, self.lambda_G, self.scales, v, a)


@dataclass(frozen=True)
class _CollocationArc:
    """Cubic collocation spline of (v, a) with its exact antiderivative for x."""

    solution: object
    position: CubicHermiteSpline
    fn: PowerFunction
    lambda_G: float
    scales: _Scales

    def __call__(self, tau: FloatArray) -> State:
        y = np.asarray(self.solution(tau))  # type: ignore[operator]
        v, a = y[0], y[1]
        x = np.asarray(self.position(tau), dtype=float)
        return x, v, a, _jerk(self.fn, self.lambda_G, self.scales, v, a)


def el_numeric(
    fn: PowerFunction,
    lambda_G: float,
    v0: float,
    a0: float,
    duration: float,
    *,
    limits: KinematicLimits | None = None,
    check: bool = True,
) -> ELSegmentSolution:
    """EL arc of a general power model from its initial state, by DOP853."""
    if duration <= 0.0:
        return ELSegmentSolution.empty(lambda_G, v0, a0, "ivp")
    limits = limits or _default_limits(fn, v0, a0)
    scales = _Scales.of(fn, limits)
    v_blowup = EL_DIVERGENCE_FACTOR * limits.v_max

    def rhs(t: float, y: FloatArray) -> list[float]:
        return [y[1], y[2], float(_jerk(fn, lambda_G, scales, y[1], y[2]))]

    def blowup(t: float, y: FloatArray) -> float:
        return abs(y[1]) - v_blowup

    blowup.terminal = True  # type: ignore[attr-defined]

    sol = solve_ivp(
        rhs,
        (0.0, duration),
        [0.0, v0, a0],
        method="DOP853",
        rtol=EL_RTOL,
        atol=EL_ATOL,
        dense_output=True,
        events=blowup,
    )
    if sol.status == 1:
        raise DivergenceError(f"|v| exceeded {v_blowup:.3g} m/s at t = {sol.t[-1]:.4g} s")
    if sol.status != 0:
        raise DivergenceError(f"EL integration failed: {sol.message}")

    arc = _DenseArc(sol.sol, fn, lambda_G, scales)
    return _finish(fn, lambda_G, arc, duration, "ivp", scales, check)


def el_numeric_bvp(
    fn: PowerFunction,
    lambda_G: float,
    v_start: float,
    v_end: float,
    duration: float,
    *,
    limits: KinematicLimits | None = None,
    guess: ELSegmentSolution | None = None,
    check: bool = True,
) -> ELSegmentSolution:
    """EL arc of a general power model fixed by its boundary velocities.

    Solved by collocation, warm-started from ``guess``; falls back to single
    shooting on the initial acceleration when collocation does not converge.
    """
    if duration <= 0.0:
        return ELSegmentSolution.empty(lambda_G, v_start, 0.0, "bvp")
    limits = limits or _default_limits(fn, max(abs(v_start), abs(v_end)), 0.0)
    scales = _Scales.of(fn, limits)

    def fun(t: FloatArray, y: FloatArray) -> FloatArray:
        return np.vstack([y[1], _jerk(fn, lambda_G, scales, y[0], y[1])])

    def bc(ya: FloatArray, yb: FloatArray) -> FloatArray:
        return np.array([ya[0] - v_start, yb[0] - v_end])

    mesh = np.linspace(0.0, duration, 21)
    if guess is not None and not guess.is_empty:
        _, gv, ga, _ = guess.sample(mesh * guess.duration / duration)
        y0 = np.vstack([gv, ga])
    else:
        slope = (v_end - v_start) / duration
        y0 = np.vstack([v_start + slope * mesh, np.full_like(mesh, slope)])

    try:
        res = solve_bvp(fun, bc, mesh, y0, tol=EL_BVP_TOL, max_nodes=20_000)
        success = bool(res.success)
    except (SingularELError, FloatingPointError) as e:
        logger.debug(f"Collocation failed: {e}")
        success = False

    if not success:
        logger.debug("Collocation did not converge; falling back to single shooting")
        return _shoot(fn, lambda_G, v_start, v_end, duration, limits, guess, check)

    position = CubicHermiteSpline(res.x, res.y[0], res.yp[0]).antiderivative()
    arc = _CollocationArc(res.sol, position, fn, lambda_G, scales)
    return _finish(fn, lambda_G, arc, duration, "bvp", scales, check)


def _shoot(
    fn: PowerFunction,
    lambda_G: float,
    v_start: float,
    v_end: float,
    duration: float,
    limits: KinematicLimits,
    guess: ELSegmentSolution | None,
    check: bool,
) -> ELSegmentSolution:
    a_ref = guess.start_state[1] if guess is not None else (v_end - v_start) / duration
    penalty = EL_DIVERGENCE_FACTOR * limits.v_max

    def miss(a0: float) -> float:
        try:
            arc = el_numeric(fn, lambda_G, v_start, a0, duration, limits=limits, check=False)
        except DivergenceError:
            return math.copysign(penalty, a0 - a_ref)
        return arc.end_state[0] - v_end

    width = limits.a_max
    lo, hi = a_ref - width, a_ref + width
    f_lo, f_hi = miss(lo), miss(hi)
    for _ in range(10):
        if f_lo * f_hi <= 0.0:
            break
        width *= 2.0
        lo, hi = a_ref - width, a_ref + width
        f_lo, f_hi = miss(lo), miss(hi)
    else:
        raise DivergenceError("Shooting could not bracket the initial acceleration")

    a0 = brentq(miss, lo, hi, xtol=1e-12)
    arc = el_numeric(fn, lambda_G, v_start, a0, duration, limits=limits, check=check)
    return ELSegmentSolution(
        arc.lambda_G,
        arc.duration,
        arc.residual,
        "shooting",
        arc.start_state,
        arc.end_state,
        arc.displacement,
        arc.evaluator,
    )


# =============================================================================
# RESIDUAL
# =============================================================================


def el_residual(
    fn: PowerFunction,
    solution: ELSegmentSolution,
    limits: KinematicLimits | None = None,
    n_points: int = EL_RESIDUAL_POINTS,
) -> float:
    """Max |EL residual| at interior points, in units of P_char / v_char.

    The jerk is taken from central differences of the arc's acceleration, so
    the check is independent of how the arc was computed.
    """
    if solution.is_empty:
        return 0.0
    v0, a0 = solution.start_state
    limits = limits or _default_limits(fn, v0, a0)
    return _residual(fn, solution.lambda_G, solution.evaluator, solution.duration, _Scales.of(fn, limits), n_points)


def _residual(
    fn: PowerFunction,
    lambda_G: float,
    arc: ArcEvaluator | None,
    duration: float,
    scales: _Scales,
    n_points: int = EL_RESIDUAL_POINTS,
) -> float:
    if arc is None:
        return 0.0
    tau = np.linspace(0.0, duration, n_points + 2)[1:-1]
    delta = 1e-4 * duration
    _, v, a, _ = arc(tau)
    jerk_fd = (arc(tau + delta)[2] - arc(tau - delta)[2]) / (2.0 * delta)
    lim = scales.limits
    p_v, p_va, p_aa = derivatives(fn, v, a, v_scale=lim.v_max, a_scale=lim.a_max)
    residual = p_v - p_va * a - p_aa * jerk_fd + lambda_G
    return float(np.max(np.abs(residual)) / (scales.p_char / lim.v_max))


def _finish(
    fn: PowerFunction,
    lambda_G: float,
    arc: ArcEvaluator,
    duration: float,
    method: str,
    scales: _Scales | None,
    check: bool,
) -> ELSegmentSolution:
    x0, v0, a0, _ = arc(np.array([0.0]))
    x1, v1, a1, _ = arc(np.array([duration]))
    residual = 0.0
    if check:
        if scales is None:
            scales = _Scales.of(fn, _default_limits(fn, float(v0[0]), float(a0[0])))
        residual = _residual(fn, lambda_G, arc, duration, scales)
        if residual > EL_RESIDUAL_TOLERANCE:
            logger.warning(f"EL arc ({method}) residual {residual:.2e} above {EL_RESIDUAL_TOLERANCE:.0e}")
    return ELSegmentSolution(
        lambda_G=lambda_G,
        duration=duration,
        residual=residual,
        method=method,
        start_state=(float(v0[0]), float(a0[0])),
        end_state=(float(v1[0]), float(a1[0])),
        displacement=float(x1[0] - x0[0]),
        evaluator=arc,
    )
