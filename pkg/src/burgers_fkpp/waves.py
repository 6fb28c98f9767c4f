"""Traveling waves of u_t + beta*u*u_x = u_xx + u - u^2 by phase-plane shooting.

A wave U(x - c t) solves the ODE

    -c U' + beta U U' = U'' + U - U^2,   U(-inf) = 1,  U(+inf) = 0,

equivalently the first-order system dU/dx = -V, dV/dx = (beta U - c) V + f(U)
with f(U) = U (1 - U).  Waves exist exactly for c >= c_star(beta), with

    c_star = 2                  for beta <= 2,
    c_star = beta/2 + 2/beta    for beta >= 2,

and the minimal-speed profile is explicit for beta >= 2:
U(x) = 1 / (1 + exp(beta x / 2)).

Shooting launches along the unstable eigenvector of the saddle (1, 0) and
integrates with U as the independent variable, which removes the slow creep
away from the saddle; the spatial coordinate is recovered from dx = -dU/V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import least_squares
from scipy.special import expit

from .grid import Field, Grid1D

__all__ = [
    "WaveProfile",
    "ExponentialTail",
    "LinearExponentialTail",
    "NoWaveError",
    "c_star",
    "phi_closed_form",
    "shoot_wave",
    "closed_form_wave",
    "minimal_speed_search",
    "tail_fit",
    "wave_residual",
    "wave_steepness",
    "sattinger_limits",
]

LAUNCH_OFFSET = 1e-8  # distance from the saddle along the unstable eigenvector
ODE_RTOL = 1e-12


class NoWaveError(RuntimeError):
    """No monotone heteroclinic connection for the requested (beta, c)."""


@dataclass(frozen=True)
class ExponentialTail:
    rate: float
    r_squared: float = float("nan")
    asymptotic: bool = True


@dataclass(frozen=True)
class LinearExponentialTail:
    """Right tail of the form (A x + B) exp(-x)."""

    A: float
    B: float
    r_squared: float = float("nan")
    asymptotic: bool = True


@dataclass(frozen=True)
class WaveProfile:
    """A traveling wave sampled in its own coordinate, normalized U(0) = 1/2.

    ``e_of_v`` holds pairs (v, E(v)) with E(v) = U'(U^{-1}(v)) < 0, read
    directly off the phase plane as E(v) = -V(U=v).
    """

    beta: float
    c: float
    samples: Field
    e_of_v: np.ndarray
    tail: Optional[object] = None

    def e_at(self, v) -> np.ndarray:
        """Interpolate E(v) on (0, 1)."""
        return np.interp(v, self.e_of_v[:, 0], self.e_of_v[:, 1])


def c_star(beta: float) -> float:
    """Minimal wave speed: 2 for beta <= 2, beta/2 + 2/beta above."""
    if beta <= 2.0:
        return 2.0
    return beta / 2.0 + 2.0 / beta


def phi_closed_form(beta: float, x):
    """Exact minimal-speed profile 1/(1 + exp(beta x / 2)), valid for beta >= 2."""
    if beta < 2.0:
        raise ValueError(f"closed-form profile requires beta >= 2, got {beta}")
    return expit(-0.5 * beta * np.asarray(x, dtype=float))


def _lambda_plus(beta: float, c: float) -> float:
    """Unstable rate at the saddle (U, V) = (1, 0)."""
    return 0.5 * (beta - c + math.hypot(beta - c, 2.0))


def _phase_rhs(beta: float, c: float):
    def rhs(u, y):
        v = y[0]
        return [c - beta * u - u * (1.0 - u) / v, -1.0 / v]

    return rhs


def shoot_wave(
    beta: float,
    c: float,
    eps_stop: float = 1e-8,
    sample_h: float = 0.002,
) -> WaveProfile:
    """Integrate the unstable manifold of (1, 0) down to U = eps_stop.

    Launches at (U, V) = (1 - delta, lambda_plus * delta) with delta = 1e-8,
    adaptive RK with relative tolerance 1e-10, U as independent variable.
    The profile is renormalized so U(0) = 1/2 and resampled on a uniform
    grid of spacing ``sample_h``.  Raises ``NoWaveError`` when V crosses zero
    with U > eps_stop, or when V fails to vanish with U (no monotone
    connection, which happens for 2 <= c < c_star when beta > 2).
    """
    if eps_stop <= 0 or eps_stop >= 0.5:
        raise ValueError("eps_stop must lie in (0, 0.5)")
    if beta > 2.0:
        sample_h *= 2.0 / beta  # steeper profiles need denser sampling
    delta = LAUNCH_OFFSET
    lam = _lambda_plus(beta, c)
    u0 = 1.0 - delta
    v0 = lam * delta

    def v_hits_zero(u, y):
        return y[0]

    v_hits_zero.terminal = True
    v_hits_zero.direction = -1

    sol = solve_ivp(
        _phase_rhs(beta, c),
        (u0, eps_stop),
        [v0, 0.0],
        method="DOP853",
        rtol=ODE_RTOL,
        atol=[1e-16, 1e-14],
        events=[v_hits_zero],
        dense_output=True,
    )
    if sol.status == 1:  # V reached zero before U reached eps_stop
        u_fail = float(sol.t_events[0][0]) if len(sol.t_events[0]) else float("nan")
        raise NoWaveError(
            f"V crossed zero at U = {u_fail:.6g} > eps_stop: no monotone wave "
            f"for beta = {beta}, c = {c}"
        )
    if not sol.success:
        raise NoWaveError(f"phase-plane integration failed: {sol.message}")

    v_end = sol.y[0, -1]
    # a monotone connection lands at the origin with slope V/U between the
    # stable rates, both bounded by c; anything larger means the orbit was
    # heading across the V-axis at positive V
    if v_end > (abs(c) + 1.0) * eps_stop * 10.0:
        raise NoWaveError(
            f"orbit misses the origin (V = {v_end:.3e} at U = {eps_stop:.1e}): "
            f"no monotone wave for beta = {beta}, c = {c}"
        )

    # refine the solver steps so consecutive x spacing is ~ sample_h/2
    u_knots = sol.t
    x_knots = sol.y[1]
    u_fine = [np.array([u_knots[0]])]
    for k in range(len(u_knots) - 1):
        dx_step = abs(x_knots[k + 1] - x_knots[k])
        m = max(2, int(math.ceil(dx_step / (0.5 * sample_h))) + 1)
        seg = np.linspace(u_knots[k], u_knots[k + 1], m)[1:]
        u_fine.append(seg)
    u_fine = np.concatenate(u_fine)
    y_fine = sol.sol(u_fine)
    v_fine, x_fine = y_fine[0], y_fine[1]

    # normalize so that U(0) = 1/2
    x_half = float(np.interp(0.5, u_fine[::-1], x_fine[::-1]))
    x_fine = x_fine - x_half

    # resample U onto a uniform grid (x increasing, U decreasing)
    order = np.argsort(x_fine)
    xs, us = x_fine[order], u_fine[order]
    x_lo = math.ceil(xs[0] / sample_h) * sample_h
    x_hi = math.floor(xs[-1] / sample_h) * sample_h
    n = int(round((x_hi - x_lo) / sample_h)) + 1
    grid = Grid1D(x_lo, x_lo + sample_h * (n - 1), n)
    interp = CubicSpline(xs, us)
    u_samp = np.clip(interp(grid.nodes()), 0.0, 1.0)
    if np.any(np.diff(u_samp) > 0):
        u_samp = np.clip(PchipInterpolator(xs, us)(grid.nodes()), 0.0, 1.0)
    samples = Field(grid, u_samp)

    v_levels = np.linspace(0.01, 0.99, 99)
    e_vals = -sol.sol(v_levels)[0]
    e_of_v = np.column_stack([v_levels, e_vals])

    prof = WaveProfile(beta=float(beta), c=float(c), samples=samples, e_of_v=e_of_v)
    try:
        return replace(prof, tail=tail_fit(prof))
    except ValueError:
        return prof  # tail not resolved at this eps_stop; fit on demand


def closed_form_wave(beta: float, x_min: float = -30.0, x_max: float = 30.0,
                     sample_h: float = 0.002) -> WaveProfile:
    """WaveProfile built from the explicit minimal-speed formula (beta >= 2)."""
    n = int(round((x_max - x_min) / sample_h)) + 1
    grid = Grid1D(x_min, x_min + sample_h * (n - 1), n)
    u = phi_closed_form(beta, grid.nodes())
    v_levels = np.linspace(0.01, 0.99, 99)
    e_vals = -0.5 * beta * v_levels * (1.0 - v_levels)
    prof = WaveProfile(
        beta=float(beta),
        c=c_star(beta),
        samples=Field(grid, u),
        e_of_v=np.column_stack([v_levels, e_vals]),
    )
    return replace(prof, tail=tail_fit(prof))


def _connection_probe(beta: float, c: float, s_deep: float) -> bool:
    """Feasibility of a monotone connection at speed c.

    Works on W(s) = V/U with s = log U, so the orbit can be followed
    arbitrarily deep into the tail without underflow:

        dW/ds = -[W^2 + (beta e^s - c) W + (1 - e^s)] / W.

    Spirals (complex rates at the origin, c < 2) drive W through zero;
    overshoots (2 <= c < c_star for beta > 2) drive W to +infinity.  Both
    are terminal events; reaching s_deep means the orbit is trapped on a
    monotone connection.
    """

    def rhs(s, y):
        w = y[0]
        es = math.exp(s) if s > -700.0 else 0.0
        return [-(w * w + (beta * es - c) * w + (1.0 - es)) / w]

    delta = LAUNCH_OFFSET
    lam = _lambda_plus(beta, c)
    s0 = math.log(1.0 - delta)
    w0 = lam * delta / (1.0 - delta)

    def floor_leg1(s, y):
        return y[0] - 1e-12

    floor_leg1.terminal = True
    floor_leg1.direction = -1

    sol1 = solve_ivp(rhs, (s0, -1.0), [w0], method="RK45", rtol=1e-10,
                     atol=1e-14, events=[floor_leg1])
    if sol1.status == 1 or not sol1.success:
        return False

    def floor_leg2(s, y):
        return y[0] - 1e-8

    floor_leg2.terminal = True
    floor_leg2.direction = -1

    def ceil_leg2(s, y):
        return y[0] - 1e8

    ceil_leg2.terminal = True
    ceil_leg2.direction = 1

    sol2 = solve_ivp(rhs, (-1.0, s_deep), [sol1.y[0, -1]], method="RK45",
                     rtol=1e-10, atol=1e-14, events=[floor_leg2, ceil_leg2])
    return sol2.status == 0 and sol2.success


def minimal_speed_search(beta: float, tol: float = 1e-5) -> float:
    """Infimum of speeds admitting a monotone wave, located by bisection.

    Feasibility of each speed is decided by the phase-plane probe; the
    spiral detector catches c < 2 (complex rates at the origin force V to
    cross zero) and the overshoot detector catches 2 <= c < c_star for
    beta > 2.  Raises if no bracket is found in c in [0.1, beta + 10].
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    s_deep = -max(500.0, 4.0 * math.pi / math.sqrt(0.5 * tol))
    c_lo, c_hi = 0.1, beta + 10.0
    if _connection_probe(beta, c_lo, s_deep):
        raise RuntimeError(f"no infeasible lower bracket at c = {c_lo}")
    lo = c_lo
    hi = None
    c = c_lo
    while c < c_hi:
        c = min(c + 0.25, c_hi)
        if _connection_probe(beta, c, s_deep):
            hi = c
            break
        lo = c
    if hi is None:
        raise RuntimeError(f"no feasible speed found in [{c_lo}, {c_hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _connection_probe(beta, mid, s_deep):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def tail_fit(w: WaveProfile):
    """Fit the right-tail asymptotics of a wave profile.

    For beta < 2 at the minimal speed the tail is (A x + B) e^{-x}; the fit
    is least squares of log(U e^x) against log(A x + B) over the window
    U in [1e-7, 1e-3], which pins the window in U rather than in x so it is
    insensitive to the normalization shift.  Otherwise a pure exponential
    rate is fitted (expected beta/2 for beta >= 2 at minimal speed).
    """
    u = w.samples.values
    x = w.samples.x
    if u.min() > 1e-7:
        raise ValueError("profile tail not resolved down to U <= 1e-7")
    mask = (u >= 1e-7) & (u <= 1e-3)
    xt, ut = x[mask], u[mask]

    if w.beta < 2.0 and abs(w.c - 2.0) < 1e-6:
        y = ut * np.exp(xt)  # should be A x + B

        a0, b0 = np.polyfit(xt, y, 1)

        def resid(p):
            return np.log(np.maximum(p[0] * xt + p[1], 1e-300)) - np.log(y)

        fit = least_squares(resid, x0=[max(a0, 1e-12), b0])
        A, B = fit.x
        r = resid(fit.x)
        ss_res = float(np.sum(r**2))
        ss_tot = float(np.sum((np.log(y) - np.log(y).mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        return LinearExponentialTail(A=float(A), B=float(B), r_squared=r2,
                                     asymptotic=bool(r2 > 0.99))

    slope, intercept = np.polyfit(xt, np.log(ut), 1)
    pred = slope * xt + intercept
    ss_res = float(np.sum((np.log(ut) - pred) ** 2))
    ss_tot = float(np.sum((np.log(ut) - np.log(ut).mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ExponentialTail(rate=float(-slope), r_squared=r2,
                           asymptotic=bool(r2 > 0.999))


def wave_residual(w: WaveProfile, core_band: tuple = (1e-6, 1.0 - 1e-6)) -> float:
    """Sup-norm residual of the wave ODE by independent substitution.

    Differentiates the resampled profile with a cubic spline and plugs it
    into -c U' + beta U U' - U'' - U + U^2, reporting the sup over the part
    of the profile with U inside ``core_band``.
    """
    x, u = w.samples.x, w.samples.values
    spl = CubicSpline(x, u)
    up = spl(x, 1)
    upp = spl(x, 2)
    res = -w.c * up + w.beta * u * up - upp - u + u * u
    mask = (u > core_band[0]) & (u < core_band[1])
    mask[:5] = False
    mask[-5:] = False
    return float(np.max(np.abs(res[mask])))


def wave_steepness(w1: WaveProfile, w2: WaveProfile,
                   v_grid: Optional[np.ndarray] = None,
                   rtol: float = 1e-9) -> str:
    """Compare |E1(v)| and |E2(v)| on a shared level grid.

    Returns "steeper" when w1 dominates strictly at every level,
    "less_steep" for the reverse, and "incomparable" otherwise (ties and
    crossings).  Lemma-level expectation: at fixed beta, smaller speed is
    steeper.
    """
    if v_grid is None:
        v_grid = np.arange(0.05, 0.951, 0.05)
    e1 = np.abs(w1.e_at(v_grid))
    e2 = np.abs(w2.e_at(v_grid))
    tol = rtol * np.maximum(e1, e2) + 1e-14
    if np.all(e1 > e2 + tol):
        return "steeper"
    if np.all(e2 > e1 + tol):
        return "less_steep"
    return "incomparable"


def sattinger_limits(beta: float) -> tuple:
    """Far-field limits of the potential in the weighted linearization.

    In the exponentially weighted frame that removes the drift, the
    linearized operator around the wave has limits p_+ at +inf and p_- at
    -inf; both are negative exactly when beta > 2, which is the spectral
    margin behind the exponential convergence of pushed fronts:

        p_+ = -(beta/4 - 1/beta)^2,      p_- = -(1/beta + beta/4)^2 - 1.

    The margin closes as beta -> 2+ (p_+ -> 0), so beta <= 2 is rejected.
    """
    if beta <= 2.0:
        raise ValueError(f"stability margin closes at beta = 2; got beta = {beta}")
    p_plus = -((beta / 4.0 - 1.0 / beta) ** 2)
    p_minus = -((1.0 / beta + beta / 4.0) ** 2) - 1.0
    return p_plus, p_minus
