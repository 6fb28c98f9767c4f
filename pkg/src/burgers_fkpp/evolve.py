"""Time integration of u_t + beta*u*u_x = u_xx + u - u^2 on moving windows.

The working frame is x -> x - m(t) for a configurable frame position m(t)
(lab, linear in t, or linear with a logarithmic correction), in which the
equation reads

    u_t - m'(t) u_x + beta u u_x = u_xx + u - u^2.

Scheme (IMEX backward Euler, the default):

- diffusion and the linear frame advection -m'(t) u_x are folded into one
  implicit tridiagonal solve (centered stencils, unconditionally stable,
  M-matrix for cell Peclet below 2);
- the Burgers flux (beta/2)(u^2)_x is explicit, conservative, with
  minmod-limited MUSCL reconstruction and a Godunov interface flux, upwinded
  by the local characteristic speed;
- the reaction u - u^2 is explicit;
- Dirichlet boundaries hold the initial end values (1 on the left, 0 on the
  right for front data).

Far-field dispersion correction.  The long-time position of pulled fronts
is governed by the marginal-stability root of the linearization at u -> 0,
and the fitted logarithmic-shift coefficients absorb any mismatch between
the discrete and continuum marginal speeds (about 780x the speed error over
a [200, 2000] fitting window).  A plain second-order stencil has a marginal
speed defect of h^2/4, which would bias the fitted log coefficient by ~0.5
at h = 0.05.  We therefore scale the implicit diffusion by (1 + eps(t))
with eps chosen so the discrete symbol matches the continuum growth rate
exactly at the critical decay rate lambda = 1:

    eps = [c (sinh(h)/h - 1) - (c2(h) - 1)] / c2(h),
    c2(h) = 2 (cosh(h) - 1) / h^2,  c = m'(t),

an O(h^2) consistent perturbation that leaves the bulk scheme second order
while making the discrete pulled speed accurate to O(h^4).  Disable with
``tail_correction=False`` to reproduce the uncorrected scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .grid import Field, Grid1D, d1, d2

__all__ = [
    "FrameSpec",
    "SolverConfig",
    "Trajectory",
    "CflViolationError",
    "NumericalBlowupError",
    "make_ic",
    "step",
    "run",
    "supersolution_residual",
    "PushedBarrierParams",
]


class CflViolationError(ValueError):
    """Time step too large for the explicit advection CFL."""


class NumericalBlowupError(RuntimeError):
    """NaN or out-of-range values appeared during time stepping."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class FrameSpec:
    """Co-moving frame x -> x - position(t).

    kind "lab": position 0.  kind "linear": position c*t.  kind "bramson":
    position 2t - (r/2) log(t+1), the frame in which fronts with the
    logarithmic shift settle (r = 3 below the advection transition, r = 1
    at it).
    """

    kind: str = "lab"
    c: float = 0.0
    r: float = 3.0

    def __post_init__(self):
        if self.kind not in ("lab", "linear", "bramson"):
            raise ValueError(f"unknown frame kind {self.kind!r}")

    def position(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "lab":
            return np.zeros_like(t)
        if self.kind == "linear":
            return self.c * t
        return 2.0 * t - 0.5 * self.r * np.log1p(t)

    def speed(self, t: float) -> float:
        if self.kind == "lab":
            return 0.0
        if self.kind == "linear":
            return self.c
        return 2.0 - 0.5 * self.r / (t + 1.0)


@dataclass(frozen=True)
class SolverConfig:
    beta: float
    grid: Grid1D
    dt: float = 1e-3
    t_end: float = 10.0
    scheme: str = "imex_bdf1"
    advection_form: str = "conservative"
    frame: FrameSpec = field(default_factory=FrameSpec)
    regrid_trigger: float = 0.25
    observer_stride: int = 100
    tail_correction: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("imex_bdf1", "strang"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.advection_form not in ("conservative", "nonconservative"):
            raise ValueError(f"unknown advection form {self.advection_form!r}")
        if self.observer_stride < 1:
            raise ValueError("observer_stride must be >= 1")

    def cfl_bound(self) -> float:
        """Explicit-advection stability bound 0.5 h / (|beta| u_max + |c|)."""
        c_max = max(abs(self.frame.speed(0.0)), abs(self.frame.speed(self.t_end)))
        denom = max(abs(self.beta) * 1.0 + c_max, 1e-12)
        return 0.5 * self.grid.h / denom

    def validate_cfl(self):
        if self.dt > self.cfl_bound() + 1e-15:
            raise CflViolationError(
                f"dt = {self.dt} exceeds advection CFL bound {self.cfl_bound():.4g}"
            )


@dataclass(frozen=True)
class Trajectory:
    """Snapshots every observer_stride steps, on congruent shifted windows.

    ``offsets[k]`` is the accumulated window shift (an exact multiple of h)
    at snapshot k; snapshot k lives on ``base_grid`` shifted by it, so field
    coordinates are frame coordinates and lab positions are recovered by
    adding ``frame.position(times[k])``.
    """

    times: np.ndarray
    values: np.ndarray
    offsets: np.ndarray
    base_grid: Grid1D
    frame: FrameSpec
    config: SolverConfig
    aborted: bool = False

    def __len__(self):
        return len(self.times)

    def grid_at(self, k: int) -> Grid1D:
        off = float(self.offsets[k])
        if off == 0.0:
            return self.base_grid
        return self.base_grid.shifted(off)

    def snapshot(self, k: int) -> Field:
        return Field(self.grid_at(k), self.values[k])

    def lab_position(self, k: int, x_frame: float) -> float:
        return x_frame + float(self.frame.position(float(self.times[k])))


def make_ic(kind: str, grid: Grid1D, gamma: float = 1.5, a: float = 0.0,
            L1: float = -5.0, L2: float = 0.0) -> Field:
    """Monotone initial fronts.

    "heaviside": 1 for x <= 0, then a linear ramp to 0 across exactly two
    cells (raw jumps excite upwinding noise, and order-one modifications of
    the datum only move the fitted front constant).

    "steep_sigmoid": 1/(1 + exp(gamma (x - a))) cut off at x = 0, the
    cutoff again ramped over two cells.  Requires gamma > 1 so the datum is
    steeper than the critical wave 1/(1+e^x).

    "front_like": 1 for x <= L1, 0 for x >= L2, cosine ramp between.
    """
    x = grid.nodes()
    h = grid.h
    if kind == "heaviside":
        v = np.where(x <= 0.0, 1.0, np.clip(1.0 - x / (2.0 * h), 0.0, 1.0))
    elif kind == "steep_sigmoid":
        if gamma <= 1.0:
            raise ValueError(f"steep_sigmoid requires gamma > 1, got {gamma}")
        base = 1.0 / (1.0 + np.exp(np.clip(gamma * (x - a), -700, 700)))
        cut = float(base[np.searchsorted(x, 0.0)])
        ramp = np.clip(1.0 - x / (2.0 * h), 0.0, 1.0)
        v = np.where(x <= 0.0, base, cut * ramp)
    elif kind == "front_like":
        if not L1 < L2:
            raise ValueError("front_like requires L1 < L2")
        s = np.clip((x - L1) / (L2 - L1), 0.0, 1.0)
        v = 0.5 * (1.0 + np.cos(np.pi * s))
    else:
        raise ValueError(f"unknown initial condition kind {kind!r}")
    v = np.minimum.accumulate(v)  # guard monotonicity against rounding
    return Field(grid, v)


@njit(cache=True, nogil=True)
def _minmod(a, b):
    if a > 0.0 and b > 0.0:
        return a if a < b else b
    if a < 0.0 and b < 0.0:
        return a if a > b else b
    return 0.0


@njit(cache=True, nogil=True)
def _godunov(beta, ul, ur):
    """Godunov interface flux for q(u) = 0.5 beta u^2."""
    if beta == 0.0:
        return 0.0
    ql = 0.5 * beta * ul * ul
    qr = 0.5 * beta * ur * ur
    if ul <= ur:
        if beta > 0.0 and ul <= 0.0 <= ur:
            return 0.0
        return ql if ql < qr else qr
    if beta > 0.0:
        return ql if ql > qr else qr
    if ur <= 0.0 <= ul:
        return 0.0
    return ql if ql > qr else qr


@njit(cache=True, nogil=True)
def _explicit_rhs(u, rhs, n, h, dt_part, beta, conservative):
    """rhs += dt_part * (-(Burgers advection) + reaction) at interior nodes."""
    if conservative == 1 and beta != 0.0:
        s_prev = 0.0
        s_here = _minmod(u[2] - u[1], u[1] - u[0])
        fl = _godunov(beta, u[0] + 0.5 * s_prev, u[1] - 0.5 * s_here)
        for i in range(1, n - 1):
            if i + 2 <= n - 1:
                s_next = _minmod(u[i + 2] - u[i + 1], u[i + 1] - u[i])
            else:
                s_next = 0.0
            fr = _godunov(beta, u[i] + 0.5 * s_here, u[i + 1] - 0.5 * s_next)
            rhs[i] += dt_part * (-(fr - fl) / h + u[i] * (1.0 - u[i]))
            fl = fr
            s_here = s_next
    elif conservative == 1:
        for i in range(1, n - 1):
            rhs[i] += dt_part * u[i] * (1.0 - u[i])
    else:
        for i in range(1, n - 1):
            ux = (u[i + 1] - u[i - 1]) / (2.0 * h)
            rhs[i] += dt_part * (-beta * u[i] * ux + u[i] * (1.0 - u[i]))


@njit(cache=True, nogil=True)
def _implicit_solve(rhs, out, n, h, dt, c, eps, bcl, bcr, cp, dp):
    """Solve (I - dt [(1+eps) D2 + c D1]) out = rhs with Dirichlet rows."""
    lam = dt * (1.0 + eps) / (h * h)
    adv = dt * c / (2.0 * h)
    lo = -(lam - adv)
    di = 1.0 + 2.0 * lam
    up = -(lam + adv)
    cp[0] = 0.0
    dp[0] = bcl
    for i in range(1, n - 1):
        m = di - lo * cp[i - 1]
        cp[i] = up / m
        dp[i] = (rhs[i] - lo * dp[i - 1]) / m
    out[n - 1] = bcr
    for i in range(n - 2, 0, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    out[0] = bcl


@njit(cache=True, nogil=True)
def _frame_speed(kind, c, r, t):
    if kind == 0:
        return 0.0
    if kind == 1:
        return c
    return 2.0 - 0.5 * r / (t + 1.0)


@njit(cache=True, nogil=True)
def _tail_eps(h, c, enabled):
    if enabled == 0:
        return 0.0
    c2 = 2.0 * (math.cosh(h) - 1.0) / (h * h)
    return (c * (math.sinh(h) / h - 1.0) - (c2 - 1.0)) / c2


@njit(cache=True, nogil=True)
def _advance(u, h, x_min, dt, n_steps, beta, frame_kind, frame_c, frame_r,
             bcl, bcr, stride, trigger, corr, scheme, conservative,
             track_front, snaps, times, offsets):
    """March n_steps; store every `stride` steps into preallocated buffers.

    Returns (snapshots stored, status, steps completed); status 1 means
    NaN/overflow was detected and the march stopped at the last valid state.
    """
    n = u.size
    rhs = np.empty(n)
    unew = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    offset = 0.0
    ihalf = -1
    if track_front == 1:
        ihalf = n - 1
        for i in range(n):
            if u[i] <= 0.5:
                ihalf = i
                break
    i_origin = int(round(-x_min / h))
    guard = int(trigger * n)
    lo_guard = guard
    hi_guard = n - 1 - guard

    snaps[0, :] = u
    times[0] = 0.0
    offsets[0] = 0.0
    count = 1
    status = 0
    k_done = 0

    for k in range(n_steps):
        t = k * dt
        if scheme == 0:
            c = _frame_speed(frame_kind, frame_c, frame_r, t)
            eps = _tail_eps(h, c, corr)
            for i in range(n):
                rhs[i] = u[i]
            _explicit_rhs(u, rhs, n, h, dt, beta, conservative)
            _implicit_solve(rhs, unew, n, h, dt, c, eps, bcl, bcr, cp, dp)
        else:
            c = _frame_speed(frame_kind, frame_c, frame_r, t + 0.5 * dt)
            eps = _tail_eps(h, c, corr)
            for i in range(n):
                rhs[i] = u[i]
            _explicit_rhs(u, rhs, n, h, 0.5 * dt, beta, conservative)
            _implicit_solve(rhs, unew, n, h, dt, c, eps, bcl, bcr, cp, dp)
            for i in range(n):
                rhs[i] = unew[i]
            _explicit_rhs(unew, rhs, n, h, 0.5 * dt, beta, conservative)
            rhs[0] = bcl
            rhs[n - 1] = bcr
            for i in range(n):
                unew[i] = rhs[i]

        for i in range(n):
            u[i] = unew[i]

        # cheap blowup sentinel
        if (k & 31) == 0:
            bad = False
            for i in range(0, n, 7):
                v = u[i]
                if not (-1.0 < v < 2.0) or v != v:
                    bad = True
                    break
            if bad:
                status = 1
                break

        if track_front == 1:
            while ihalf > 1 and u[ihalf - 1] <= 0.5:
                ihalf -= 1
            while ihalf < n - 1 and u[ihalf] > 0.5:
                ihalf += 1
            if ihalf <= lo_guard or ihalf >= hi_guard:
                shift = ihalf - i_origin
                if shift > 0:
                    for i in range(n - shift):
                        u[i] = u[i + shift]
                    for i in range(n - shift, n):
                        u[i] = bcr
                elif shift < 0:
                    for i in range(n - 1, -shift - 1, -1):
                        u[i] = u[i + shift]
                    for i in range(-shift):
                        u[i] = bcl
                offset += shift * h
                ihalf = i_origin
                while ihalf > 1 and u[ihalf - 1] <= 0.5:
                    ihalf -= 1
                while ihalf < n - 1 and u[ihalf] > 0.5:
                    ihalf += 1

        k_done = k + 1
        if k_done % stride == 0:
            snaps[count, :] = u
            times[count] = k_done * dt
            offsets[count] = offset
            count += 1

    return count, status, k_done


def _frame_kind_code(frame: FrameSpec) -> int:
    return {"lab": 0, "linear": 1, "bramson": 2}[frame.kind]


def step(u: Field, config: SolverConfig, t: float = 0.0) -> Field:
    """One time step from state u at time t (IMEX discretization of run)."""
    config.validate_cfl()
    g = u.grid
    n = g.n
    uv = u.values
    c = config.frame.speed(t)
    eps = _tail_eps(g.h, c, 1 if config.tail_correction else 0)
    rhs = uv.copy()
    _explicit_rhs(uv, rhs, n, g.h, config.dt, config.beta,
                  1 if config.advection_form == "conservative" else 0)
    out = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    _implicit_solve(rhs, out, n, g.h, config.dt, c, eps,
                    float(uv[0]), float(uv[-1]), cp, dp)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowupError("non-finite values after one step")
    return Field(g, out)


def run(ic: Field, config: SolverConfig) -> Trajectory:
    """March to t_end with automatic window shifts keeping the front centered.

    The window is shifted by whole nodes whenever the 1/2-level drifts into
    the outer ``regrid_trigger`` fraction of the window; entrant nodes take
    the boundary value and every shift is recorded, so lab-frame positions
    are exactly recoverable.  Raises ``NumericalBlowupError`` carrying the
    trajectory up to the last stored snapshot if the state degenerates.
    """
    config.validate_cfl()
    if ic.grid != config.grid:
        raise ValueError("initial condition grid differs from config grid")
    g = ic.grid
    n_steps = max(0, int(round(config.t_end / config.dt)))
    u = ic.values.copy()
    bcl, bcr = float(u[0]), float(u[-1])
    track = 1 if (bcl > 0.5 > bcr) else 0

    if n_steps == 0:
        return Trajectory(
            times=np.array([0.0]), values=u[None, :].copy(),
            offsets=np.array([0.0]), base_grid=g, frame=config.frame,
            config=config,
        )
    dt = config.t_end / n_steps

    n_snaps = n_steps // config.observer_stride + 1
    snaps = np.empty((n_snaps + 1, g.n))
    times = np.empty(n_snaps + 1)
    offsets = np.empty(n_snaps + 1)

    count, status, k_done = _advance(
        u, g.h, g.x_min, dt, n_steps, config.beta,
        _frame_kind_code(config.frame), config.frame.c, config.frame.r,
        bcl, bcr, config.observer_stride, config.regrid_trigger,
        1 if config.tail_correction else 0,
        0 if config.scheme == "imex_bdf1" else 1,
        1 if config.advection_form == "conservative" else 0,
        track, snaps, times, offsets,
    )
    traj = Trajectory(
        times=times[:count].copy(), values=snaps[:count].copy(),
        offsets=offsets[:count].copy(), base_grid=g, frame=config.frame,
        config=config, aborted=(status != 0),
    )
    if status != 0:
        raise NumericalBlowupError(
            f"numerical blowup detected near t = {k_done * dt:.6g}", traj
        )
    return traj


# ---------------------------------------------------------------------------
# sub/super-solution residuals


@dataclass(frozen=True)
class PushedBarrierParams:
    """Parameters of the pushed-front barriers (valid for beta > 2).

    The barrier is a shifted wave plus/minus a decaying bump
    q(t, z) = q0 exp(-mu t) min(exp(-lambda z), 1) whose drift
    xi(t) = xi0 + (K q0/mu)(1 - exp(-mu t)) absorbs the bump; lambda must
    lie in (2/beta, beta/2), and K q0/mu, |xi0 + z0| stay below d0.
    """

    lam: float
    q0: float = 1e-3
    mu: float = 0.05
    K: float = 20.0
    z0: float = 0.0
    xi0: float = 0.0
    d0: float = 1.0


def _logistic(z):
    return 1.0 / (1.0 + np.exp(np.clip(z, -700, 700)))


def supersolution_residual(kind: str, t: float, grid: Grid1D, beta: float,
                           A: float = 1.2, L: float = 0.0,
                           params: Optional[PushedBarrierParams] = None) -> Field:
    """Pointwise residual u_t - c u_x + beta u u_x - u_xx - u(1-u) of a barrier.

    Time derivatives are analytic; spatial derivatives use the second-order
    grid stencils, so callers should allow an O(h^2) tolerance when
    asserting signs.  "pulled_bound" evaluates the traveling logistic bound
    A/(1 + e^{x-2t-L}) in the lab frame (beta < 2, A in (1, 2/beta));
    "pushed_upper"/"pushed_lower" evaluate the shifted-wave +/- bump
    barriers in the frame moving at the minimal speed (beta > 2).
    """
    x = grid.nodes()
    if kind == "pulled_bound":
        if beta >= 2.0:
            raise ValueError("pulled bound requires beta < 2")
        a_hi = 2.0 / beta if beta > 0 else np.inf
        if not (1.0 < A < a_hi):
            raise ValueError(f"need A in (1, {a_hi}), got {A}")
        ubar = A * _logistic(x - 2.0 * t - L)
        f = Field(grid, ubar)
        s = np.exp(np.clip(x - 2.0 * t - L, -700, 700))
        ut = 2.0 * A * s / (1.0 + s) ** 2
        res = ut + beta * ubar * d1(f).values - d2(f).values - ubar * (1.0 - ubar)
        return Field(grid, res)

    if kind in ("pushed_upper", "pushed_lower"):
        if beta <= 2.0:
            raise ValueError("pushed barriers require beta > 2")
        if params is None:
            raise ValueError("pushed barriers need explicit parameters")
        p = params
        if not (2.0 / beta < p.lam < beta / 2.0):
            raise ValueError(f"lambda must lie in (2/beta, beta/2), got {p.lam}")
        if p.K * p.q0 / p.mu > p.d0 or abs(p.xi0 + p.z0) > p.d0:
            raise ValueError("drift budget violated: K q0/mu or |xi0+z0| above d0")
        c = beta / 2.0 + 2.0 / beta
        xi = p.xi0 + (p.K * p.q0 / p.mu) * (1.0 - math.exp(-p.mu * t))
        xi_dot = p.K * p.q0 * math.exp(-p.mu * t)
        sgn = 1.0 if kind == "pushed_upper" else -1.0
        zc = x - sgn * xi
        phi = _logistic(0.5 * beta * zc)
        phi_p = -0.5 * beta * phi * (1.0 - phi)
        zq = x - p.z0 if kind == "pushed_upper" else x + p.z0
        q = p.q0 * math.exp(-p.mu * t) * np.minimum(
            np.exp(np.clip(-p.lam * zq, -700, 700)), 1.0
        )
        v = phi + sgn * q
        vt = -sgn * xi_dot * phi_p - sgn * p.mu * q
        fv = Field(grid, v)
        res = (vt - c * d1(fv).values + beta * v * d1(fv).values
               - d2(fv).values - v * (1.0 - v))
        return Field(grid, res)

    raise ValueError(f"unknown barrier kind {kind!r}")
