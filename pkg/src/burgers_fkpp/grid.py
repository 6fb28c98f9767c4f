"""Uniform 1D grids, sampled fields, and discrete calculus.

Everything downstream (time stepping, wave profiles, integral transforms,
front tracking) consumes the two value types defined here:

- ``Grid1D``: a uniform mesh on ``[x_min, x_max]`` with ``n`` nodes.  The
  origin is required to lie strictly inside the domain so that front
  positions normalized to ``x = 0`` are always representable.
- ``Field``: a real-valued function sampled on a grid.

Both are immutable after construction and safe to share across threads.
The operations (``d1``, ``d2``, ``integrate``, ``tail_integral``,
``level_crossing``) are pure functions of their inputs.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid1D",
    "Field",
    "GridError",
    "LevelNotBracketedError",
    "TailNotDecayedWarning",
    "d1",
    "d2",
    "integrate",
    "tail_integral",
    "level_crossing",
    "write_field_csv",
    "read_field_csv",
]

TAIL_DECAY_TOL = 1e-10


class GridError(ValueError):
    """Invalid grid or field construction."""


class LevelNotBracketedError(ValueError):
    """Requested level is not attained inside the sampled range."""


class TailNotDecayedWarning(UserWarning):
    """Right boundary value too large for a trustworthy tail integral."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh with nodes exactly at ``x_min + i*h``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise GridError(f"need n >= 3 nodes, got {self.n}")
        if not (self.x_max > self.x_min):
            raise GridError("x_max must exceed x_min")
        if not (self.x_min < 0.0 < self.x_max):
            raise GridError("grid must contain the origin strictly inside")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    def nodes(self) -> np.ndarray:
        x = self.x_min + self.h * np.arange(self.n)
        x.flags.writeable = False
        return x

    def shifted(self, dx: float) -> "Grid1D":
        """Same mesh re-labeled by a coordinate shift (moving window)."""
        return Grid1D(self.x_min + dx, self.x_max + dx, self.n)


@dataclass(frozen=True)
class Field:
    """Real function sampled on a grid; values are finite and read-only."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise GridError(f"values shape {v.shape} != (n,) = ({self.grid.n},)")
        if not np.all(np.isfinite(v)):
            raise GridError("field values must all be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes()

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def is_profile(self, tol: float = 1e-10) -> bool:
        """True for a solution-profile field: values in [0,1], non-increasing."""
        v = self.values
        in_range = v.min() >= -tol and v.max() <= 1.0 + tol
        monotone = np.all(np.diff(v) <= tol)
        return bool(in_range and monotone)

    def sample(self, xq: np.ndarray) -> np.ndarray:
        """Linear interpolation at query points (clamped at the ends)."""
        return np.interp(xq, self.x, self.values)


def field_from_function(grid: Grid1D, fn) -> Field:
    return Field(grid, fn(grid.nodes()))


def d1(f: Field, scheme: str = "central", upwind_sign: int = 1) -> Field:
    """First derivative.

    ``central``: second-order interior stencil.  ``upwind``: first-order
    one-sided interior stencil biased against the wind direction given by
    ``upwind_sign`` (+1 means wind blows to the right, so use backward
    differences).  Boundaries use one-sided second-order stencils either way.
    """
    v = f.values
    h = f.grid.h
    out = np.empty_like(v)
    if scheme == "central":
        out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    elif scheme == "upwind":
        if upwind_sign >= 0:
            out[1:-1] = (v[1:-1] - v[:-2]) / h
        else:
            out[1:-1] = (v[2:] - v[1:-1]) / h
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return f.with_values(out)


def d2(f: Field) -> Field:
    """Second derivative: 3-point interior, one-sided 4-point at boundaries."""
    v = f.values
    h2 = f.grid.h ** 2
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h2
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
    out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h2
    return f.with_values(out)


def integrate(f: Field, a: float, b: float) -> float:
    """Composite trapezoid on [a, b] with interpolated partial end cells."""
    g = f.grid
    if not (g.x_min - 1e-12 <= a <= b <= g.x_max + 1e-12):
        raise ValueError(f"integration limits [{a}, {b}] outside grid range")
    a = min(max(a, g.x_min), g.x_max)
    b = min(max(b, g.x_min), g.x_max)
    if a == b:
        return 0.0
    x, v = f.x, f.values
    i0 = int(np.ceil((a - g.x_min) / g.h - 1e-12))
    i1 = int(np.floor((b - g.x_min) / g.h + 1e-12))
    total = 0.0
    if i1 > i0:
        total += float(np.trapezoid(v[i0 : i1 + 1], dx=g.h))
    if i0 <= i1:
        # partial cells at both ends, linear interpolation at a and b
        va = np.interp(a, x, v)
        vb = np.interp(b, x, v)
        total += 0.5 * (va + v[i0]) * (x[i0] - a)
        total += 0.5 * (v[i1] + vb) * (b - x[i1])
    else:
        # a and b inside one cell
        va = np.interp(a, x, v)
        vb = np.interp(b, x, v)
        total += 0.5 * (va + vb) * (b - a)
    return total


def tail_integral(f: Field, decay_tol: float = TAIL_DECAY_TOL) -> Field:
    """F(x) = integral of f from x to x_max, right-to-left cumulative trapezoid.

    F(x_max) = 0 by construction.  Emits ``TailNotDecayedWarning`` when the
    right boundary value exceeds ``decay_tol`` in absolute value, since the
    result is then a poor stand-in for the integral to +infinity.
    """
    v = f.values
    if abs(v[-1]) > decay_tol:
        warnings.warn(
            f"|f(x_max)| = {abs(v[-1]):.3e} exceeds decay tolerance {decay_tol:.1e}",
            TailNotDecayedWarning,
            stacklevel=2,
        )
    h = f.grid.h
    seg = 0.5 * h * (v[1:] + v[:-1])
    out = np.zeros_like(v)
    out[:-1] = seg[::-1].cumsum()[::-1]
    return f.with_values(out)


def level_crossing(f: Field, level: float) -> float:
    """The unique x with f(x) = level for a non-increasing sampled f.

    Linear interpolation between the bracketing nodes.  Raises
    ``LevelNotBracketedError`` unless f(x_min) > level > f(x_max).
    """
    v = f.values
    if not (v[0] > level > v[-1]):
        raise LevelNotBracketedError(
            f"level {level} not bracketed by boundary values ({v[0]}, {v[-1]})"
        )
    # first index where the profile drops to or below the level
    idx = int(np.argmax(v <= level))
    x = f.x
    v0, v1 = v[idx - 1], v[idx]
    if v0 == v1:
        return float(x[idx])
    theta = (v0 - level) / (v0 - v1)
    return float(x[idx - 1] + theta * (x[idx] - x[idx - 1]))


def write_field_csv(f: Field, path_or_buf) -> None:
    """Two-column CSV (x, value) with a one-line grid header."""
    g = f.grid
    header = f"# grid x_min={g.x_min:.17g} x_max={g.x_max:.17g} n={g.n}\n"
    lines = [header]
    for xi, vi in zip(f.x, f.values):
        lines.append(f"{xi:.17g},{vi:.17g}\n")
    text = "".join(lines)
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_field_csv(path_or_buf) -> Field:
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = text.strip().splitlines()
    head = lines[0]
    if not head.startswith("# grid"):
        raise GridError("missing grid header line")
    kv = dict(tok.split("=") for tok in head[len("# grid") :].split())
    grid = Grid1D(float(kv["x_min"]), float(kv["x_max"]), int(kv["n"]))
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",")
    return Field(grid, data[:, 1])
