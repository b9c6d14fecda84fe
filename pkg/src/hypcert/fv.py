"""Deterministic finite-volume reference solver.

Local Lax-Friedrichs and Roe interface fluxes, optional piecewise-linear
(MUSCL-Hancock) reconstruction limited componentwise, CFL time stepping.
1D runs are unsplit; 2D runs use the Strang sequence X(dt/2) Y(dt) X(dt/2).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _io
from .pde import InvalidStateError, PdeSystem, euler_eigensystem

FLUXES = ("lax_friedrichs", "roe")
LIMITERS = ("none", "minmod", "monotonized_centered", "van_leer", "superbee")
BOUNDARIES = ("outflow", "periodic")

# Harten entropy-fix width as a fraction of the fastest Roe wave
ENTROPY_FIX_FRACTION = 0.1


@dataclass(frozen=True)
class GridSpec:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    cells: tuple[int, ...]
    ghost: int = 2
    boundary: tuple[str, ...] = ("outflow",)

    def __post_init__(self):
        n = len(self.cells)
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "cells", tuple(int(v) for v in self.cells))
        if len(self.boundary) == 1 and n > 1:
            object.__setattr__(self, "boundary", tuple(self.boundary) * n)
        if not (len(self.lower) == len(self.upper) == len(self.boundary) == n) or n not in (1, 2):
            raise ValueError("grid bounds, cells and boundary kinds must agree in length (1 or 2 axes)")
        for lo, hi, c, b in zip(self.lower, self.upper, self.cells, self.boundary):
            if not hi > lo:
                raise ValueError("upper bound must exceed lower bound")
            if c < 4:
                raise ValueError("at least 4 cells per axis")
            if b not in BOUNDARIES:
                raise ValueError(f"unknown boundary kind {b!r}")
        if self.ghost < 1:
            raise ValueError("ghost width must be at least 1")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((hi - lo) / c for lo, hi, c in zip(self.lower, self.upper, self.cells))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.dx)

    def centers(self, axis: int = 0) -> np.ndarray:
        lo, d, c = self.lower[axis], self.dx[axis], self.cells[axis]
        return lo + (np.arange(c) + 0.5) * d

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays in data layout (y rows, x fastest)."""
        if self.dim == 1:
            return (self.centers(0),)
        X, Y = np.meshgrid(self.centers(0), self.centers(1), indexing="xy")
        return X, Y

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return tuple(reversed(self.cells))

    def with_boundary(self, kind: str) -> "GridSpec":
        return GridSpec(self.lower, self.upper, self.cells, self.ghost, (kind,) * self.dim)

    def to_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper), "cells": list(self.cells),
                "ghost": self.ghost, "boundary": list(self.boundary)}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(tuple(d["lower"]), tuple(d["upper"]), tuple(d["cells"]), d.get("ghost", 2),
                   tuple(d.get("boundary", ["outflow"])))


@dataclass
class StateField:
    grid: GridSpec
    data: np.ndarray  # (m, [ny + 2g,] nx + 2g)

    @classmethod
    def from_interior(cls, grid: GridSpec, interior: np.ndarray) -> "StateField":
        interior = np.asarray(interior, dtype=float)
        g = grid.ghost
        pad = [(0, 0)] + [(g, g)] * grid.dim
        f = cls(grid, np.pad(interior, pad))
        f.fill_ghosts()
        return f

    @property
    def interior(self) -> np.ndarray:
        g = self.grid.ghost
        if self.grid.dim == 1:
            return self.data[:, g:-g]
        return self.data[:, g:-g, g:-g]

    def copy(self) -> "StateField":
        return StateField(self.grid, self.data.copy())

    def fill_ghosts(self) -> None:
        for axis in range(self.grid.dim):
            _fill_axis(self.data, -1 - axis, self.grid.ghost, self.grid.boundary[axis])

    def totals(self) -> np.ndarray:
        """Total of each conserved component, ``sum(U) * dV``."""
        axes = tuple(range(1, self.interior.ndim))
        return self.interior.sum(axis=axes) * self.grid.cell_volume


def _fill_axis(a: np.ndarray, axis: int, g: int, kind: str) -> None:
    b = np.moveaxis(a, axis, -1)
    if kind == "periodic":
        b[..., :g] = b[..., -2 * g:-g]
        b[..., -g:] = b[..., g:2 * g]
    else:
        b[..., :g] = b[..., g:g + 1]
        b[..., -g:] = b[..., -g - 1:-g]


@dataclass(frozen=True)
class SolverConfig:
    flux: str = "roe"
    limiter: str = "none"
    cfl: float = 0.9
    t_end: float = 1.0
    frame_count: int = 100

    def __post_init__(self):
        if self.flux not in FLUXES:
            raise ValueError(f"unknown flux {self.flux!r}")
        if self.limiter not in LIMITERS:
            raise ValueError(f"unknown limiter {self.limiter!r}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if self.frame_count < 1:
            raise ValueError("frame_count must be at least 1")
        if not self.t_end >= 0.0:
            raise ValueError("t_end must be non-negative")

    def to_dict(self) -> dict:
        return {"flux": self.flux, "limiter": self.limiter, "cfl": self.cfl,
                "t_end": self.t_end, "frame_count": self.frame_count}


@dataclass
class FrameSeries:
    times: np.ndarray
    frames: np.ndarray  # (K, m, [ny,] nx) interior values
    grid: GridSpec
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("frame times must be strictly increasing")
        if len(self.frames) != len(self.times):
            raise ValueError("one frame per output time")

    def __len__(self) -> int:
        return len(self.times)

    def field(self, k: int) -> StateField:
        return StateField.from_interior(self.grid, self.frames[k])


# -- limiters -----------------------------------------------------------

def limiter_eval(kind: str, theta) -> np.ndarray:
    """Flux-limiter value phi(theta); infinite ratios map to the limiter's asymptote."""
    if kind not in LIMITERS:
        raise ValueError(f"unknown limiter {kind!r}")
    th = np.asarray(theta, dtype=float)
    if kind == "none":
        return np.zeros_like(th)
    with np.errstate(invalid="ignore"):
        if kind == "minmod":
            phi = np.maximum(0.0, np.minimum(1.0, th))
        elif kind == "superbee":
            phi = np.maximum(0.0, np.maximum(np.minimum(2.0 * th, 1.0), np.minimum(th, 2.0)))
        elif kind == "monotonized_centered":
            phi = np.maximum(0.0, np.minimum(np.minimum(2.0 * th, 0.5 * (1.0 + th)), 2.0))
        else:
            a = np.abs(th)
            phi = np.where(np.isinf(th), np.where(th > 0, 2.0, 0.0), (th + a) / (1.0 + a))
    return phi


def _limited_slope(kind: str, back: np.ndarray, fwd: np.ndarray) -> np.ndarray:
    # slope = phi(back / fwd) * fwd, with the ratio's sign/infinity handled explicitly
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(fwd != 0.0, back / np.where(fwd != 0.0, fwd, 1.0),
                         np.where(back == 0.0, 0.0, np.copysign(np.inf, back)))
    return limiter_eval(kind, theta) * fwd


# -- interface fluxes -----------------------------------------------------

def lax_friedrichs_flux(sys: PdeSystem, uL, uR, direction: int = 0) -> np.ndarray:
    """Local Lax-Friedrichs (Rusanov) flux."""
    uL = _as_states(sys, uL)
    uR = _as_states(sys, uR)
    s = np.maximum(sys.max_wave_speed(uL, direction), sys.max_wave_speed(uR, direction))
    return 0.5 * (sys.flux(uL, direction) + sys.flux(uR, direction)) - 0.5 * s * (uR - uL)


def _as_states(sys: PdeSystem, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if sys.is_scalar and (u.ndim == 0 or u.shape[0] != 1):
        u = u[None, ...]
    return u


def _fixed_abs(lam: np.ndarray, delta: np.ndarray) -> np.ndarray:
    a = np.abs(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        smooth = (lam * lam + delta * delta) / (2.0 * delta)
    return np.where(a < delta, smooth, a)


def roe_flux(sys: PdeSystem, uL, uR, direction: int = 0) -> np.ndarray:
    """Roe flux with a Harten entropy fix.

    Fix width per genuinely nonlinear wave is
    ``max(0.1 * max|lam~|, lam~_i - lam_i(uL), lam_i(uR) - lam~_i)``; the second
    and third terms only open for expansive (rarefaction) waves.  Linearly
    degenerate Euler waves are left unmodified.
    States whose Roe average has no real sound speed fall back to the
    Lax-Friedrichs flux.
    """
    uL = _as_states(sys, uL)
    uR = _as_states(sys, uR)
    fL = sys.flux(uL, direction)
    fR = sys.flux(uR, direction)
    dU = uR - uL
    if sys.is_scalar:
        if sys.kind == "advection":
            lam = np.full(uL.shape[1:], sys.params["a"])
            lamL = lamR = lam
        else:
            lam = 0.5 * (uL[0] + uR[0])
            lamL, lamR = uL[0], uR[0]
        delta = np.maximum(ENTROPY_FIX_FRACTION * np.abs(lam), np.maximum(lam - lamL, lamR - lam))
        return 0.5 * (fL + fR) - 0.5 * _fixed_abs(lam, delta) * dU

    lam, R, L, ok = _roe_average(sys, uL, uR, direction)
    lamL = _safe_eigvals(sys, uL, direction)
    lamR = _safe_eigvals(sys, uR, direction)
    delta = np.maximum(ENTROPY_FIX_FRACTION * np.max(np.abs(lam), axis=0),
                       np.maximum(lam - lamL, lamR - lam))
    # contact/shear families are linearly degenerate: no expansion shocks, no fix
    delta[1:-1] = 0.0
    alpha = np.einsum("ij...,j...->i...", L, dU)
    diss = np.einsum("ij...,j...->i...", R, _fixed_abs(lam, delta) * alpha)
    F = 0.5 * (fL + fR) - 0.5 * diss
    if not np.all(ok):
        F = np.where(ok, F, lax_friedrichs_flux(sys, uL, uR, direction))
    return F


def _safe_eigvals(sys: PdeSystem, U: np.ndarray, direction: int) -> np.ndarray:
    with np.errstate(all="ignore"):
        return sys.eigen(U, direction)[0]


def _roe_average(sys: PdeSystem, uL: np.ndarray, uR: np.ndarray, direction: int):
    g = sys.gamma
    perm = [0, 2, 1, 3] if (sys.dim == 2 and direction == 1) else list(range(sys.m))
    aL, aR = uL[perm], uR[perm]
    sL, sR = np.sqrt(aL[0]), np.sqrt(aR[0])
    w = sL + sR
    pL, pR = sys.pressure(aL), sys.pressure(aR)
    HL, HR = (aL[-1] + pL) / aL[0], (aR[-1] + pR) / aR[0]
    u = (aL[1] / sL + aR[1] / sR) / w
    H = (sL * HL + sR * HR) / w
    if sys.dim == 2:
        v = (aL[2] / sL + aR[2] / sR) / w
        q2 = u * u + v * v
    else:
        v = None
        q2 = u * u
    c2 = (g - 1.0) * (H - 0.5 * q2)
    ok = np.isfinite(c2) & (c2 > 0)
    c = np.sqrt(np.where(ok, c2, 1.0))
    lam, R, L = euler_eigensystem(g, u, v, H, c)
    if perm != list(range(sys.m)):
        R = R[perm]
        L = L[:, perm]
    return lam, R, L, ok


NUMERICAL_FLUXES: dict[str, Callable] = {"lax_friedrichs": lax_friedrichs_flux, "roe": roe_flux}


# -- sweeps ---------------------------------------------------------------

def _sweep(sys: PdeSystem, data: np.ndarray, axis: int, direction: int, dt: float, dx: float,
           config: SolverConfig, g: int, boundary: str) -> np.ndarray:
    """One conservative update along ``axis``; returns the boundary flux difference integrand.

    ``data`` is modified in place.  The return value is ``F_right - F_left``
    summed over transverse cells (shape ``(m,)``).
    """
    _fill_axis(data, axis, g, boundary)
    U = np.moveaxis(data, axis, -1)
    n = U.shape[-1] - 2 * g
    numflux = NUMERICAL_FLUXES[config.flux]
    if config.limiter == "none":
        left = U[..., g - 1:g + n]
        right = U[..., g:g + n + 1]
    else:
        if g < 2:
            raise ValueError("limited reconstruction needs two ghost layers")
        c = U[..., g - 1:g + n + 1]
        back = c - U[..., g - 2:g + n]
        fwd = U[..., g:g + n + 2] - c
        slope = _limited_slope(config.limiter, back, fwd)
        lo = c - 0.5 * slope
        hi = c + 0.5 * slope
        half = 0.5 * dt / dx
        with np.errstate(all="ignore"):
            corr = half * (sys.flux(hi, direction) - sys.flux(lo, direction))
            lo = lo - corr
            hi = hi - corr
        bad = ~(sys.valid(lo) & sys.valid(hi))
        if np.any(bad):
            lo = np.where(bad, c, lo)
            hi = np.where(bad, c, hi)
        left = hi[..., :-1]
        right = lo[..., 1:]
    F = numflux(sys, left, right, direction)
    U[..., g:g + n] -= (dt / dx) * (F[..., 1:] - F[..., :-1])
    diff = F[..., -1] - F[..., 0]
    return diff.reshape(sys.m, -1).sum(axis=1)


def _stable_dt(sys: PdeSystem, field: StateField, cfl: float) -> float:
    inner = field.interior
    if not np.all(sys.valid(inner)):
        raise InvalidStateError(f"non-physical state in {sys.name} field")
    dts = []
    for d in range(field.grid.dim):
        s = float(np.max(sys.max_wave_speed(inner, d)))
        dts.append(cfl * field.grid.dx[d] / s if s > 0 else math.inf)
    return min(dts)


def _check(sys: PdeSystem, field: StateField) -> None:
    if not np.all(sys.valid(field.interior)):
        raise InvalidStateError("invalid state after step (CFL or limiter failure)")


def step_1d(sys: PdeSystem, field: StateField, config: SolverConfig, dt: float | None = None,
            boundary_log: list | None = None) -> tuple[StateField, float]:
    """Advance a 1D field by one step; ``dt`` defaults to the CFL step.

    When ``boundary_log`` is given, the time-integrated net boundary flux
    ``dt * (F_right - F_left)`` (per component) is appended to it.
    """
    if field.grid.dim != 1:
        raise ValueError("step_1d needs a 1D grid")
    if dt is None:
        dt = _stable_dt(sys, field, config.cfl)
        if not math.isfinite(dt):
            raise ValueError("zero wave speed: pass an explicit dt")
    out = field.copy()
    diff = _sweep(sys, out.data, -1, 0, dt, field.grid.dx[0], config, field.grid.ghost, field.grid.boundary[0])
    _check(sys, out)
    out.fill_ghosts()
    if boundary_log is not None:
        boundary_log.append(dt * diff)
    return out, dt


def step_2d(sys: PdeSystem, field: StateField, config: SolverConfig, dt: float | None = None,
            boundary_log: list | None = None) -> tuple[StateField, float]:
    """Strang-split step X(dt/2) Y(dt) X(dt/2)."""
    grid = field.grid
    if grid.dim != 2:
        raise ValueError("step_2d needs a 2D grid")
    if dt is None:
        dt = _stable_dt(sys, field, config.cfl)
        if not math.isfinite(dt):
            raise ValueError("zero wave speed: pass an explicit dt")
    out = field.copy()
    dx, dy = grid.dx
    g = grid.ghost
    total = np.zeros(sys.m)
    for axis, direction, h, width, transverse in ((-1, 0, 0.5 * dt, dx, dy), (-2, 1, dt, dy, dx),
                                                  (-1, 0, 0.5 * dt, dx, dy)):
        # the transverse ghost rows are excluded from the update and the flux sum
        view = out.data[:, g:-g, :] if axis == -1 else out.data[:, :, g:-g]
        diff = _sweep(sys, view, axis, direction, h, width, config, g, grid.boundary[direction])
        total += h * diff * transverse
        out.fill_ghosts()
    _check(sys, out)
    if boundary_log is not None:
        boundary_log.append(total)
    return out, dt


def run_simulation(sys: PdeSystem, grid: GridSpec, initial_data, config: SolverConfig,
                   boundary_log: list | None = None) -> FrameSeries:
    """Evolve to ``config.t_end`` and record ``frame_count + 1`` frames (t = 0 included).

    ``initial_data`` is an interior array ``(m, [ny,] nx)`` or a callable
    evaluated at the cell-center mesh.
    """
    if callable(initial_data):
        U0 = np.asarray(initial_data(*grid.mesh()), dtype=float)
    else:
        U0 = np.asarray(initial_data, dtype=float)
    if U0.shape == grid.interior_shape:
        U0 = U0[None]
    if U0.shape != (sys.m,) + grid.interior_shape:
        raise ValueError(f"initial data shape {U0.shape} does not match grid {grid.interior_shape}")
    if not np.all(sys.valid(U0)):
        raise InvalidStateError("initial data violates the validity predicate")
    field = StateField.from_interior(grid, U0)
    stepper = step_1d if grid.dim == 1 else step_2d
    times = config.t_end * np.arange(config.frame_count + 1) / config.frame_count
    frames = [field.interior.copy()]
    t = 0.0
    steps = 0
    for target in times[1:]:
        while t < target:
            dt = _stable_dt(sys, field, config.cfl)
            if dt >= target - t:
                dt = target - t
                field, _ = stepper(sys, field, config, dt=dt, boundary_log=boundary_log)
                t = float(target)
            else:
                field, _ = stepper(sys, field, config, dt=dt, boundary_log=boundary_log)
                t += dt
            steps += 1
        frames.append(field.interior.copy())
    prov = {"system": sys.name, "params": dict(sys.params), **config.to_dict(),
            "resolution": list(grid.cells), "steps": steps}
    return FrameSeries(times, np.array(frames), grid, prov)


# -- frame files ----------------------------------------------------------

def write_frames(series: FrameSeries, sys: PdeSystem, out_dir: str | Path) -> Path:
    """Write ``frame_%04d.csv`` files plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = series.grid
    names = sys.component_names
    coords = grid.mesh()
    for k, frame in enumerate(series.frames):
        with open(out / f"frame_{k:04d}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            if grid.dim == 1:
                w.writerow(["i", "x", *names])
                for i in range(grid.cells[0]):
                    w.writerow([i, _io.fmt17(coords[0][i]), *(_io.fmt17(v) for v in frame[:, i])])
            else:
                w.writerow(["i", "j", "x", "y", *names])
                ny, nx = grid.interior_shape
                for j in range(ny):
                    for i in range(nx):
                        w.writerow([i, j, _io.fmt17(coords[0][j, i]), _io.fmt17(coords[1][j, i]),
                                    *(_io.fmt17(v) for v in frame[:, j, i])])
    _io.write_json(out / "manifest.json", {
        "times": series.times.tolist(),
        "grid": grid.to_dict(),
        "components": list(names),
        "solver": series.provenance,
    })
    return out


def read_frames(in_dir: str | Path) -> FrameSeries:
    src = Path(in_dir)
    manifest = _io.read_json(src / "manifest.json")
    grid = GridSpec.from_dict(manifest["grid"])
    m = len(manifest["components"])
    frames = []
    for k in range(len(manifest["times"])):
        rows = np.loadtxt(src / f"frame_{k:04d}.csv", delimiter=",", skiprows=1, ndmin=2)
        vals = rows[:, -m:].T
        frames.append(vals.reshape((m,) + grid.interior_shape))
    return FrameSeries(np.array([float(t) for t in manifest["times"]]), np.array(frames), grid,
                       manifest["solver"])


def total_variation(u: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(u))))


def periodic(grid: GridSpec) -> GridSpec:
    return grid.with_boundary("periodic")


__all__: Sequence[str] = (
    "GridSpec", "StateField", "SolverConfig", "FrameSeries", "limiter_eval", "lax_friedrichs_flux",
    "roe_flux", "step_1d", "step_2d", "run_simulation", "write_frames", "read_frames",
)
