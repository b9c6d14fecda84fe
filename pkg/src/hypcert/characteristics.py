"""A-priori smoothness analysis by the method of characteristics.

Scalar laws: a smooth solution survives until ``t_inf = 1 / sup(-f''(u0) u0')``
(``1/0 = inf``).  Systems: per wave family the coefficient
``alpha_i = grad(lambda_i) . r_i`` and the wave strength
``omega_i = l_i . dU/dx`` give ``t_inf_i = 1 / sup(-alpha_i omega_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import hermite

from .pde import PdeSystem

N_CAP = 8
SAMPLES_PER_PIECE = 10_000
CLASSIFICATIONS = ("smooth_forever", "blowup_at", "discontinuous_from_start", "asymptotically_smooth")
# relative drop of a leading-shock jump that counts as decay
DECAY_THRESHOLD = 0.1


# -- catalog pieces -------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """One analytic piece: ``constant (c)``, ``affine (a, b)`` for a + b x,
    ``sine (offset, A1, k1, p1, ...)`` for offset + sum A sin(k x + p),
    ``gaussian (offset, A, center, width)``."""

    form: str
    params: tuple[float, ...]
    order: float = math.inf

    def __post_init__(self):
        counts = {"constant": lambda n: n == 1, "affine": lambda n: n == 2,
                  "sine": lambda n: n >= 4 and (n - 1) % 3 == 0, "gaussian": lambda n: n == 4}
        if self.form not in counts:
            raise ValueError(f"unknown piece form {self.form!r}")
        if not counts[self.form](len(self.params)):
            raise ValueError(f"bad parameter count for {self.form}")
        if self.form == "gaussian" and not self.params[3] > 0:
            raise ValueError("gaussian width must be positive")

    def deriv(self, x, k: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.form == "constant":
            return np.full_like(x, p[0] if k == 0 else 0.0)
        if self.form == "affine":
            return p[0] + p[1] * x if k == 0 else np.full_like(x, p[1] if k == 1 else 0.0)
        if self.form == "sine":
            out = np.full_like(x, p[0] if k == 0 else 0.0)
            for j in range(1, len(p), 3):
                A, w, ph = p[j:j + 3]
                out = out + A * w ** k * np.sin(w * x + ph + k * math.pi / 2)
            return out
        off, A, c, w = p
        s = (x - c) / w
        coef = np.zeros(k + 1)
        coef[k] = 1.0
        val = A * (-1) ** k * hermite.hermval(s, coef) * np.exp(-s * s) / w ** k
        return val + off if k == 0 else val

    def value(self, x) -> np.ndarray:
        return self.deriv(x, 0)

    def monotone(self, lo: float, hi: float) -> int:
        """+1 non-decreasing, -1 non-increasing, 0 neither (sampled)."""
        d = self.deriv(np.linspace(lo, hi, 2001), 1)
        if np.all(d >= 0):
            return 1
        if np.all(d <= 0):
            return -1
        return 0


def constant(c: float) -> Piece:
    return Piece("constant", (float(c),))


def affine(a: float, b: float) -> Piece:
    return Piece("affine", (float(a), float(b)))


def sine(terms: Sequence[tuple[float, float, float]], offset: float = 0.0) -> Piece:
    flat: list[float] = [float(offset)]
    for t in terms:
        flat.extend(float(v) for v in t)
    return Piece("sine", tuple(flat))


def gaussian(amplitude: float, center: float, width: float, offset: float = 0.0) -> Piece:
    return Piece("gaussian", (float(offset), float(amplitude), float(center), float(width)))


@dataclass(frozen=True)
class Piecewise1D:
    """Scalar piecewise-analytic data on ``domain``.

    ``closed_left[i]`` says breakpoint ``i`` belongs to the piece on its left.
    """

    domain: tuple[float, float]
    breakpoints: tuple[float, ...]
    pieces: tuple[Piece, ...]
    closed_left: tuple[bool, ...] | None = None

    def __post_init__(self):
        lo, hi = self.domain
        if not hi > lo:
            raise ValueError("empty domain")
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise ValueError("need one more piece than breakpoints")
        b = np.asarray(self.breakpoints, dtype=float)
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.closed_left is None:
            object.__setattr__(self, "closed_left", (True,) * len(self.breakpoints))

    dim = 1
    m = 1

    def intervals(self) -> list[tuple[float, float]]:
        edges = [self.domain[0], *self.breakpoints, self.domain[1]]
        return [(max(a, self.domain[0]), min(b, self.domain[1])) for a, b in zip(edges[:-1], edges[1:])]

    def _index(self, x: np.ndarray) -> np.ndarray:
        idx = np.zeros(x.shape, dtype=int)
        for b, closed in zip(self.breakpoints, self.closed_left):
            idx += (x > b) if closed else (x >= b)
        return idx

    def evaluate(self, x, k: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = self._index(x)
        out = np.zeros_like(x)
        for i, p in enumerate(self.pieces):
            sel = idx == i
            if np.any(sel):
                out[sel] = p.deriv(x[sel], k)
        return out

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def one_sided(self, i: int, k: int = 0) -> tuple[float, float]:
        """Left and right limits of the ``k``-th derivative at breakpoint ``i``."""
        b = self.breakpoints[i]
        return float(self.pieces[i].deriv(b, k)), float(self.pieces[i + 1].deriv(b, k))

    def jump_order(self, i: int, tol: float = 1e-12) -> float:
        """Lowest derivative order that jumps at breakpoint ``i`` (inf if none up to N_CAP)."""
        for k in range(N_CAP + 1):
            a, b = self.one_sided(i, k)
            if abs(a - b) > tol * (1 + abs(a) + abs(b)):
                return k
        return math.inf

    @property
    def value_jumps(self) -> int:
        return sum(1 for i in range(len(self.breakpoints)) if self.jump_order(i) == 0)


@dataclass(frozen=True)
class Stacked1D:
    """Vector-valued 1D data, one ``Piecewise1D`` per conserved component."""

    components: tuple[Piecewise1D, ...]
    dim = 1

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def domain(self) -> tuple[float, float]:
        return self.components[0].domain

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(b for c in self.components for b in c.breakpoints)))

    def evaluate(self, x, k: int = 0) -> np.ndarray:
        return np.stack([c.evaluate(x, k) for c in self.components])

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    @property
    def value_jumps(self) -> int:
        pts = set()
        for c in self.components:
            for i, b in enumerate(c.breakpoints):
                if c.jump_order(i) == 0:
                    pts.add(b)
        return len(pts)


@dataclass(frozen=True)
class DiskData:
    """Disk indicator ``inside`` where ``(x-cx)^2 + (y-cy)^2 <= r2``, else ``outside``."""

    domain: tuple[tuple[float, float], tuple[float, float]]
    center: tuple[float, float]
    r2: float
    inside: tuple[float, ...]
    outside: tuple[float, ...]
    dim = 2

    @property
    def m(self) -> int:
        return len(self.inside)

    def evaluate(self, X, Y) -> np.ndarray:
        mask = (X - self.center[0]) ** 2 + (Y - self.center[1]) ** 2 <= self.r2
        return np.stack([np.where(mask, a, b) for a, b in zip(self.inside, self.outside)]).astype(float)

    def __call__(self, X, Y) -> np.ndarray:
        return self.evaluate(X, Y)

    @property
    def value_jumps(self) -> int:
        return int(any(a != b for a, b in zip(self.inside, self.outside)))


@dataclass(frozen=True)
class QuadrantData:
    """Four constant states split at ``corner``; order NE, NW, SE, SW."""

    domain: tuple[tuple[float, float], tuple[float, float]]
    corner: tuple[float, float]
    states: tuple[tuple[float, ...], ...]
    dim = 2

    @property
    def m(self) -> int:
        return len(self.states[0])

    def evaluate(self, X, Y) -> np.ndarray:
        east = X >= self.corner[0]
        north = Y >= self.corner[1]
        ne, nw, se, sw = (np.asarray(s, dtype=float) for s in self.states)
        out = np.empty((self.m,) + np.shape(X))
        for c in range(self.m):
            out[c] = np.where(north, np.where(east, ne[c], nw[c]), np.where(east, se[c], sw[c]))
        return out

    def __call__(self, X, Y) -> np.ndarray:
        return self.evaluate(X, Y)

    @property
    def value_jumps(self) -> int:
        ne, nw, se, sw = self.states
        # interfaces: north (nw|ne), south (sw|se), west (sw|nw), east (se|ne)
        return sum(1 for a, b in ((nw, ne), (sw, se), (sw, nw), (se, ne)) if tuple(a) != tuple(b))


InitialData = Piecewise1D | Stacked1D | DiskData | QuadrantData


# -- reports --------------------------------------------------------------

@dataclass
class SmoothnessReport:
    classification: str
    n: float  # smooth-part order, capped at N_CAP
    t_inf: list[float]
    discontinuity_count_at_t0: int
    notes: list[str] = field(default_factory=list)
    n_global: float = 0
    flux_case: int | None = None

    def __post_init__(self):
        if self.classification not in CLASSIFICATIONS:
            raise ValueError(f"unknown classification {self.classification!r}")
        if self.classification == "smooth_forever" and not all(math.isinf(t) for t in self.t_inf):
            raise ValueError("smooth_forever requires every t_inf to be infinite")
        if self.classification != "discontinuous_from_start" and not all(t > 0 for t in self.t_inf):
            raise ValueError("blow-up times must be positive")

    def to_dict(self) -> dict:
        return {"classification": self.classification, "n": _num(self.n), "n_global": _num(self.n_global),
                "t_inf": [float(t) for t in self.t_inf],
                "discontinuity_count_at_t0": self.discontinuity_count_at_t0,
                "flux_case": self.flux_case, "notes": list(self.notes)}

    @classmethod
    def from_dict(cls, d: dict) -> "SmoothnessReport":
        return cls(d["classification"], _unnum(d["n"]), [float(t) for t in d["t_inf"]],
                   int(d["discontinuity_count_at_t0"]), list(d.get("notes", [])),
                   _unnum(d.get("n_global", 0)), d.get("flux_case"))


def _num(n: float):
    return int(n) if math.isfinite(n) else "inf"


def _unnum(v) -> float:
    return math.inf if v == "inf" else int(v)


# -- smoothness order ----------------------------------------------------

def smoothness_order(u0: InitialData) -> tuple[float, float]:
    """``(global_n, smooth_part_n)``, both capped at ``N_CAP``.

    The global order is the number of continuous derivatives across the
    whole domain, so any value jump or kink gives 0.
    """
    if isinstance(u0, Piecewise1D):
        parts = [u0]
    elif isinstance(u0, Stacked1D):
        parts = list(u0.components)
    else:
        smooth = N_CAP
        return (0 if u0.value_jumps else smooth), smooth
    smooth = min(min(p.order for p in c.pieces) for c in parts)
    glob = smooth
    for c in parts:
        for i in range(len(c.breakpoints)):
            k = c.jump_order(i)
            if math.isfinite(k):
                glob = min(glob, max(k - 1, 0))
    return min(glob, N_CAP), min(smooth, N_CAP)


# -- scalar classification -------------------------------------------------

def _piece_samples(u0: Piecewise1D) -> list[tuple[np.ndarray, Piece]]:
    out = []
    for (lo, hi), p in zip(u0.intervals(), u0.pieces):
        if hi > lo:
            # uniform samples including both endpoints = one-sided breakpoint limits
            out.append((np.linspace(lo, hi, SAMPLES_PER_PIECE), p))
    return out


def scalar_blowup_rate(sys: PdeSystem, u0: Piecewise1D) -> float:
    """``sup(-f''(u0) u0')`` over the smooth pieces (samples + one-sided limits)."""
    best = -math.inf
    for x, p in _piece_samples(u0):
        u = p.value(x)
        best = max(best, float(np.max(-sys.flux_second(u) * p.deriv(x, 1))))
    return best


def blowup_time(rate: float) -> float:
    # 1/0 = inf convention; non-positive rates never blow up
    return 1.0 / rate if rate > 0 else math.inf


def classify_scalar(sys: PdeSystem, u0: InitialData, series=None) -> SmoothnessReport:
    """Classify a scalar problem; ``series`` (a solver run) enables the asymptotic check."""
    if not sys.is_scalar:
        raise ValueError("classify_scalar needs a scalar system")
    if u0.m != 1:
        raise ValueError("scalar data expected")
    glob, smooth = smoothness_order(u0)
    jumps = u0.value_jumps
    notes: list[str] = []
    if jumps:
        notes.append("data has value jumps at t=0: smoothness measured per smooth part")
    if sys.flux_is_linear:
        notes.append("case 1: linear flux, characteristics never cross")
        cls = "discontinuous_from_start" if jumps else "smooth_forever"
        return SmoothnessReport(cls, smooth, [math.inf], jumps, notes, glob, 1)

    if isinstance(u0, Piecewise1D):
        rate = scalar_blowup_rate(sys, u0)
    else:
        rate = 0.0  # 2D catalog data is piecewise constant: zero gradient on the smooth parts
    t = blowup_time(rate)
    case = 1 if math.isinf(t) else 2
    if case == 1:
        notes.append("case 1: convex flux with non-decreasing smooth parts")
    else:
        notes.append("case 2: characteristics cross at t_inf = 1/sup(-f''(u0) u0')")
    if jumps:
        cls = "discontinuous_from_start"
        if series is not None and detect_asymptotic_smoothing(sys, series):
            cls = "asymptotically_smooth"
            notes.append("downward jumps decay along the run: discontinuity set asymptotically empty")
    else:
        cls = "smooth_forever" if case == 1 else "blowup_at"
    return SmoothnessReport(cls, smooth, [t], jumps, notes, glob, case)


def downward_variation(frame: np.ndarray, dx: Sequence[float]) -> float:
    """Total drop ``sum max(0, u_i - u_{i+1})`` weighted by interface size (compressive jumps)."""
    u = np.asarray(frame)
    if u.ndim == 1:
        return float(np.sum(np.maximum(0.0, u[:-1] - u[1:])))
    dx_, dy_ = dx
    gx = np.sum(np.maximum(0.0, u[:, :-1] - u[:, 1:])) * dy_
    gy = np.sum(np.maximum(0.0, u[:-1, :] - u[1:, :])) * dx_
    return float(gx + gy)


def characteristic_lines(frame: np.ndarray) -> list[np.ndarray]:
    """Grid lines along the characteristic direction, ordered downstream.

    In 2D both directional fluxes coincide, so characteristics run along
    (1, 1) and the cell diagonals are the lines.
    """
    u = np.asarray(frame)
    if u.ndim == 1:
        return [u]
    n = u.shape[0]
    return [np.diagonal(u, o) for o in range(-n + 1, u.shape[1])]


def leading_jump(line: np.ndarray, tol: float) -> float:
    """Rankine-Hugoniot jump ``u_behind - u_ahead`` of the most downstream shock on a line."""
    drops = np.nonzero(line[:-1] - line[1:] > tol)[0]
    if len(drops) == 0:
        return 0.0
    i = drops[-1]
    # a captured shock spans a few cells; take the plateau values on either side
    return float(line[max(0, i - 3):i + 1].max() - line[i + 1:i + 5].min())


def detect_asymptotic_smoothing(sys: PdeSystem, series) -> bool:
    """True when the only jump-carrying family is genuinely nonlinear and a shock decays.

    Compares the leading-shock jump on every characteristic line between the
    first and last frame; a drop by more than ``DECAY_THRESHOLD`` on any line
    means a rarefaction has overtaken that shock.  Only convex scalar laws
    qualify: Euler carries a linearly degenerate contact that never decays.
    """
    if not sys.is_scalar or sys.flux_is_linear:
        return False
    first, last = series.frames[0, 0], series.frames[-1, 0]
    amplitude = float(first.max() - first.min())
    if amplitude <= 0:
        return False
    tol = 0.05 * amplitude
    for a, b in zip(characteristic_lines(first), characteristic_lines(last)):
        j0 = leading_jump(a, tol)
        if j0 > 0 and leading_jump(b, tol) < (1.0 - DECAY_THRESHOLD) * j0:
            return True
    return False


# -- systems ---------------------------------------------------------------

def euler_wave_coefficients(sys: PdeSystem, U: np.ndarray, direction: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(alpha, R, L)`` with ``alpha_i = grad_U(lambda_i) . r_i``.

    Eigenvalue gradients are taken in primitive variables and chain-ruled:
    ``d c / d rho = -c/(2 rho)``, ``d c / d p = gamma/(2 rho c)``.
    """
    g = sys.gamma
    U = np.asarray(U, dtype=float)
    lam, R, L = sys.eigen(U, direction)
    rho = U[0]
    n = sys.dim
    vel = [U[k] / rho for k in range(1, n + 1)]
    p = sys.pressure(U)
    c = np.sqrt(g * p / rho)
    m = sys.m
    zero = np.zeros_like(rho)
    # dW/dU with W = (rho, u[, v], p)
    dW = np.zeros((m, m) + rho.shape)
    dW[0, 0] = 1.0
    for k in range(n):
        dW[1 + k, 0] = -vel[k] / rho
        dW[1 + k, 1 + k] = 1.0 / rho
    q2 = sum(v * v for v in vel)
    dW[-1, 0] = 0.5 * (g - 1.0) * q2
    for k in range(n):
        dW[-1, 1 + k] = -(g - 1.0) * vel[k]
    dW[-1, -1] = g - 1.0
    dc = np.zeros((m,) + rho.shape)
    dc[0] = -c / (2 * rho)
    dc[-1] = g / (2 * rho * c)
    un = np.zeros((m,) + rho.shape)
    un[1 + direction] = 1.0
    grads_W = [un - dc]  # u - c
    for _ in range(m - 2):
        grads_W.append(un + 0 * zero)
    grads_W.append(un + dc)
    alpha = np.stack([np.einsum("k...,kj...,j...->...", gw, dW, R[:, i]) for i, gw in enumerate(grads_W)])
    return alpha, R, L


def wave_coefficients(sys: PdeSystem, U: np.ndarray, direction: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if sys.is_scalar:
        lam, R, L = sys.eigen(U, direction)
        return sys.flux_second(np.asarray(U)[0])[None], R, L
    return euler_wave_coefficients(sys, U, direction)


@dataclass(frozen=True)
class WaveBlowup:
    wave: int
    alpha_sign: int  # +1, -1, or 0 (linearly degenerate)
    t_inf: float


def wave_blowup_times(sys: PdeSystem, U0, direction: int = 0) -> list[WaveBlowup]:
    """Per-family blow-up times ``1 / sup(-alpha_i omega_i)``.

    ``U0`` is either 1D initial data (``Stacked1D`` or ``Piecewise1D``) or a
    sampled triple ``(x, U, dU/dx)`` with shapes ``(n,)``, ``(m, n)``, ``(m, n)``.
    Piecewise data is sampled per piece including the one-sided breakpoint limits.
    """
    if isinstance(U0, tuple) and len(U0) == 3 and not isinstance(U0, (Stacked1D, Piecewise1D)):
        samples = [(np.asarray(U0[1], dtype=float), np.asarray(U0[2], dtype=float))]
    elif isinstance(U0, (Stacked1D, Piecewise1D)):
        comps = U0.components if isinstance(U0, Stacked1D) else (U0,)
        edges = [U0.domain[0], *U0.breakpoints, U0.domain[1]]
        samples = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            x = np.linspace(lo, hi, SAMPLES_PER_PIECE)
            mid = 0.5 * (lo + hi)
            # pieces are evaluated on their own interval, endpoints included
            vals, ders = [], []
            for c in comps:
                idx = int(c._index(np.array([mid]))[0])
                vals.append(c.pieces[idx].value(x))
                ders.append(c.pieces[idx].deriv(x, 1))
            samples.append((np.stack(vals), np.stack(ders)))
    elif isinstance(U0, (DiskData, QuadrantData)):
        return [WaveBlowup(i, _alpha_sign(sys, i), math.inf) for i in range(sys.m)]
    else:
        raise TypeError("unsupported initial-data description")
    if len(samples[0][0]) != sys.m:
        raise ValueError("component count does not match the system")

    rates = np.full(sys.m, -np.inf)
    signs = np.zeros(sys.m, dtype=int)
    for U, Ux in samples:
        if not np.all(sys.valid(U)):
            raise ValueError("eigendecomposition failed: invalid sample state")
        alpha, R, L = wave_coefficients(sys, U, direction)
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(L))):
            raise ValueError("eigendecomposition failed at a sample state")
        omega = np.einsum("ij...,j...->i...", L, Ux)
        prod = -alpha * omega
        rates = np.maximum(rates, prod.max(axis=1))
        for i in range(sys.m):
            a = alpha[i]
            if np.any(np.abs(a) > 1e-12 * (1 + np.abs(a).max())):
                signs[i] = int(np.sign(a[np.argmax(np.abs(a))]))
    out = []
    for i in range(sys.m):
        degenerate = signs[i] == 0
        out.append(WaveBlowup(i, int(signs[i]), math.inf if degenerate else blowup_time(float(rates[i]))))
    return out


def _alpha_sign(sys: PdeSystem, i: int) -> int:
    if sys.is_scalar:
        return 0 if sys.flux_is_linear else 1
    if i == 0:
        return -1
    if i == sys.m - 1:
        return 1
    return 0


def classify_system(sys: PdeSystem, U0, series=None) -> SmoothnessReport:
    """Smoothness report for a system, built from the per-family blow-up times."""
    if sys.is_scalar:
        return classify_scalar(sys, U0, series)
    waves = wave_blowup_times(sys, U0)
    t = [w.t_inf for w in waves]
    glob, smooth = smoothness_order(U0)
    jumps = U0.value_jumps
    notes = ["families with alpha = 0 are linearly degenerate: t_inf = inf"]
    if jumps:
        notes.append("data has value jumps at t=0: smoothness measured per smooth part")
        notes.append("contact family is linearly degenerate: jumps persist, not asymptotically smooth")
        cls = "discontinuous_from_start"
    else:
        cls = "smooth_forever" if all(math.isinf(v) for v in t) else "blowup_at"
    case = 1 if all(math.isinf(v) for v in t) else 2
    return SmoothnessReport(cls, smooth, t, jumps, notes, glob, case)
