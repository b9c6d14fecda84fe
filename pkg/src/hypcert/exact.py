"""Closed-form and exact-Riemann reference solutions used as test oracles."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq


def advection_shift(u0: Callable, x, t: float, a: float = 1.0) -> np.ndarray:
    return u0(np.asarray(x, dtype=float) - a * t)


def burgers_tophat(x, t: float, high: float = 3.0, low: float = -1.0, left: float = 2.0,
                   right: float = 4.0) -> np.ndarray:
    """Entropy solution for a ``high`` plateau on ``[left, right]`` over a ``low`` background.

    Valid until the rarefaction head catches the shock (``t < 2 (right-left)/(high-low)``).
    """
    x = np.asarray(x, dtype=float)
    s = 0.5 * (high + low)
    out = np.full_like(x, low)
    fan = (x >= left + low * t) & (x < left + high * t)
    if t > 0:
        out[fan] = (x[fan] - left) / t
    out[(x >= left + high * t) & (x < right + s * t)] = high
    return out


def sod_exact(x, t: float, left=(1.0, 0.0, 1.0), right=(0.125, 0.0, 0.1), gamma: float = 1.4,
              x0: float = 0.5) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact Riemann solution ``(rho, u, p)`` of the 1D Euler equations at time ``t``.

    ``left``/``right`` are primitive ``(rho, u, p)`` triples.  The star pressure
    solves the two-rarefaction/shock pressure function with a bracketing root finder.
    """
    rl, ul, pl = left
    rr, ur, pr = right
    g = gamma
    cl = math.sqrt(g * pl / rl)
    cr = math.sqrt(g * pr / rr)

    def branch(p, rk, pk, ck):
        if p > pk:
            A = 2.0 / ((g + 1.0) * rk)
            B = (g - 1.0) / (g + 1.0) * pk
            return (p - pk) * math.sqrt(A / (p + B))
        return 2.0 * ck / (g - 1.0) * ((p / pk) ** ((g - 1.0) / (2.0 * g)) - 1.0)

    def fp(p):
        return branch(p, rl, pl, cl) + branch(p, rr, pr, cr) + (ur - ul)

    hi = max(pl, pr)
    while fp(hi) < 0:
        hi *= 2.0
    ps = brentq(fp, 1e-14, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    us = 0.5 * (ul + ur) + 0.5 * (branch(ps, rr, pr, cr) - branch(ps, rl, pl, cl))

    x = np.asarray(x, dtype=float)
    rho = np.empty_like(x)
    u = np.empty_like(x)
    p = np.empty_like(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = (x - x0) / t if t > 0 else np.where(x < x0, -np.inf, np.inf)
    gm = (g - 1.0) / (g + 1.0)
    for k, s in enumerate(np.atleast_1d(xi)):
        if s < us:
            # left of contact
            if ps > pl:
                sh = ul - cl * math.sqrt((g + 1.0) / (2 * g) * ps / pl + (g - 1.0) / (2 * g))
                if s < sh:
                    rho[k], u[k], p[k] = rl, ul, pl
                else:
                    rho[k] = rl * (ps / pl + gm) / (gm * ps / pl + 1.0)
                    u[k], p[k] = us, ps
            else:
                cs = cl * (ps / pl) ** ((g - 1.0) / (2 * g))
                head, tail = ul - cl, us - cs
                if s < head:
                    rho[k], u[k], p[k] = rl, ul, pl
                elif s > tail:
                    rho[k] = rl * (ps / pl) ** (1.0 / g)
                    u[k], p[k] = us, ps
                else:
                    c = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * (ul - s))
                    u[k] = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * ul + s)
                    rho[k] = rl * (c / cl) ** (2.0 / (g - 1.0))
                    p[k] = pl * (c / cl) ** (2.0 * g / (g - 1.0))
        else:
            if ps > pr:
                sh = ur + cr * math.sqrt((g + 1.0) / (2 * g) * ps / pr + (g - 1.0) / (2 * g))
                if s > sh:
                    rho[k], u[k], p[k] = rr, ur, pr
                else:
                    rho[k] = rr * (ps / pr + gm) / (gm * ps / pr + 1.0)
                    u[k], p[k] = us, ps
            else:
                cs = cr * (ps / pr) ** ((g - 1.0) / (2 * g))
                head, tail = ur + cr, us + cs
                if s > head:
                    rho[k], u[k], p[k] = rr, ur, pr
                elif s < tail:
                    rho[k] = rr * (ps / pr) ** (1.0 / g)
                    u[k], p[k] = us, ps
                else:
                    c = 2.0 / (g + 1.0) * (cr - 0.5 * (g - 1.0) * (ur - s))
                    u[k] = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * ur + s)
                    rho[k] = rr * (c / cr) ** (2.0 / (g - 1.0))
                    p[k] = pr * (c / cr) ** (2.0 * g / (g - 1.0))
    return rho, u, p


def cell_average(fn: Callable, centers: np.ndarray, dx: float, points: int = 8) -> np.ndarray:
    """Gauss-Legendre cell averages of ``fn`` over uniform cells."""
    nodes, weights = np.polynomial.legendre.leggauss(points)
    acc = np.zeros_like(centers, dtype=float)
    for z, w in zip(nodes, weights):
        acc += 0.5 * w * fn(centers + 0.5 * dx * z)
    return acc
