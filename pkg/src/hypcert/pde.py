"""Registered hyperbolic systems: fluxes, flux Jacobians, eigenstructure.

States are arrays with the conserved components on the leading axis, so a
single state has shape ``(m,)`` and a grid of states ``(m, ...)``.  All
functions broadcast over the trailing axes.

Euler eigenvectors use the usual conservative Roe normalization: right
eigenvectors have unit density component for the acoustic and entropy
waves, left eigenvectors are the exact inverse (``L @ R = I``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

SYSTEM_NAMES = ("advection1d", "advection2d", "burgers1d", "burgers2d", "euler1d", "euler2d")


class InvalidStateError(ValueError):
    """A state violates the owning system's validity predicate."""


@dataclass(frozen=True)
class PdeSystem:
    name: str
    m: int
    dim: int
    params: dict[str, float] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.name[:-2]

    @property
    def is_scalar(self) -> bool:
        return self.m == 1

    @property
    def gamma(self) -> float:
        return self.params["gamma"]

    @property
    def component_names(self) -> tuple[str, ...]:
        if self.kind == "euler":
            return ("rho", "rho_u", "E") if self.dim == 1 else ("rho", "rho_u", "rho_v", "E")
        return ("u",)

    def _check_direction(self, direction: int) -> None:
        if direction not in range(self.dim):
            raise ValueError(f"direction {direction} out of range for {self.dim}D system")

    # -- validity -------------------------------------------------------
    def valid(self, U: Any) -> np.ndarray:
        U = np.asarray(U)
        finite = np.all(np.isfinite(U), axis=0)
        if self.kind != "euler":
            return finite
        rho = U[0]
        with np.errstate(all="ignore"):
            p = self.pressure(U)
            return finite & (rho > 0) & (p > 0)

    def require_valid(self, U: Any) -> None:
        if not np.all(self.valid(U)):
            raise InvalidStateError(f"non-physical state for {self.name}")

    # -- Euler helpers --------------------------------------------------
    def pressure(self, U: Any) -> np.ndarray:
        U = np.asarray(U)
        rho = U[0]
        kinetic = sum(U[k] ** 2 for k in range(1, self.dim + 1)) / (2 * rho)
        return (U[-1] - kinetic) * (self.gamma - 1.0)

    def _swap(self, U: np.ndarray) -> np.ndarray:
        # y-direction Euler quantities are x-direction ones with momenta swapped
        return U[[0, 2, 1, 3]]

    # -- flux -----------------------------------------------------------
    def flux(self, U: Any, direction: int = 0) -> np.ndarray:
        self._check_direction(direction)
        U = np.asarray(U)
        if self.kind == "advection":
            return self.params["a"] * U
        if self.kind == "burgers":
            return 0.5 * U * U
        if self.dim == 2 and direction == 1:
            return self._swap(self._euler_flux_x(self._swap(U)))
        return self._euler_flux_x(U)

    def _euler_flux_x(self, U: np.ndarray) -> np.ndarray:
        rho, mx, E = U[0], U[1], U[-1]
        u = mx / rho
        p = self.pressure(U)
        if self.dim == 1:
            return np.stack([mx, mx * u + p, u * (E + p)])
        return np.stack([mx, mx * u + p, U[2] * u, u * (E + p)])

    # -- Jacobian -------------------------------------------------------
    def jacobian(self, U: Any, direction: int = 0) -> np.ndarray:
        self._check_direction(direction)
        U = np.asarray(U)
        if self.kind == "advection":
            return np.full((1, 1) + U.shape[1:], self.params["a"], dtype=U.dtype if np.iscomplexobj(U) else float)
        if self.kind == "burgers":
            return U[None, :].astype(U.dtype if np.iscomplexobj(U) else float) * np.ones((1, 1) + U.shape[1:])
        if self.dim == 2 and direction == 1:
            A = self._euler_jacobian_x(self._swap(U))
            return A[[0, 2, 1, 3]][:, [0, 2, 1, 3]]
        return self._euler_jacobian_x(U)

    def _euler_jacobian_x(self, U: np.ndarray) -> np.ndarray:
        g = self.gamma
        rho, E = U[0], U[-1]
        u = U[1] / rho
        p = self.pressure(U)
        H = (E + p) / rho
        zero = np.zeros_like(u)
        one = np.ones_like(u)
        if self.dim == 1:
            rows = [
                [zero, one, zero],
                [0.5 * (g - 3.0) * u * u, (3.0 - g) * u, (g - 1.0) * one],
                [u * (0.5 * (g - 1.0) * u * u - H), H - (g - 1.0) * u * u, g * u],
            ]
        else:
            v = U[2] / rho
            q2 = u * u + v * v
            rows = [
                [zero, one, zero, zero],
                [0.5 * (g - 1.0) * q2 - u * u, (3.0 - g) * u, -(g - 1.0) * v, (g - 1.0) * one],
                [-u * v, v, u, zero],
                [u * (0.5 * (g - 1.0) * q2 - H), H - (g - 1.0) * u * u, -(g - 1.0) * u * v, g * u],
            ]
        return np.array([[np.asarray(c) for c in row] for row in rows])

    def flux_hessian(self, U: Any, direction: int = 0) -> np.ndarray:
        """Second derivatives ``H[i, j, k] = d2 F_i / dU_j dU_k``.

        Computed by complex-step differentiation of the analytic Jacobian,
        which is exact to rounding (no subtractive cancellation).
        """
        U = np.asarray(U, dtype=float)
        h = 1e-30
        out = np.empty((self.m, self.m, self.m) + U.shape[1:])
        for k in range(self.m):
            Uc = U.astype(complex)
            Uc[k] = Uc[k] + 1j * h
            out[:, :, k] = np.imag(self.jacobian(Uc, direction)) / h
        return out

    # -- eigenstructure -------------------------------------------------
    def eigen(self, U: Any, direction: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(lam, R, L)``; eigenvalues ascending, ``R[:, i]`` right, ``L[i, :]`` left."""
        self._check_direction(direction)
        U = np.asarray(U, dtype=float)
        if self.kind in ("advection", "burgers"):
            lam = self.jacobian(U, direction)[0]
            ones = np.ones((1, 1) + U.shape[1:])
            return lam, ones, ones.copy()
        if self.dim == 2 and direction == 1:
            P = [0, 2, 1, 3]
            lam, R, L = self._euler_eigen_x(self._swap(U))
            return lam, R[P], L[:, P]
        return self._euler_eigen_x(U)

    def _euler_eigen_x(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rho = U[0]
        u = U[1] / rho
        v = U[2] / rho if self.dim == 2 else None
        p = self.pressure(U)
        H = (U[-1] + p) / rho
        c = np.sqrt(self.gamma * p / rho)
        return euler_eigensystem(self.gamma, u, v, H, c)

    def max_wave_speed(self, U: Any, direction: int = 0) -> np.ndarray:
        self._check_direction(direction)
        U = np.asarray(U, dtype=float)
        if not np.all(self.valid(U)):
            raise InvalidStateError(f"non-physical state for {self.name}")
        if self.kind == "advection":
            return np.abs(self.params["a"]) * np.ones(U.shape[1:])
        if self.kind == "burgers":
            return np.abs(U[0])
        rho = U[0]
        un = U[1 + direction] / rho
        c = np.sqrt(self.gamma * self.pressure(U) / rho)
        return np.abs(un) + c

    # -- scalar flux derivatives (blow-up analysis) ----------------------
    def flux_prime(self, u: Any) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "advection":
            return np.full_like(u, self.params["a"])
        if self.kind == "burgers":
            return u.copy()
        raise ValueError("flux_prime is defined for scalar systems only")

    def flux_second(self, u: Any) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "advection":
            return np.zeros_like(u)
        if self.kind == "burgers":
            return np.ones_like(u)
        raise ValueError("flux_second is defined for scalar systems only")

    @property
    def flux_is_linear(self) -> bool:
        return self.kind == "advection"


def euler_eigensystem(gamma: float, u, v, H, c):
    """Conservative-variable eigensystem of the Euler x-flux Jacobian.

    Works for physical states and for Roe-averaged ``(u, v, H, c)``.
    ``v`` is ``None`` in 1D.
    """
    u = np.asarray(u, dtype=float)
    one = np.ones_like(u)
    zero = np.zeros_like(u)
    b1 = (gamma - 1.0) / (c * c)
    if v is None:
        q2 = u * u
        lam = np.stack([u - c, u, u + c])
        R = np.array([
            [one, one, one],
            [u - c, u, u + c],
            [H - u * c, 0.5 * q2, H + u * c],
        ])
        b2 = 0.5 * b1 * q2
        L = np.array([
            [0.5 * (b2 + u / c), 0.5 * (-b1 * u - 1.0 / c), 0.5 * b1],
            [1.0 - b2, b1 * u, -b1],
            [0.5 * (b2 - u / c), 0.5 * (-b1 * u + 1.0 / c), 0.5 * b1],
        ])
        return lam, R, L
    v = np.asarray(v, dtype=float)
    q2 = u * u + v * v
    b2 = 0.5 * b1 * q2
    lam = np.stack([u - c, u, u, u + c])
    R = np.array([
        [one, one, zero, one],
        [u - c, u, zero, u + c],
        [v, v, one, v],
        [H - u * c, 0.5 * q2, v, H + u * c],
    ])
    L = np.array([
        [0.5 * (b2 + u / c), 0.5 * (-b1 * u - 1.0 / c), -0.5 * b1 * v, 0.5 * b1],
        [1.0 - b2, b1 * u, b1 * v, -b1],
        [-v, zero, one, zero],
        [0.5 * (b2 - u / c), 0.5 * (-b1 * u + 1.0 / c), -0.5 * b1 * v, 0.5 * b1],
    ])
    return lam, R, L


def make_system(name: str, **params: float) -> PdeSystem:
    """Build one of the six registered systems.

    ``a`` (advection speed, default 1.0) applies to advection; ``gamma``
    (default 1.4) to Euler.
    """
    if name not in SYSTEM_NAMES:
        raise ValueError(f"unknown system {name!r}; expected one of {SYSTEM_NAMES}")
    dim = int(name[-2])
    kind = name[:-2]
    if kind == "advection":
        a = float(params.pop("a", 1.0))
        if not np.isfinite(a):
            raise ValueError("advection speed must be finite")
        out = {"a": a}
        m = 1
    elif kind == "burgers":
        out = {}
        m = 1
    else:
        gamma = float(params.pop("gamma", 1.4))
        if not gamma > 1.0:
            raise ValueError(f"adiabatic index must exceed 1, got {gamma}")
        out = {"gamma": gamma}
        m = 2 + dim
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")
    return PdeSystem(name=name, m=m, dim=dim, params=out)


def primitive_from_conserved(sys: PdeSystem, U: Any) -> tuple:
    """``(rho, u[, v], P)`` for Euler; the scalar itself otherwise."""
    U = np.asarray(U, dtype=float)
    if sys.is_scalar:
        return (U[0],)
    sys.require_valid(U)
    rho = U[0]
    vel = tuple(U[k] / rho for k in range(1, sys.dim + 1))
    return (rho, *vel, sys.pressure(U))


def conserved_from_primitive(sys: PdeSystem, W: tuple) -> np.ndarray:
    if sys.is_scalar:
        return np.asarray(W[0], dtype=float)[None, ...]
    rho = np.asarray(W[0], dtype=float)
    vel = [np.asarray(w, dtype=float) for w in W[1:-1]]
    p = np.asarray(W[-1], dtype=float)
    kinetic = 0.5 * rho * sum(w * w for w in vel)
    E = p / (sys.gamma - 1.0) + kinetic
    return np.stack([rho, *[rho * w for w in vel], E])


def max_wave_speed(sys: PdeSystem, U: Any, direction: int = 0) -> np.ndarray:
    return sys.max_wave_speed(U, direction)
