"""Shallow tanh networks with exact backpropagation and full-batch gradient descent.

``Mlp`` is the single-hidden-layer building block; ``DeepMlp`` is the plain
end-to-end baseline; ``BeaconsNet`` chains a learned head, an analytic map
and learned smooth stages, each trained on its own constituent targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _io
from .maps import AnalyticMap
from .pde import PdeSystem


class TrainingError(RuntimeError):
    """Training produced a non-finite loss or invalid targets."""


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # BLAS is far faster on contiguous operands than on transposed views
    return np.ascontiguousarray(a) @ np.ascontiguousarray(b)


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


# -- shallow network ---------------------------------------------------------

@dataclass
class Mlp:
    W1: np.ndarray  # (N, d_in)
    b1: np.ndarray  # (N,)
    W2: np.ndarray  # (d_out, N)
    b2: np.ndarray  # (d_out,)

    def __post_init__(self):
        self.W1 = np.atleast_2d(np.asarray(self.W1, dtype=float))
        self.b1 = np.atleast_1d(np.asarray(self.b1, dtype=float))
        self.W2 = np.atleast_2d(np.asarray(self.W2, dtype=float))
        self.b2 = np.atleast_1d(np.asarray(self.b2, dtype=float))
        N, d_in = self.W1.shape
        if self.b1.shape != (N,) or self.W2.shape[1] != N or self.b2.shape != (self.W2.shape[0],):
            raise ValueError("inconsistent layer dimensions")

    @property
    def width(self) -> int:
        return self.W1.shape[0]

    @property
    def d_in(self) -> int:
        return self.W1.shape[1]

    @property
    def d_out(self) -> int:
        return self.W2.shape[0]

    @property
    def n_params(self) -> int:
        return self.d_out + (self.d_in + self.d_out + 1) * self.width

    def flat(self) -> np.ndarray:
        return np.concatenate([self.W1.ravel(), self.b1, self.W2.ravel(), self.b2])

    def with_flat(self, theta: np.ndarray) -> "Mlp":
        N, d, o = self.width, self.d_in, self.d_out
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError("parameter vector has the wrong length")
        i = 0
        W1 = theta[i:i + N * d].reshape(N, d); i += N * d
        b1 = theta[i:i + N]; i += N
        W2 = theta[i:i + o * N].reshape(o, N); i += o * N
        return Mlp(W1.copy(), b1.copy(), W2.copy(), theta[i:i + o].copy())

    def hidden(self, X: np.ndarray) -> np.ndarray:
        return np.tanh(_mm(X, self.W1.T) + self.b1)

    def __call__(self, X) -> np.ndarray:
        X = _as_batch(X, self.d_in)
        return _mm(self.hidden(X), self.W2.T) + self.b2

    def output_bound(self) -> np.ndarray:
        """``|out| <= |b2| + row sums of |W2|`` since ``|tanh| <= 1``."""
        return np.abs(self.b2) + np.abs(self.W2).sum(axis=1)


def _as_batch(X, d_in: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :] if d_in > 1 or X.size == 1 else X[:, None]
    if X.shape[1] != d_in:
        raise ValueError(f"expected {d_in} input columns, got {X.shape[1]}")
    return X


def init_mlp(d_in: int, width: int, d_out: int, rng: np.random.Generator) -> Mlp:
    """Uniform ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` initialization."""
    if width < 1 or d_in < 1 or d_out < 1:
        raise ValueError("layer sizes must be positive")
    a1 = 1.0 / math.sqrt(d_in)
    a2 = 1.0 / math.sqrt(width)
    W1 = rng.uniform(-a1, a1, (width, d_in))
    b1 = rng.uniform(-a1, a1, width)
    W2 = rng.uniform(-a2, a2, (d_out, width))
    b2 = rng.uniform(-a2, a2, d_out)
    return Mlp(W1, b1, W2, b2)


def mlp_forward(net: Mlp, x) -> np.ndarray:
    out = net(x)
    return out[0] if np.ndim(x) == 1 and net.d_in == np.size(x) else out


def mlp_input_jacobian(net: Mlp, x) -> np.ndarray:
    """``d out / d x``; shape ``(d_out, d_in)`` for one point, ``(n, d_out, d_in)`` for a batch."""
    single = np.ndim(x) == 1 and np.size(x) == net.d_in
    X = _as_batch(x, net.d_in)
    s = 1.0 - net.hidden(X) ** 2
    J = np.einsum("ok,nk,ki->noi", net.W2, s, net.W1)
    return J[0] if single else J


# -- losses ------------------------------------------------------------------

def _check_weight(W, m: int) -> np.ndarray:
    if W is None:
        return np.eye(m)
    W = np.asarray(W, dtype=float)
    if W.shape != (m, m):
        raise ValueError("weight matrix has the wrong shape")
    if not np.allclose(W, W.T, rtol=0, atol=1e-14 * (1 + np.abs(W).max())):
        raise ValueError("weight matrix must be symmetric")
    try:
        np.linalg.cholesky(W + 1e-12 * max(1.0, np.trace(W)) * np.eye(m))
    except np.linalg.LinAlgError:
        raise ValueError("weight matrix is not positive semi-definite") from None
    return W


def _backprop_output(net: Mlp, X: np.ndarray, h: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Parameter gradient given ``G = dLoss/dOutput`` of shape ``(n, d_out)``."""
    gW2 = _mm(G.T, h)
    gb2 = G.sum(axis=0)
    gz = _mm(G, net.W2) * (1.0 - h * h)
    gW1 = _mm(gz.T, X)
    gb1 = gz.sum(axis=0)
    return np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])


def loss_and_grad_supervised(net: Mlp, inputs, targets, W=None) -> tuple[float, np.ndarray]:
    """Mean weighted squared residual ``mean_i r_i^T W r_i`` and its exact gradient."""
    X = _as_batch(inputs, net.d_in)
    T = np.asarray(targets, dtype=float).reshape(len(X), -1)
    if T.shape[1] != net.d_out:
        raise ValueError("target dimension does not match the network output")
    Wm = _check_weight(W, net.d_out)
    h = net.hidden(X)
    r = _mm(h, net.W2.T) + net.b2 - T
    n = len(X)
    rW = _mm(r, Wm)
    loss = float(np.sum(rW * r) / n)
    G = (2.0 / n) * rW
    return loss, _backprop_output(net, X, h, G)


def _pde_residual_parts(net: Mlp, sys: PdeSystem, X: np.ndarray):
    h = net.hidden(X)
    s = 1.0 - h * h
    u = h @ net.W2.T + net.b2  # (n, m)
    D = np.einsum("ok,nk,kj->njo", net.W2, s, net.W1)  # (n, q, m): d u / d x_j
    dims = sys.dim
    J = [np.moveaxis(sys.jacobian(u.T, d), -1, 0) for d in range(dims)]  # (n, m, m)
    r = D[:, 0, :].copy()
    for d in range(dims):
        r += np.einsum("nab,nb->na", J[d], D[:, 1 + d, :])
    return h, s, u, D, J, r


def loss_and_grad_residual(net: Mlp, sys: PdeSystem, interior, boundary=None, lam_pde: float = 1.0,
                           lam_bc: float = 1.0, W=None) -> tuple[float, np.ndarray]:
    """``lam_pde * J_PDE + lam_bc * J_BC`` for ``u_t + sum_d d f_d(u)/d x_d = 0``.

    Inputs are ``(t, x[, y])`` points.  ``boundary`` is ``(points, values)``
    for the Dirichlet operator ``B[u] = u``.  The flux derivative is chain-ruled
    through the Jacobian; its parameter derivative uses the flux Hessian.
    """
    m = sys.m
    if net.d_out != m or net.d_in != 1 + sys.dim:
        raise ValueError("network dimensions do not match the system")
    Wm = _check_weight(W, m)
    X = _as_batch(interior, net.d_in)
    n = len(X)
    h, s, u, D, J, r = _pde_residual_parts(net, sys, X)
    j_pde = float(np.einsum("ni,ij,nj->", r, Wm, r) / n)
    rho = (2.0 / n) * lam_pde * r @ Wm  # adjoint of the residual
    # A: sensitivity of rho . r to a change of u (through the Jacobian)
    A = np.zeros_like(u)
    for d in range(sys.dim):
        H = np.moveaxis(sys.flux_hessian(u.T, d), -1, 0)  # (n, m, m, m)
        A += np.einsum("na,nabg,nb->ng", rho, H, D[:, 1 + d, :])
    # B[:, j, :]: coefficient of d u / d x_j in rho . r
    B = np.empty_like(D)
    B[:, 0, :] = rho
    for d in range(sys.dim):
        B[:, 1 + d, :] = np.einsum("na,nab->nb", rho, J[d])
    AW = A @ net.W2  # (n, N)
    BW = np.einsum("njo,ok->njk", B, net.W2)  # (n, q, N)
    gb2 = A.sum(axis=0)
    gW2 = A.T @ h + np.einsum("njo,nk,kj->ok", B, s, net.W1)
    c = AW * s - 2.0 * h * s * np.einsum("njk,kj->nk", BW, net.W1)
    gb1 = c.sum(axis=0)
    gW1 = c.T @ X + np.einsum("nlk,nk->kl", BW, s)
    grad = np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])
    loss = lam_pde * j_pde
    if boundary is not None:
        Xb = _as_batch(boundary[0], net.d_in)
        Tb = np.asarray(boundary[1], dtype=float).reshape(len(Xb), m)
        j_bc, g_bc = loss_and_grad_supervised(net, Xb, Tb, Wm)
        loss += lam_bc * j_bc
        grad = grad + lam_bc * g_bc
    return loss, grad


def pde_residual(net: Mlp, sys: PdeSystem, points) -> np.ndarray:
    return _pde_residual_parts(net, sys, _as_batch(points, net.d_in))[-1]


# -- deep baseline -----------------------------------------------------------

@dataclass
class DeepMlp:
    """Fully connected tanh network; ``len(weights)`` weight layers, linear output."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def d_in(self) -> int:
        return self.weights[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for w, b in zip(self.weights, self.biases) for a in (w, b)])

    def with_flat(self, theta: np.ndarray) -> "DeepMlp":
        Ws, bs, i = [], [], 0
        for w, b in zip(self.weights, self.biases):
            Ws.append(theta[i:i + w.size].reshape(w.shape).copy()); i += w.size
            bs.append(theta[i:i + b.size].copy()); i += b.size
        if i != len(theta):
            raise ValueError("parameter vector has the wrong length")
        return DeepMlp(Ws, bs)

    def _activations(self, X: np.ndarray) -> list[np.ndarray]:
        acts = [X]
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            acts.append(np.tanh(_mm(acts[-1], w.T) + b))
        return acts

    def __call__(self, X) -> np.ndarray:
        X = _as_batch(X, self.d_in)
        return _mm(self._activations(X)[-1], self.weights[-1].T) + self.biases[-1]

    def loss_and_grad(self, X: np.ndarray, T: np.ndarray) -> tuple[float, np.ndarray]:
        acts = self._activations(X)
        out = _mm(acts[-1], self.weights[-1].T) + self.biases[-1]
        r = out - T
        n = len(X)
        loss = float(np.sum(r * r) / n)
        G = (2.0 / n) * r
        grads: list[np.ndarray] = []
        for k in range(len(self.weights) - 1, -1, -1):
            grads.append(G.sum(axis=0))
            grads.append(_mm(G.T, acts[k]).ravel())
            if k > 0:
                G = _mm(G, self.weights[k]) * (1.0 - acts[k] ** 2)
        return loss, np.concatenate(grads[::-1])

    def output_bound(self) -> np.ndarray:
        return np.abs(self.biases[-1]) + np.abs(self.weights[-1]).sum(axis=1)


def init_deep(d_in: int, layers: int, width: int, d_out: int, rng: np.random.Generator) -> DeepMlp:
    if layers < 2:
        raise ValueError("a deep network needs at least two weight layers")
    dims = [d_in] + [width] * (layers - 1) + [d_out]
    Ws, bs = [], []
    for a, b in zip(dims[:-1], dims[1:]):
        lim = 1.0 / math.sqrt(a)
        Ws.append(rng.uniform(-lim, lim, (b, a)))
        bs.append(rng.uniform(-lim, lim, b))
    return DeepMlp(Ws, bs)


# -- training ------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    min_epochs: int = 10
    max_epochs: int = 50
    steps_per_epoch: int = 200
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if not 1 <= self.min_epochs <= self.max_epochs:
            raise ValueError("need 1 <= min_epochs <= max_epochs")
        if self.steps_per_epoch < 1:
            raise ValueError("steps_per_epoch must be positive")

    def to_dict(self) -> dict:
        return {"lr": self.lr, "min_epochs": self.min_epochs, "max_epochs": self.max_epochs,
                "steps_per_epoch": self.steps_per_epoch, "tol": self.tol, "seed": self.seed}


@dataclass
class TrainLog:
    history: list[float] = field(default_factory=list)
    steps: int = 0
    converged: bool = False
    monotone: bool = True

    def to_dict(self) -> dict:
        return {"history": self.history, "steps": self.steps, "converged": self.converged,
                "monotone": self.monotone}


def gradient_descent(theta: np.ndarray, loss_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
                     config: TrainConfig) -> tuple[np.ndarray, TrainLog]:
    """``theta <- theta - lr * grad`` until ``max|delta| < tol`` (after min epochs) or max epochs."""
    theta = np.array(theta, dtype=float)
    log = TrainLog()
    for epoch in range(config.max_epochs):
        for _ in range(config.steps_per_epoch):
            loss, g = loss_grad(theta)
            if not (math.isfinite(loss) and np.all(np.isfinite(g))):
                raise TrainingError(f"non-finite loss at step {log.steps}")
            step = config.lr * g
            theta -= step
            log.steps += 1
            if epoch + 1 >= config.min_epochs and np.max(np.abs(step)) < config.tol:
                log.converged = True
                break
        log.history.append(float(loss))
        if log.converged:
            break
    log.history.append(float(loss_grad(theta)[0]))
    log.monotone = all(b <= a for a, b in zip(log.history[:-1], log.history[1:]))
    return theta, log


def train_mlp(net: Mlp, X, T, config: TrainConfig, W=None) -> tuple[Mlp, TrainLog]:
    X = _as_batch(X, net.d_in)
    T = np.asarray(T, dtype=float).reshape(len(X), net.d_out)
    theta, log = gradient_descent(net.flat(), lambda th: loss_and_grad_supervised(net.with_flat(th), X, T, W),
                                  config)
    return net.with_flat(theta), log


def train_deep(net: DeepMlp, X, T, config: TrainConfig) -> tuple[DeepMlp, TrainLog]:
    X = _as_batch(X, net.d_in)
    T = np.asarray(T, dtype=float).reshape(len(X), net.d_out)
    theta, log = gradient_descent(net.flat(), lambda th: net.with_flat(th).loss_and_grad(X, T), config)
    return net.with_flat(theta), log


# -- normalization -------------------------------------------------------------

@dataclass(frozen=True)
class Normalization:
    """Affine map of each input axis from ``[lo, hi]`` onto ``[-1, 1]``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __call__(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return 2.0 * (P - lo) / (hi - lo) - 1.0

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class OutputScale:
    """Affine scale of the solution: ``u_s = (u - u_min) / (u_max - u_min)`` per component."""

    u_min: tuple[float, ...]
    u_max: tuple[float, ...]

    def span(self) -> np.ndarray:
        s = np.asarray(self.u_max) - np.asarray(self.u_min)
        return np.where(s > 0, s, 1.0)

    def forward(self, U) -> np.ndarray:
        return (np.asarray(U, dtype=float) - np.asarray(self.u_min)) / self.span()

    def backward(self, Us) -> np.ndarray:
        return np.asarray(Us, dtype=float) * self.span() + np.asarray(self.u_min)

    def to_dict(self) -> dict:
        return {"u_min": list(self.u_min), "u_max": list(self.u_max)}

    @classmethod
    def from_data(cls, U: np.ndarray) -> "OutputScale":
        """``U`` has shape ``(n, m)``."""
        return cls(tuple(float(v) for v in U.min(axis=0)), tuple(float(v) for v in U.max(axis=0)))


# -- composed networks -------------------------------------------------------

@dataclass
class BeaconsChain:
    """Head ``g`` (inputs -> 1), analytic ``f``, then smooth 1 -> 1 stages, for one component.

    Range containment is enforced at inference: each smooth stage sees its
    input clamped to the interval it was trained on, and the chain output is
    clamped to ``out_range`` (the scaled solution range).  The target lies in
    ``out_range``, so the output clamp never increases the pointwise error.
    """

    head: Mlp
    fmap: AnalyticMap
    smooth: list[Mlp]
    stage_errors: list[float] = field(default_factory=list)
    input_ranges: list[tuple[float, float]] = field(default_factory=list)
    out_range: tuple[float, float] = (0.0, 1.0)

    def stages(self, Xn: np.ndarray) -> list[np.ndarray]:
        """Outputs after every stage (head, map, smooth...), each shape ``(n,)``."""
        out = [self.head(Xn)[:, 0]]
        out.append(self.fmap(out[-1]))
        for k, h in enumerate(self.smooth):
            v = out[-1]
            if k < len(self.input_ranges):
                v = np.clip(v, *self.input_ranges[k])
            out.append(h(v[:, None])[:, 0])
        out[-1] = np.clip(out[-1], *self.out_range)
        return out

    def __call__(self, Xn: np.ndarray) -> np.ndarray:
        return self.stages(Xn)[-1]

    def output_bound(self) -> float:
        lo, hi = self.out_range
        if self.smooth:
            raw = float(self.smooth[-1].output_bound()[0])
        else:
            b = float(self.head.output_bound()[0])
            raw = float(max(abs(self.fmap(b)), abs(self.fmap(-b))))
        return min(raw, max(abs(lo), abs(hi)))


@dataclass
class BeaconsNet:
    chains: list[BeaconsChain]
    norm: Normalization
    scale: OutputScale

    kind = "beacons"

    def predict_scaled(self, P) -> np.ndarray:
        Xn = self.norm(P)
        return np.stack([c(Xn) for c in self.chains], axis=1)

    def __call__(self, P) -> np.ndarray:
        return self.scale.backward(self.predict_scaled(P))


@dataclass
class PlainNet:
    net: DeepMlp
    norm: Normalization
    scale: OutputScale

    kind = "plain"

    def predict_scaled(self, P) -> np.ndarray:
        return self.net(self.norm(P))

    def __call__(self, P) -> np.ndarray:
        return self.scale.backward(self.predict_scaled(P))


def infer(model, points) -> np.ndarray:
    """Evaluate a trained model at arbitrary ``(t, x[, y])`` points; shape ``(n, m)``."""
    return model(np.asarray(points, dtype=float))


def beacons_targets(fmap: AnalyticMap, us: np.ndarray) -> np.ndarray:
    """Head targets ``f^{-1}(u_s)``; raises when ``u_s`` leaves the map's image."""
    try:
        return fmap.inverse(us)
    except ValueError as exc:
        raise TrainingError(str(exc)) from None


def train_beacons(points: np.ndarray, U: np.ndarray, layers: int, width: int, fmaps: Sequence[AnalyticMap],
                  config: TrainConfig, norm: Normalization, scale: OutputScale | None = None) -> tuple[BeaconsNet, list]:
    """Layer-by-layer training; one chain per component of ``U`` (shape ``(n, m)``)."""
    scale = scale or OutputScale.from_data(U)
    Xn = norm(points)
    Us = scale.forward(U)
    rng = philox(config.seed)
    k = max(1, layers // 2)
    chains, logs = [], []
    for c in range(U.shape[1]):
        target = Us[:, c]
        fmap = fmaps[c]
        head = init_mlp(Xn.shape[1], width, 1, rng)
        head, log = train_mlp(head, Xn, beacons_targets(fmap, target), config)
        errs = [float(np.max(np.abs(head(Xn)[:, 0] - fmap.inverse(target))))]
        clog = [log]
        current = fmap(head(Xn)[:, 0])
        smooth: list[Mlp] = []
        ranges: list[tuple[float, float]] = []
        for _ in range(k - 1):
            ranges.append((float(np.min(current)), float(np.max(current))))
            h = init_mlp(1, width, 1, rng)
            h, log = train_mlp(h, current[:, None], target, config)
            # constituent of a smooth stage is the identity on its input
            errs.append(float(np.max(np.abs(h(current[:, None])[:, 0] - current))))
            current = h(current[:, None])[:, 0]
            smooth.append(h)
            clog.append(log)
        chains.append(BeaconsChain(head, fmap, smooth, errs, ranges))
        logs.append(clog)
    return BeaconsNet(chains, norm, scale), logs


def train_plain(points: np.ndarray, U: np.ndarray, layers: int, width: int, config: TrainConfig,
                norm: Normalization, scale: OutputScale | None = None) -> tuple[PlainNet, TrainLog]:
    scale = scale or OutputScale.from_data(U)
    Xn = norm(points)
    net = init_deep(Xn.shape[1], layers, width, U.shape[1], philox(config.seed))
    net, log = train_deep(net, Xn, scale.forward(U), config)
    return PlainNet(net, norm, scale), log


# -- checkpoints -------------------------------------------------------------

def _header(model) -> dict:
    head = {"kind": model.kind, "normalization": model.norm.to_dict(), "scale": model.scale.to_dict()}
    if model.kind == "plain":
        head["dims"] = [model.net.d_in] + [w.shape[0] for w in model.net.weights]
    else:
        head["chains"] = [{"head": [c.head.d_in, c.head.width], "map": c.fmap.to_dict(),
                           "smooth": [h.width for h in c.smooth], "stage_errors": c.stage_errors,
                           "input_ranges": [list(r) for r in c.input_ranges], "out_range": list(c.out_range)}
                          for c in model.chains]
    return head


def model_params(model) -> np.ndarray:
    if model.kind == "plain":
        return model.net.flat()
    parts = []
    for c in model.chains:
        parts.append(c.head.flat())
        parts.extend(h.flat() for h in c.smooth)
    return np.concatenate(parts)


def save_checkpoint(model, path: str | Path, seed: int = 0, extra: dict | None = None) -> None:
    header = _header(model)
    header["seed"] = seed
    if extra:
        header.update(extra)
    _io.write_json(path, {"header": header, "params": model_params(model)})


def load_checkpoint(path: str | Path):
    doc = _io.read_json(path)
    h = doc["header"]
    theta = np.array([_io.parse_float(v) for v in doc["params"]])
    norm = Normalization(tuple(h["normalization"]["lo"]), tuple(h["normalization"]["hi"]))
    scale = OutputScale(tuple(h["scale"]["u_min"]), tuple(h["scale"]["u_max"]))
    if h["kind"] == "plain":
        dims = h["dims"]
        shapes = DeepMlp([np.zeros((b, a)) for a, b in zip(dims[:-1], dims[1:])],
                         [np.zeros(b) for b in dims[1:]])
        return PlainNet(shapes.with_flat(theta), norm, scale)
    chains, i = [], 0
    for c in h["chains"]:
        d_in, N = c["head"]
        tmpl = Mlp(np.zeros((N, d_in)), np.zeros(N), np.zeros((1, N)), np.zeros(1))
        head = tmpl.with_flat(theta[i:i + tmpl.n_params]); i += tmpl.n_params
        smooth = []
        for w in c["smooth"]:
            t = Mlp(np.zeros((w, 1)), np.zeros(w), np.zeros((1, w)), np.zeros(1))
            smooth.append(t.with_flat(theta[i:i + t.n_params])); i += t.n_params
        chains.append(BeaconsChain(head, AnalyticMap.from_dict(c["map"]), smooth,
                                   [float(e) for e in c["stage_errors"]],
                                   [tuple(_io.parse_float(v) for v in r) for r in c["input_ranges"]],
                                   tuple(_io.parse_float(v) for v in c["out_range"])))
    if i != len(theta):
        raise ValueError("checkpoint parameter count mismatch")
    return BeaconsNet(chains, norm, scale)
