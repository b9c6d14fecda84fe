"""The six benchmark problems plus the periodic convergence problem."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..characteristics import DiskData, InitialData, Piecewise1D, QuadrantData, Stacked1D, constant, sine
from ..fv import GridSpec, SolverConfig
from ..neural import TrainConfig
from ..pde import PdeSystem, make_system

SCALES = ("full", "desk")


@dataclass(frozen=True)
class TrainingPlan:
    """Training knobs shared by every architecture of a run.

    ``lr_scale`` over the width gives the step size; ``max_points`` caps the
    number of training samples (strided subsample of the training frames).
    """

    lr_scale: float = 3.2
    min_epochs: int = 10
    max_epochs: int = 50
    steps_per_epoch: int = 160
    tol: float = 1e-10
    max_points: int = 1000

    def config(self, width: int, seed: int) -> TrainConfig:
        return TrainConfig(lr=self.lr_scale / width, min_epochs=self.min_epochs, max_epochs=self.max_epochs,
                           steps_per_epoch=self.steps_per_epoch, tol=self.tol, seed=seed)

    def to_dict(self) -> dict:
        return {"lr_scale": self.lr_scale, "min_epochs": self.min_epochs, "max_epochs": self.max_epochs,
                "steps_per_epoch": self.steps_per_epoch, "tol": self.tol, "max_points": self.max_points}


@dataclass(frozen=True)
class ProblemSpec:
    id: str
    system: str
    params: dict
    grid: GridSpec
    initial: InitialData
    solver: SolverConfig
    train_frames: int  # frames 0..train_frames are training data
    architectures: tuple[str, ...]
    reference: dict = field(default_factory=dict)
    conditional: bool = False
    training: TrainingPlan = TrainingPlan()

    def __post_init__(self):
        if not 0 < self.train_frames < self.solver.frame_count:
            raise ValueError("train cutoff must leave frames on both sides")

    @property
    def train_fraction(self) -> float:
        return self.train_frames / self.solver.frame_count

    @property
    def t_train(self) -> float:
        return self.solver.t_end * self.train_frames / self.solver.frame_count

    def make_system(self) -> PdeSystem:
        return make_system(self.system, **self.params)

    def scaled(self, cells: tuple[int, ...] | None = None, architectures: tuple[str, ...] | None = None,
               training: TrainingPlan | None = None) -> "ProblemSpec":
        g = self.grid
        grid = GridSpec(g.lower, g.upper, cells, g.ghost, g.boundary) if cells else g
        return replace(self, grid=grid, architectures=architectures or self.architectures,
                       training=training or self.training)

    def to_dict(self) -> dict:
        return {"id": self.id, "system": self.system, "params": dict(self.params), "grid": self.grid.to_dict(),
                "initial": _describe(self.initial), "solver": self.solver.to_dict(),
                "train_frames": self.train_frames, "train_fraction": self.train_fraction,
                "architectures": list(self.architectures), "reference": self.reference,
                "conditional": self.conditional, "training": self.training.to_dict()}


def _describe(u0) -> dict:
    if isinstance(u0, Piecewise1D):
        return {"kind": "piecewise1d", "domain": list(u0.domain), "breakpoints": list(u0.breakpoints),
                "pieces": [{"form": p.form, "params": list(p.params)} for p in u0.pieces],
                "closed_left": list(u0.closed_left)}
    if isinstance(u0, Stacked1D):
        return {"kind": "stacked1d", "components": [_describe(c) for c in u0.components]}
    if isinstance(u0, DiskData):
        return {"kind": "disk", "center": list(u0.center), "r2": u0.r2, "inside": list(u0.inside),
                "outside": list(u0.outside)}
    return {"kind": "quadrants", "corner": list(u0.corner), "states": [list(s) for s in u0.states]}


_ONE_D = ("beacons:6:64", "beacons:8:128", "plain:6:64", "plain:8:128")
_TWO_D = ("beacons:8:128", "plain:8:128")
_TABLE1 = {"beacons:6:64": 0.782192, "beacons:8:128": 0.633319, "plain:6:64": 1.076130, "plain:8:128": 1.002587}


def _advection1d() -> ProblemSpec:
    # u = 1 for x <= 0, 0 for x > 0
    u0 = Piecewise1D((-1.0, 1.0), (0.0,), (constant(1.0), constant(0.0)), (True,))
    return ProblemSpec(
        "advection1d", "advection1d", {"a": 1.0}, GridSpec((-1.0,), (1.0,), (1024,)), u0,
        SolverConfig("roe", "none", 1.0, 1.0, 100), 33, _ONE_D,
        {"bounds": {"beacons:6:64": 0.903602, "beacons:8:128": 0.707106},
         "observed_l_inf_all": _TABLE1, "proof_steps": 99})


def _advection2d() -> ProblemSpec:
    u0 = DiskData(((-1.0, 1.0), (-1.0, 1.0)), (-0.5, -0.5), 0.33, (1.0,), (0.0,))
    return ProblemSpec(
        "advection2d", "advection2d", {"a": 1.0}, GridSpec((-1.0, -1.0), (1.0, 1.0), (256, 256)), u0,
        SolverConfig("roe", "none", 1.0, 1.0, 100), 33, _TWO_D,
        {"bounds": {"beacons:6:64": (1.216729, 1.483672), "beacons:8:128": (1.0, 1.259921)},
         "observed_l_inf_all": {"beacons:8:128": 0.938123}, "proof_steps": 187})


def _burgers1d() -> ProblemSpec:
    # 3 on [2, 4] (both ends closed), -1 elsewhere
    u0 = Piecewise1D((0.0, 6.0), (2.0, 4.0), (constant(-1.0), constant(3.0), constant(-1.0)), (False, True))
    return ProblemSpec(
        "burgers1d", "burgers1d", {}, GridSpec((0.0,), (6.0,), (1024,)), u0,
        SolverConfig("roe", "none", 1.0, 1.0, 100), 33, _ONE_D,
        {"bounds": {"beacons:6:64": (1.216728, 1.483672), "beacons:8:128": (1.0, 1.259921)}, "proof_steps": 163})


def _burgers2d() -> ProblemSpec:
    u0 = DiskData(((-1.0, 1.0), (-1.0, 1.0)), (-0.5, -0.5), 0.33, (1.0,), (0.0,))
    return ProblemSpec(
        "burgers2d", "burgers2d", {}, GridSpec((-1.0, -1.0), (1.0, 1.0), (256, 256)), u0,
        SolverConfig("roe", "none", 1.0, 1.0, 100), 33, _TWO_D,
        {"bounds": {"beacons:6:64": (1.483672, None), "beacons:8:128": (1.259921, None)},
         "observed_l_inf_all": {"beacons:8:128": 0.595719}, "proof_steps": (315, 221)})


def _euler1d() -> ProblemSpec:
    left, right = (1.0, 0.0, 2.5), (0.125, 0.0, 0.25)
    u0 = Stacked1D(tuple(Piecewise1D((0.0, 1.0), (0.5,), (constant(a), constant(b)), (True,))
                         for a, b in zip(left, right)))
    return ProblemSpec(
        "euler1d", "euler1d", {"gamma": 1.4}, GridSpec((0.0,), (1.0,), (2048,)), u0,
        SolverConfig("roe", "minmod", 0.95, 0.2, 200), 66, _ONE_D,
        {"bounds": {"beacons:6:64": 0.903602, "beacons:8:128": 0.707106}, "proof_steps": 98532},
        conditional=True)


def _euler2d() -> ProblemSpec:
    states = ((1.5, 0.0, 0.0, 3.75), (0.5323, 0.641954, 0.0, 1.1371),
              (0.5323, 0.0, 0.641954, 1.1371), (0.138, 0.166428, 0.166428, 0.273212))
    u0 = QuadrantData(((0.0, 1.0), (0.0, 1.0)), (0.8, 0.8), states)
    return ProblemSpec(
        "euler2d", "euler2d", {"gamma": 1.4}, GridSpec((0.0, 0.0), (1.0, 1.0), (256, 256)), u0,
        SolverConfig("roe", "minmod", 0.95, 0.8, 100), 33, _TWO_D,
        {"bounds": {"beacons:6:64": (1.216729, 1.483672), "beacons:8:128": (1.0, 1.259921)},
         "observed_l_inf_all": {"beacons:8:128": 0.310002}, "proof_steps": 142104},
        conditional=True)


def _sine_advection() -> ProblemSpec:
    u0 = Piecewise1D((0.0, 1.0), (), (sine([(1.0, 2 * math.pi, 0.0)], 0.0),))
    return ProblemSpec(
        "sine_advection", "advection1d", {"a": 1.0},
        GridSpec((0.0,), (1.0,), (256,), boundary=("periodic",)), u0,
        SolverConfig("roe", "minmod", 0.8, 1.0, 10), 3, ("beacons:4:32", "plain:4:32"))


_BUILDERS = {"advection1d": _advection1d, "advection2d": _advection2d, "burgers1d": _burgers1d,
             "burgers2d": _burgers2d, "euler1d": _euler1d, "euler2d": _euler2d,
             "sine_advection": _sine_advection}
BENCHMARKS = ("advection1d", "advection2d", "burgers1d", "burgers2d", "euler1d", "euler2d")

# desk presets: 1D at half resolution, 2D at a quarter, nets at half width
DESK_CELLS = {"advection1d": (512,), "burgers1d": (512,), "euler1d": (1024,), "advection2d": (64, 64),
              "burgers2d": (64, 64), "euler2d": (64, 64), "sine_advection": (128,)}
DESK_ARCHS = {1: ("beacons:4:32", "beacons:6:64", "plain:4:32", "plain:6:64"),
              2: ("beacons:4:32", "plain:4:32")}


def registry() -> list[ProblemSpec]:
    return [_BUILDERS[k]() for k in _BUILDERS]


def get_problem(pid: str, scale: str = "full") -> ProblemSpec:
    if pid not in _BUILDERS:
        raise KeyError(f"unknown problem {pid!r}; known: {', '.join(_BUILDERS)}")
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}")
    spec = _BUILDERS[pid]()
    if scale == "desk":
        spec = spec.scaled(DESK_CELLS[pid], DESK_ARCHS[spec.grid.dim])
    return spec
