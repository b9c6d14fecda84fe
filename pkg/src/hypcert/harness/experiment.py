"""End-to-end pipeline: solve, split, train, infer, measure, classify, certify."""

from __future__ import annotations

import math
import platform
import sys as _sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import _io
from ..certifier import ArchitectureSpec, applicable_bound, candidate_search, certify
from ..characteristics import SmoothnessReport, classify_system
from ..fv import FrameSeries, run_simulation, write_frames
from ..maps import AnalyticMap
from ..neural import (Normalization, OutputScale, infer, philox, save_checkpoint, train_beacons,
                      train_plain)
from ..prover import check_certificate, prove_solver_properties
from .metrics import MetricsRow, compute_metrics, scaled_sup_error
from .registry import ProblemSpec, TrainingPlan, get_problem
from .tables import write_tables

PROBE_POINTS = 1000


@dataclass
class Bundle:
    spec: ProblemSpec
    reference: FrameSeries
    models: dict = field(default_factory=dict)
    predictions: dict = field(default_factory=dict)
    metrics: list[MetricsRow] = field(default_factory=list)
    report: SmoothnessReport | None = None
    bounds: dict = field(default_factory=dict)  # arch id -> bound certificate
    proofs: dict = field(default_factory=dict)  # property -> proof certificate dict
    bound_checks: dict = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


# -- data preparation --------------------------------------------------------

def space_time_points(series: FrameSeries, frames: range | slice | None = None) -> np.ndarray:
    """``(t, x[, y])`` rows for every cell of the selected frames, frame-major."""
    idx = range(len(series)) if frames is None else range(len(series))[frames] if isinstance(frames, slice) \
        else frames
    mesh = [m.ravel() for m in series.grid.mesh()]
    n = mesh[0].size
    rows = [np.column_stack([np.full(n, series.times[k]), *mesh]) for k in idx]
    return np.concatenate(rows)


def frame_values(series: FrameSeries, frames: range) -> np.ndarray:
    """Conserved values matching ``space_time_points``; shape ``(n, m)``."""
    return np.concatenate([series.frames[k].reshape(series.frames.shape[1], -1).T for k in frames])


def training_set(spec: ProblemSpec, series: FrameSeries) -> tuple[np.ndarray, np.ndarray]:
    frames = range(spec.train_frames + 1)
    P = space_time_points(series, frames)
    U = frame_values(series, frames)
    stride = max(1, math.ceil(len(P) / spec.training.max_points))
    return P[::stride], U[::stride]


def input_normalization(spec: ProblemSpec) -> Normalization:
    g = spec.grid
    return Normalization((0.0, *g.lower), (spec.solver.t_end, *g.upper))


def predict_series(model, series: FrameSeries) -> FrameSeries:
    P = space_time_points(series)
    V = infer(model, P)
    K, m = series.frames.shape[:2]
    frames = V.reshape(K, -1, m).transpose(0, 2, 1).reshape(series.frames.shape)
    return FrameSeries(series.times, frames, series.grid, {"model": model.kind})


# -- stages --------------------------------------------------------------------

def choose_maps(Xn: np.ndarray, Us: np.ndarray, seed: int) -> tuple[list[AnalyticMap], list[dict]]:
    stride = max(1, math.ceil(len(Xn) / PROBE_POINTS))
    maps, reports = [], []
    for c in range(Us.shape[1]):
        fmap, rep = candidate_search((0.0, 1.0), samples=(Xn[::stride], Us[::stride, c]), seed=seed)
        maps.append(fmap)
        reports.append(rep)
    return maps, reports


def train_architecture(spec: ProblemSpec, arch: ArchitectureSpec, P: np.ndarray, U: np.ndarray, seed: int,
                       maps: list[AnalyticMap] | None = None):
    norm = input_normalization(spec)
    scale = OutputScale.from_data(U)
    cfg = spec.training.config(arch.width, seed)
    if arch.kind == "beacons":
        model, _ = train_beacons(P, U, arch.layers, arch.width, maps, cfg, norm, scale)
    else:
        model, _ = train_plain(P, U, arch.layers, arch.width, cfg, norm, scale)
    return model


def bound_certificate(spec: ProblemSpec, arch: ArchitectureSpec, report: SmoothnessReport, model,
                      search: dict | None = None, headline: int = 0) -> dict:
    scale = {"component": headline, "u_min": model.scale.u_min[headline], "u_max": model.scale.u_max[headline]}
    fmap = model.chains[headline].fmap if arch.kind == "beacons" else None
    return certify(spec.id, arch, report, spec.grid.dim + 1, fmap, scale=scale, conditional=spec.conditional,
                   search=search)


def _versions() -> dict:
    return {"python": platform.python_version(), "numpy": np.__version__, "platform": _sys.platform}


# -- driver ------------------------------------------------------------------

def run_experiment(problem: str | ProblemSpec, out: str | Path | None = None, seed: int = 0,
                   scale: str = "desk", architectures: list[str] | None = None,
                   cells: tuple[int, ...] | None = None, training: TrainingPlan | None = None,
                   prove: bool = True) -> Bundle:
    """Run the whole pipeline; with ``out`` every artifact is written below that directory.

    Stage failures are collected in ``bundle.failures`` (and the manifest)
    rather than raised, so partial artifacts survive.
    """
    spec = problem if isinstance(problem, ProblemSpec) else get_problem(problem, scale)
    if cells or architectures or training:
        spec = spec.scaled(tuple(cells) if cells else None, tuple(architectures) if architectures else None,
                           training)
    out = Path(out) if out is not None else None
    system = spec.make_system()
    series = run_simulation(system, spec.grid, spec.initial, spec.solver)
    bundle = Bundle(spec, series)
    if out is not None:
        write_frames(series, system, out / "frames")

    P, U = training_set(spec, series)
    norm = input_normalization(spec)
    Xn, Us = norm(P), OutputScale.from_data(U).forward(U)
    archs = [ArchitectureSpec.parse(a) for a in spec.architectures]
    maps, searches = (choose_maps(Xn, Us, seed) if any(a.kind == "beacons" for a in archs) else (None, None))

    bundle.report = classify_system(system, spec.initial, series)
    names = list(system.component_names)
    for arch in archs:
        try:
            model = train_architecture(spec, arch, P, U, seed, maps)
        except Exception as exc:  # recorded, the other architectures still run
            bundle.failures.append(f"train {arch.id}: {exc}")
            continue
        bundle.models[arch.id] = model
        pred = predict_series(model, series)
        bundle.predictions[arch.id] = pred
        bundle.metrics.append(compute_metrics(series, pred, spec.train_frames, arch.id, 0, names))
        cert = bound_certificate(spec, arch, bundle.report, model, searches[0] if searches else None)
        bundle.bounds[arch.id] = cert
        if arch.kind == "beacons":
            observed = scaled_sup_error(series, pred, model.scale.u_min[0], model.scale.u_max[0])
            bound = applicable_bound(cert)
            bundle.bound_checks[arch.id] = {"observed": observed, "bound": bound,
                                            "holds": bound is None or observed <= bound}
        if out is not None:
            save_checkpoint(model, out / "checkpoints" / f"{_slug(arch.id)}.json", seed,
                            {"architecture": arch.to_dict(), "problem": spec.id})

    if prove:
        for name, c in prove_solver_properties(system, spec.solver).items():
            bundle.proofs[name] = c.to_dict()
            if not c.proved:
                bundle.failures.append(f"prove {name}: {c.detail}")

    for name, cert in [*bundle.bounds.items(), *bundle.proofs.items()]:
        res = check_certificate(cert)
        if not res.accepted:
            bundle.failures.append(f"check {name}: {'; '.join(map(str, res.reasons))}")

    bundle.manifest = {
        "problem": spec.to_dict(),
        "seed": seed,
        "scale": scale,
        "versions": _versions(),
        "smoothness": bundle.report.to_dict(),
        "maps": [m.to_dict() for m in maps] if maps else [],
        "bound_checks": bundle.bound_checks,
        "certificates": {"bound": sorted(bundle.bounds), "proof": sorted(bundle.proofs)},
        "failures": list(bundle.failures),
    }
    if out is not None:
        _write_bundle(bundle, out)
    return bundle


def _slug(arch_id: str) -> str:
    return arch_id.replace(":", "_")


def _write_bundle(b: Bundle, out: Path) -> None:
    (out / "certificates").mkdir(parents=True, exist_ok=True)
    for arch_id, cert in b.bounds.items():
        _io.write_json(out / "certificates" / f"bound_{_slug(arch_id)}.json", cert)
    for name, cert in b.proofs.items():
        safe = name.replace("[", "_").replace("]", "").replace(",", "_")
        _io.write_json(out / "certificates" / f"proof_{safe}.json", cert)
    write_tables(b.metrics, out, "csv")
    write_tables(b.metrics, out, "json")
    _io.write_json(out / "manifest.json", b.manifest)
