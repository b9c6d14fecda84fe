"""``hypcert`` command line: solve, train, certify, prove, metrics, run, check, list."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import _io
from ..certifier import ArchitectureSpec
from ..fv import read_frames, write_frames, run_simulation
from ..neural import load_checkpoint, save_checkpoint
from ..prover import MalformedCertificate, check_certificate, prove_solver_properties
from .experiment import (bound_certificate, choose_maps, input_normalization, predict_series, run_experiment,
                         training_set, _slug)
from .metrics import compute_metrics
from .registry import TrainingPlan, get_problem, registry
from .tables import emit_tables


def _spec(args):
    """The registry entry, resized to match an existing run directory's manifest."""
    spec = get_problem(args.problem, args.scale)
    manifest = Path(args.out) / "manifest.json"
    if manifest.exists():
        prob = _io.read_json(manifest)["problem"]
        if prob["id"] == spec.id:
            t = prob["training"]
            spec = spec.scaled(tuple(prob["grid"]["cells"]), tuple(prob["architectures"]), TrainingPlan(**t))
    if args.arch:
        spec = spec.scaled(architectures=tuple(args.arch))
    return spec


def _frames(spec, out: Path):
    """Reference frames from ``out/frames`` when present, otherwise solved and stored."""
    system = spec.make_system()
    if (out / "frames" / "manifest.json").exists():
        series = read_frames(out / "frames")
        if series.grid == spec.grid and len(series) == spec.solver.frame_count + 1:
            return system, series
    series = run_simulation(system, spec.grid, spec.initial, spec.solver)
    write_frames(series, system, out / "frames")
    return system, series


def _models(spec, out: Path, series, seed: int, train_missing: bool = True) -> dict:
    from .experiment import train_architecture
    from ..neural import OutputScale

    models = {}
    maps = None
    for a in spec.architectures:
        path = out / "checkpoints" / f"{_slug(a)}.json"
        if path.exists():
            models[a] = load_checkpoint(path)
            continue
        if not train_missing:
            raise FileNotFoundError(f"no checkpoint for {a} in {out}")
        arch = ArchitectureSpec.parse(a)
        P, U = training_set(spec, series)
        if arch.kind == "beacons" and maps is None:
            maps, _ = choose_maps(input_normalization(spec)(P), OutputScale.from_data(U).forward(U), seed)
        model = train_architecture(spec, arch, P, U, seed, maps)
        save_checkpoint(model, path, seed, {"architecture": arch.to_dict(), "problem": spec.id})
        models[a] = model
    return models


def cmd_list(args) -> int:
    rows = [{"id": p.id, "system": p.system, "cells": list(p.grid.cells), "t_end": p.solver.t_end,
             "frames": p.solver.frame_count, "train_frames": p.train_frames,
             "architectures": list(p.architectures), "conditional": p.conditional} for p in registry()]
    if args.format == "json":
        print(json.dumps(rows, indent=1))
    else:
        print("id,system,cells,t_end,frames,train_frames,conditional")
        for r in rows:
            print(f"{r['id']},{r['system']},{'x'.join(map(str, r['cells']))},{r['t_end']},{r['frames']},"
                  f"{r['train_frames']},{str(r['conditional']).lower()}")
    return 0


def cmd_solve(args) -> int:
    spec = _spec(args)
    out = Path(args.out)
    system = spec.make_system()
    series = run_simulation(system, spec.grid, spec.initial, spec.solver)
    write_frames(series, system, out / "frames")
    print(f"wrote {len(series)} frames to {out / 'frames'}")
    return 0


def cmd_train(args) -> int:
    spec = _spec(args)
    out = Path(args.out)
    _, series = _frames(spec, out)
    models = _models(spec, out, series, args.seed)
    for a in models:
        print(f"trained {a} -> {out / 'checkpoints' / (_slug(a) + '.json')}")
    return 0


def cmd_certify(args) -> int:
    from ..characteristics import classify_system

    spec = _spec(args)
    out = Path(args.out)
    system, series = _frames(spec, out)
    report = classify_system(system, spec.initial, series)
    models = _models(spec, out, series, args.seed)
    (out / "certificates").mkdir(parents=True, exist_ok=True)
    status = 0
    for a, model in models.items():
        cert = bound_certificate(spec, ArchitectureSpec.parse(a), report, model)
        path = out / "certificates" / f"bound_{_slug(a)}.json"
        _io.write_json(path, cert)
        ok = check_certificate(cert).accepted
        status |= not ok
        print(f"{a}: bound_smooth={_io.fmt17(cert['bound_smooth'])} bound_nonsmooth="
              f"{json.dumps(cert['bound_nonsmooth']) if isinstance(cert['bound_nonsmooth'], dict) else _io.fmt17(cert['bound_nonsmooth'])}"
              f" check={'ok' if ok else 'REJECTED'}")
    return status


def cmd_prove(args) -> int:
    spec = _spec(args)
    out = Path(args.out)
    (out / "certificates").mkdir(parents=True, exist_ok=True)
    status = 0
    for name, cert in prove_solver_properties(spec.make_system(), spec.solver).items():
        d = cert.to_dict()
        safe = name.replace("[", "_").replace("]", "").replace(",", "_")
        _io.write_json(out / "certificates" / f"proof_{safe}.json", d)
        ok = cert.proved and check_certificate(d).accepted
        status |= not ok
        print(f"{name}: {cert.status} ({cert.step_count} steps) check={'ok' if ok else 'REJECTED'}")
    return status


def cmd_metrics(args) -> int:
    """Recompute the tables from archived frames and checkpoints."""
    spec = _spec(args)
    out = Path(args.out)
    system, series = _frames(spec, out)
    models = _models(spec, out, series, args.seed, train_missing=False)
    rows = [compute_metrics(series, predict_series(m, series), spec.train_frames, a, 0,
                            list(system.component_names)) for a, m in models.items()]
    for name, text in emit_tables(rows, args.format).items():
        print(f"# {name}")
        sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    b = run_experiment(args.problem, args.out, args.seed, args.scale, args.arch or None, prove=not args.no_prove)
    for name, text in emit_tables(b.metrics, args.format).items():
        print(f"# {name}")
        sys.stdout.write(text)
    for a, c in b.bound_checks.items():
        print(f"# bound {a}: observed={_io.fmt17(c['observed'])} bound={c['bound']} holds={c['holds']}")
    for f in b.failures:
        print(f"FAILED {f}", file=sys.stderr)
    return 0 if b.ok else 1


def _certificate_files(paths) -> list[Path]:
    files = []
    for p in map(Path, paths):
        files.extend(sorted(p.rglob("*.json")) if p.is_dir() else [p])
    return [f for f in files if f.name not in ("manifest.json",)]


def cmd_check(args) -> int:
    status = 0
    files = _certificate_files(args.paths)
    if not files:
        print("no certificates found", file=sys.stderr)
        return 1
    for f in files:
        try:
            doc = _io.read_json(f)
            if not isinstance(doc, dict) or doc.get("type") not in ("proof", "bound"):
                continue
            res = check_certificate(doc)
        except (MalformedCertificate, ValueError) as exc:
            print(f"{f}: MALFORMED {exc}")
            status = 1
            continue
        if res.accepted:
            print(f"{f}: accepted")
        else:
            status = 1
            where = "" if res.failing_step is None else f" at step {res.failing_step}"
            print(f"{f}: REJECTED{where}: {'; '.join(map(str, res.reasons))}")
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypcert", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--problem", required=True)
        sp.add_argument("--arch", action="append", default=[], type=_arch,
                        help="kind:layers:width, repeatable (default: the problem's list)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--scale", choices=("full", "desk"), default="desk")
        sp.add_argument("--out", required=out_required, default="runs")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("list", help="show the problem registry")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(fn=cmd_list)
    for name, fn, help_ in (("solve", cmd_solve, "run the reference solver and store frames"),
                            ("train", cmd_train, "train the architectures on the training frames"),
                            ("certify", cmd_certify, "issue bound certificates"),
                            ("prove", cmd_prove, "issue solver-property proof certificates"),
                            ("metrics", cmd_metrics, "recompute tables from frames and checkpoints"),
                            ("run", cmd_run, "full pipeline")):
        sp = sub.add_parser(name, help=help_)
        common(sp, out_required=name != "prove")
        sp.set_defaults(fn=fn)
        if name == "run":
            sp.add_argument("--no-prove", action="store_true", help="skip solver-property proofs")
    sp = sub.add_parser("check", help="replay certificates (files or directories)")
    sp.add_argument("paths", nargs="+")
    sp.set_defaults(fn=cmd_check)
    return p


def _arch(text: str) -> str:
    try:
        return ArchitectureSpec.parse(text).id
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
