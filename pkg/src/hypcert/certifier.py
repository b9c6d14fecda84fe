"""Worst-case L-infinity bound certificates for composed shallow networks.

A certificate is a list of arithmetic steps.  Every leaf input of a step is
tied to a field of the recorded chain, architecture or smoothness report and
every other input names the step that produced it, so ``check_bound_certificate``
can replay the whole derivation without trusting anything but the rule table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .characteristics import SmoothnessReport
from .maps import FORMS, AnalyticMap

VERSION = 1
MHASKAR_CONSTANT = 1.0
NO_BOUND_REASON = "discontinuity set is asymptotically empty"
C_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
PROBE_WIDTH = 16
PROBE_STEPS = 200
PROBE_LR = 0.2


class CertificateRefused(ValueError):
    """A certificate could not be issued; ``reason`` is machine readable."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass(frozen=True)
class ArchitectureSpec:
    kind: str
    layers: int
    width: int

    def __post_init__(self):
        if self.kind not in ("plain", "beacons"):
            raise ValueError(f"unknown architecture kind {self.kind!r}")
        if self.layers < 2 or self.width < 1:
            raise ValueError("need layers >= 2 and width >= 1")

    @property
    def id(self) -> str:
        return f"{self.kind}:{self.layers}:{self.width}"

    @property
    def learned_stages(self) -> int:
        return max(1, self.layers // 2)

    @classmethod
    def parse(cls, text: str) -> "ArchitectureSpec":
        try:
            kind, layers, width = text.split(":")
            return cls(kind, int(layers), int(width))
        except ValueError as exc:
            raise ValueError(f"bad architecture {text!r} (want kind:layers:width): {exc}") from None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "layers": self.layers, "width": self.width}


# -- rate arithmetic -------------------------------------------------------------

def shallow_rate(N: int, n: float, d: int) -> float:
    if N < 1 or d < 1 or n < 0:
        raise ValueError("need N >= 1, d >= 1, n >= 0")
    return MHASKAR_CONSTANT * float(N) ** (-float(n) / float(d))


def compose_bound(e_f: float, L: float, e_g: float) -> float:
    for v in (e_f, L, e_g):
        if not (v >= 0 and math.isfinite(v)):
            raise ValueError("compose_bound inputs must be finite and non-negative")
    return e_f + L * e_g


def _rule_mhaskar(N, n, d, scale):
    return scale * shallow_rate(N, n, d)


def _rule_lipschitz_product(*Ls):
    out = 1.0
    for L in Ls:
        out = out * L
    return out


RULES = {
    "mhaskar_rate": _rule_mhaskar,
    "composition": compose_bound,
    "lipschitz_product": _rule_lipschitz_product,
    "max_split": lambda *vals: max(vals),
}


# -- chains ----------------------------------------------------------------------

@dataclass(frozen=True)
class LearnedStage:
    N: int
    n: float
    d: int
    scale: float = 1.0
    head: bool = False
    lipschitz: float = 1.0  # of the constituent function this stage approximates

    @property
    def rate(self) -> float:
        return _rule_mhaskar(self.N, self.n, self.d, self.scale)

    def to_dict(self) -> dict:
        return {"kind": "learned", "N": self.N, "n": self.n, "d": self.d, "rate": self.rate,
                "scale": self.scale, "head": self.head, "L": self.lipschitz}


@dataclass(frozen=True)
class AnalyticStage:
    fmap: AnalyticMap

    @property
    def lipschitz(self) -> float:
        return self.fmap.lipschitz

    def to_dict(self) -> dict:
        return {"kind": "analytic", "form": self.fmap.form, "C": self.fmap.C, "L": self.lipschitz}


Stage = LearnedStage | AnalyticStage


def stage_from_dict(d: dict) -> Stage:
    if d["kind"] == "analytic":
        return AnalyticStage(AnalyticMap(d["form"], float(d["C"])))
    if d["kind"] == "learned":
        return LearnedStage(int(d["N"]), float(d["n"]), int(d["d"]), float(d["scale"]), bool(d["head"]),
                            float(d["L"]))
    raise ValueError(f"unknown stage kind {d['kind']!r}")


@dataclass
class CompositionChain:
    """Stages in application order: the head stage first."""

    stages: list[Stage]
    u_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        heads = [s for s in self.stages if isinstance(s, LearnedStage) and s.head]
        if len(heads) != 1 or self.stages[0] is not heads[0]:
            raise CertificateRefused("chain_shape", "exactly one head stage, placed first")
        # the map nearest the output must be able to produce the solution range
        for s in self.stages:
            if isinstance(s, AnalyticStage) and not s.fmap.admits(*self.u_range):
                raise CertificateRefused("range_containment",
                                         f"{s.fmap.form}/C={s.fmap.C} cannot reach {self.u_range}")

    def to_dict(self) -> list:
        return [s.to_dict() for s in self.stages]


class _Derivation:
    def __init__(self):
        self.steps: list[dict] = []

    def add(self, rule: str, inputs: Sequence, refs: Sequence, origin: Sequence) -> int:
        """``refs[k]`` is the producing step index, ``origin[k]`` the leaf field name (or None)."""
        inputs = [float(v) for v in inputs]
        self.steps.append({"rule": rule, "inputs": inputs, "from": list(refs), "origin": list(origin),
                           "output": RULES[rule](*inputs)})
        return len(self.steps) - 1

    def out(self, i: int) -> float:
        return self.steps[i]["output"]


def _fold(der: _Derivation, stages: Sequence[Stage], head_n: float, rate_steps: dict[int, int]) -> int:
    """Outermost-first fold of ``acc <- acc + (prod of later L) * rate``; returns the final step."""
    acc = None
    for i in range(len(stages) - 1, -1, -1):
        s = stages[i]
        if not isinstance(s, LearnedStage):
            continue
        later = [(j, t) for j, t in enumerate(stages) if j > i]
        lp = der.add("lipschitz_product", [t.lipschitz for _, t in later], [None] * len(later),
                     [f"chain[{j}].L" for j, _ in later])
        if i == 0:
            r = der.add("mhaskar_rate", [s.N, head_n, s.d, s.scale], [None] * 4,
                        ["chain[0].N", "head_n", "chain[0].d", "chain[0].scale"])
        else:
            r = rate_steps[i]
        if acc is None:
            acc = der.add("composition", [0.0, der.out(lp), der.out(r)], [None, lp, r], ["zero", None, None])
        else:
            acc = der.add("composition", [der.out(acc), der.out(lp), der.out(r)], [acc, lp, r],
                          [None, None, None])
    return acc


def chain_bound(chain: CompositionChain, n_smooth: float, nonsmooth: bool = True,
                n_nonsmooth: float = 0.0) -> tuple[float, float | None, list[dict], dict]:
    """``(bound_smooth, bound_nonsmooth or None, derivation, result step indices)``."""
    der = _Derivation()
    rate_steps = {}
    for i, s in enumerate(chain.stages):
        if isinstance(s, LearnedStage) and i > 0:
            rate_steps[i] = der.add("mhaskar_rate", [s.N, s.n, s.d, s.scale], [None] * 4,
                                    [f"chain[{i}].{k}" for k in ("N", "n", "d", "scale")])
    smooth = _fold(der, chain.stages, n_smooth, rate_steps)
    result = {"bound_smooth": smooth}
    # head-only leaf inputs are tagged with which n they used
    _tag_head(der, smooth, "n_smooth")
    rough = None
    if nonsmooth:
        rough = _fold(der, chain.stages, n_nonsmooth, rate_steps)
        _tag_head(der, rough, "n_nonsmooth")
        result["bound_nonsmooth"] = rough
        result["bound_worst"] = der.add("max_split", [der.out(smooth), der.out(rough)], [smooth, rough],
                                        [None, None])
    return der.out(smooth), (der.out(rough) if rough is not None else None), der.steps, result


def _tag_head(der: _Derivation, final: int, name: str) -> None:
    seen = {final}
    stack = [final]
    while stack:
        st = der.steps[stack.pop()]
        for k, ref in enumerate(st["from"]):
            if ref is not None and ref not in seen:
                seen.add(ref)
                stack.append(ref)
        if st["rule"] == "mhaskar_rate" and st["origin"][1] == "head_n":
            st["origin"][1] = name


# -- candidate search ------------------------------------------------------------

@dataclass
class CandidateResult:
    fmap: AnalyticMap
    estimate: float  # L * measured probe error
    probe_error: float
    admissible: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {"form": self.fmap.form, "C": self.fmap.C, "L": self.fmap.lipschitz, "estimate": self.estimate,
                "probe_error": self.probe_error, "admissible": self.admissible, "note": self.note}


def _probe_error(Xn: np.ndarray, targets: np.ndarray, seed: int) -> float:
    from .neural import TrainConfig, gradient_descent, init_mlp, loss_and_grad_supervised, philox

    net = init_mlp(Xn.shape[1], PROBE_WIDTH, 1, philox(seed))
    T = targets[:, None]
    cfg = TrainConfig(lr=PROBE_LR, min_epochs=1, max_epochs=1, steps_per_epoch=PROBE_STEPS, tol=0.0)
    theta, _ = gradient_descent(net.flat(), lambda th: loss_and_grad_supervised(net.with_flat(th), Xn, T), cfg)
    return float(np.max(np.abs(net.with_flat(theta)(Xn)[:, 0] - targets)))


def candidate_search(u_range: tuple[float, float], head_rate: float = 1.0, budget: int | None = None,
                     samples: tuple[np.ndarray, np.ndarray] | None = None, seed: int = 0,
                     c_grid: Sequence[float] = C_GRID) -> tuple[AnalyticMap, dict]:
    """Pick the analytic map minimizing ``L * e_g`` over the catalog and a C grid.

    ``samples`` is ``(normalized inputs, scaled solution values)``; each admissible
    candidate gets a short seeded probe fit of ``f^{-1}(u)``.  Identity maps share
    one probe, rescaled exactly, because their estimate cannot depend on C.
    """
    lo, hi = float(u_range[0]), float(u_range[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
        raise ValueError("u_range must be a finite non-empty interval")
    if budget is not None and budget < 1:
        raise ValueError("budget must allow at least one candidate")
    report: dict = {"head_rate": head_rate, "candidates": [], "warnings": []}
    if hi - lo == 0.0:
        report["warnings"].append("degenerate range: identity stage")
        return AnalyticMap("identity", 1.0), report
    results: list[CandidateResult] = []
    identity_base = None
    trials = 0
    for form in FORMS:
        for C in c_grid:
            fmap = AnalyticMap(form, C)
            if not fmap.admits(lo, hi):
                results.append(CandidateResult(fmap, math.inf, math.inf, False, "range not contained"))
                continue
            if budget is not None and trials >= budget:
                continue
            if samples is None:
                # no data: fall back to the theoretical head contribution
                sup_g = float(np.max(np.abs(fmap.inverse(np.array([lo, hi])))))
                err = head_rate * sup_g
                note = ""
            elif form == "identity":
                if identity_base is None:
                    identity_base = _probe_error(samples[0], samples[1], seed)
                    trials += 1
                err = C * identity_base
                note = "no actual advantage"
            else:
                err = _probe_error(samples[0], fmap.inverse(samples[1]), seed)
                trials += 1
                note = ""
            results.append(CandidateResult(fmap, fmap.lipschitz * err, err, True, note))
    report["candidates"] = [r.to_dict() for r in results]
    ok = [r for r in results if r.admissible and math.isfinite(r.estimate)]
    if not ok:
        report["warnings"].append("no admissible candidate: identity fallback")
        return AnalyticMap("identity", 1.0), report
    # ties resolved by catalog order, then by the smaller C
    best = min(ok, key=lambda r: r.estimate)
    report["chosen"] = best.to_dict()
    return best.fmap, report


# -- certificates ----------------------------------------------------------------

def beacons_chain(arch: ArchitectureSpec, d: int, fmap: AnalyticMap, head_scale: float,
                  u_range: tuple[float, float] = (0.0, 1.0), smooth_n: float = 8,
                  smooth_scale: float = 1.0) -> CompositionChain:
    stages: list[Stage] = [LearnedStage(arch.width, 0, d, head_scale, head=True), AnalyticStage(fmap)]
    for _ in range(arch.learned_stages - 1):
        stages.append(LearnedStage(arch.width, smooth_n, 1, smooth_scale))
    return CompositionChain(stages, u_range)


def certify(problem: str, arch: ArchitectureSpec, report: SmoothnessReport, d: int,
            fmap: AnalyticMap | None = None, head_scale: float | None = None, scale: dict | None = None,
            conditional: bool = False, search: dict | None = None) -> dict:
    """Issue a bound certificate as a JSON-ready dict.

    ``head_scale`` is the sup norm of the head stage's target on the scaled
    solution (the factor that puts it into the unit ball).  ``scale`` records the
    affine map ``u_s = (u - u_min)/(u_max - u_min)`` the bounds refer to.
    """
    linear = report.flux_case == 1
    n_smooth = report.n_global if linear else report.n
    n_rough = report.n_global if linear else 0.0
    no_bound = report.classification == "asymptotically_smooth"
    if arch.kind == "beacons":
        fmap = fmap or AnalyticMap("identity", 1.0)
        if not fmap.admits(0.0, 1.0):
            raise CertificateRefused("range_containment", f"{fmap.form}/C={fmap.C} cannot reach [0, 1]")
        if head_scale is None:
            head_scale = float(np.max(np.abs(fmap.inverse(np.array([0.0, 1.0])))))
        chain = beacons_chain(arch, d, fmap, head_scale)
    else:
        # the whole plain network viewed as one shallow map on its hidden neurons
        chain = CompositionChain([LearnedStage((arch.layers - 1) * arch.width, 0, d,
                                               1.0 if head_scale is None else head_scale, head=True)])
    b_s, b_n, steps, idx = chain_bound(chain, n_smooth, not no_bound, n_rough)
    cert = {
        "version": VERSION,
        "type": "bound",
        "problem": problem,
        "architecture": arch.to_dict(),
        "smoothness": {"classification": report.classification, "n": _jnum(report.n),
                       "n_global": _jnum(report.n_global), "flux_case": report.flux_case,
                       "t_inf": [float(t) for t in report.t_inf], "notes": list(report.notes)},
        "head_n": {"n_smooth": _jnum(n_smooth), "n_nonsmooth": _jnum(n_rough)},
        "conditional": bool(conditional),
        "assumptions": ["training-data correctness assumed"] if conditional else [],
        "informational": arch.kind == "plain",
        "chain": chain.to_dict(),
        "u_range": list(chain.u_range),
        "scale": scale or {},
        "derivation": steps,
        "results": idx,
        "bound_smooth": b_s,
        "bound_nonsmooth": b_n if b_n is not None else {"no_bound": NO_BOUND_REASON},
        "step_count": len(steps),
    }
    if search is not None:
        cert["candidate_search"] = search
    return cert


def applicable_bound(cert: dict) -> float | None:
    """Bound to compare against observations: non-smooth when discontinuities exist."""
    rough = cert["bound_nonsmooth"]
    if isinstance(rough, dict):
        return None
    if cert["smoothness"]["classification"] == "smooth_forever":
        return cert["bound_smooth"]
    return rough


def _jnum(n: float):
    return n if math.isfinite(n) else "inf"


def _leaf_value(cert: dict, origin: str) -> float:
    if origin == "zero":
        return 0.0
    if origin in ("n_smooth", "n_nonsmooth"):
        v = cert["head_n"][origin]
        return math.inf if v == "inf" else float(v)
    if origin.startswith("chain["):
        k, attr = origin[6:].split("].")
        return float(cert["chain"][int(k)][attr])
    raise ValueError(f"unknown leaf origin {origin!r}")


def check_bound_certificate(cert: dict) -> list[str]:
    """Independent replay; returns a list of problems (empty means accepted)."""
    errs: list[str] = []
    try:
        arch = ArchitectureSpec(**cert["architecture"])
        chain = CompositionChain([stage_from_dict(s) for s in cert["chain"]], tuple(cert["u_range"]))
    except (CertificateRefused, ValueError, KeyError, TypeError) as exc:
        return [f"malformed header: {exc}"]
    # chain fields must agree with the declared architecture and smoothness report
    for i, s in enumerate(chain.stages):
        if isinstance(s, LearnedStage):
            want_N = arch.width if arch.kind == "beacons" else (arch.layers - 1) * arch.width
            if s.N != want_N:
                errs.append(f"chain[{i}].N disagrees with the architecture")
            if s.rate != float(cert["chain"][i]["rate"]):
                errs.append(f"chain[{i}].rate is not the recorded stage rate")
        elif s.lipschitz != float(cert["chain"][i]["L"]):
            errs.append(f"chain[{i}].L is not 1/C")
    if arch.kind == "beacons" and len(chain.stages) != 1 + arch.learned_stages:
        errs.append("chain length disagrees with the architecture")
    sm = cert["smoothness"]
    linear = sm.get("flux_case") == 1
    n_s = sm["n_global"] if linear else sm["n"]
    n_r = sm["n_global"] if linear else 0
    if cert["head_n"]["n_smooth"] != n_s or cert["head_n"]["n_nonsmooth"] != n_r:
        errs.append("head smoothness orders disagree with the smoothness report")
    steps = cert["derivation"]
    if not isinstance(steps, list) or not steps:
        return errs + ["empty derivation"]
    used = set()
    for i, st in enumerate(steps):
        rule = st.get("rule")
        if rule not in RULES:
            errs.append(f"step {i}: unknown rule {rule!r}")
            continue
        ins, refs, origin = st.get("inputs", []), st.get("from", []), st.get("origin", [])
        if not (len(ins) == len(refs) == len(origin)):
            errs.append(f"step {i}: inputs/from/origin length mismatch")
            continue
        arity = {"mhaskar_rate": 4, "composition": 3}.get(rule)
        if arity is not None and len(ins) != arity:
            errs.append(f"step {i}: {rule} takes {arity} inputs")
            continue
        for k, (v, ref, org) in enumerate(zip(ins, refs, origin)):
            if ref is not None:
                if not (isinstance(ref, int) and 0 <= ref < i):
                    errs.append(f"step {i}: input {k} refers forward or out of range")
                elif org is not None:
                    errs.append(f"step {i}: input {k} has both a source step and a leaf origin")
                elif steps[ref]["output"] != v:
                    errs.append(f"step {i}: input {k} does not match step {ref}")
                else:
                    used.add(ref)
            else:
                try:
                    if _leaf_value(cert, org) != v:
                        errs.append(f"step {i}: input {k} disagrees with {org}")
                except (ValueError, KeyError, IndexError, TypeError, AttributeError):
                    errs.append(f"step {i}: input {k} has an invalid origin")
        try:
            out = RULES[rule](*ins)
        except (ValueError, TypeError) as exc:
            errs.append(f"step {i}: {exc}")
            continue
        if out != st.get("output"):
            errs.append(f"step {i}: output does not replay")
    # structural check: recompute the whole derivation from the chain and compare
    try:
        no_bound = isinstance(cert["bound_nonsmooth"], dict)
        n_s_f = math.inf if n_s == "inf" else float(n_s)
        n_r_f = math.inf if n_r == "inf" else float(n_r)
        b_s, b_n, ref_steps, idx = chain_bound(chain, n_s_f, not no_bound, n_r_f)
    except (ValueError, CertificateRefused) as exc:
        return errs + [f"chain cannot be folded: {exc}"]
    if len(ref_steps) != len(steps) or cert.get("step_count") != len(steps):
        errs.append("step count disagrees with the chain")
    else:
        for i, (a, b) in enumerate(zip(ref_steps, steps)):
            if a["rule"] != b["rule"] or a["from"] != b["from"] or a["origin"] != b["origin"]:
                errs.append(f"step {i}: structure differs from the chain's fold")
    if cert.get("results") != idx:
        errs.append("result indices disagree with the fold")
    if cert["bound_smooth"] != b_s:
        errs.append("bound_smooth does not replay")
    if no_bound:
        if cert["smoothness"]["classification"] != "asymptotically_smooth" or \
                cert["bound_nonsmooth"].get("no_bound") != NO_BOUND_REASON:
            errs.append("no_bound is only valid for asymptotically smooth solutions")
    elif cert["bound_nonsmooth"] != b_n:
        errs.append("bound_nonsmooth does not replay")
    elif not b_s <= b_n:
        errs.append("bound_smooth exceeds bound_nonsmooth")
    return errs
