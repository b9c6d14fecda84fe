"""Normalization by rewriting and equational proof certificates."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .expr import App, Expr, parse, replace_at, subterm
from .rules import RULES, Assumptions, Rule

STEP_LIMIT = 100_000
SEMANTICS_NOTE = ("rules are sound over the reals wherever the rewritten expression is defined; "
                  "floating-point execution of the proved formulas may deviate within rounding")
CERT_VERSION = 1


class StepLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Step:
    """One rewrite: ``rule`` turned subterm ``before`` at ``path`` into ``after``."""

    rule: str
    path: tuple
    before: Expr
    after: Expr
    side: str = "lhs"

    def to_dict(self) -> dict:
        return {"kind": "rewrite", "side": self.side, "rule": self.rule, "path": list(self.path),
                "before": self.before.text, "after": self.after.text}


@dataclass(frozen=True)
class Evidence:
    """Numeric evidence: the closed expression ``expr`` evaluates exactly to ``value``."""

    expr: Expr
    value: Expr

    def to_dict(self) -> dict:
        return {"kind": "numeric", "expr": self.expr.text, "value": self.value.text}


def _first_rule(e: Expr, asm: Assumptions, rules: Sequence[Rule]):
    for r in rules:
        out = r.apply(e, asm)
        if out is not None:
            return r, out
    return None


class _Normalizer:
    def __init__(self, asm: Assumptions, limit: int, side: str):
        self.asm = asm
        self.limit = limit
        self.side = side
        self.steps: list[Step] = []

    def record(self, rule: Rule, path: tuple, before: Expr, after: Expr) -> None:
        if len(self.steps) >= self.limit:
            raise StepLimitExceeded(f"no normal form within {self.limit} steps")
        self.steps.append(Step(rule.name, path, before, after, self.side))

    # innermost-leftmost: children left to right, then the node; a rewritten
    # node is normalized again from its leaves
    def innermost(self, e: Expr, path: tuple) -> Expr:
        if isinstance(e, App):
            args = [self.innermost(a, path + (i,)) for i, a in enumerate(e.args)]
            if any(x is not y for x, y in zip(args, e.args)):
                e = App(e.op, args)
        hit = _first_rule(e, self.asm, RULES)
        if hit is None:
            return e
        rule, out = hit
        self.record(rule, path, e, out)
        return self.innermost(out, path)

    # alternative strategies used to probe confluence
    def iterate(self, e: Expr, choose) -> Expr:
        while True:
            redexes = []
            _collect(e, (), self.asm, redexes)
            if not redexes:
                return e
            path, rule, before, after = choose(redexes)
            self.record(rule, path, before, after)
            e = replace_at(e, path, after)


def _collect(e: Expr, path: tuple, asm: Assumptions, out: list) -> None:
    hit = _first_rule(e, asm, RULES)
    if hit is not None:
        out.append((path, hit[0], e, hit[1]))
    if isinstance(e, App):
        for i, a in enumerate(e.args):
            _collect(a, path + (i,), asm, out)


def simplify(e: Expr | str, asm: Assumptions | None = None, limit: int = STEP_LIMIT,
             strategy: str = "innermost", seed: int = 0, side: str = "lhs") -> tuple[Expr, list[Step]]:
    """Rewrite ``e`` to normal form; returns (normal form, trace).

    ``strategy`` is ``innermost`` (the certified order), ``outermost``,
    ``random`` or ``random_innermost``; the alternatives exist to test confluence.
    """
    if isinstance(e, str):
        e = parse(e)
    asm = asm or Assumptions()
    nz = _Normalizer(asm, int(limit), side)
    if strategy == "innermost":
        out = nz.innermost(e, ())
    elif strategy == "outermost":
        out = nz.iterate(e, lambda rs: rs[0])
    elif strategy == "random":
        rng = random.Random(seed)
        out = nz.iterate(e, lambda rs: rs[rng.randrange(len(rs))])
    elif strategy == "random_innermost":
        rng = random.Random(seed)

        def pick(rs):
            paths = [r[0] for r in rs]
            inner = [r for r in rs if not any(len(q) > len(r[0]) and q[:len(r[0])] == r[0] for q in paths)]
            return inner[rng.randrange(len(inner))]

        out = nz.iterate(e, pick)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return out, nz.steps


def normal_form(e: Expr | str, asm: Assumptions | None = None, limit: int = STEP_LIMIT) -> Expr:
    return simplify(e, asm, limit)[0]


@dataclass
class ProofCertificate:
    property: str
    lhs: Expr
    rhs: Expr
    assumptions: Assumptions
    trace: list = field(default_factory=list)
    status: str = "failed"
    lhs_normal: Expr | None = None
    rhs_normal: Expr | None = None
    detail: str = ""

    @property
    def step_count(self) -> int:
        return len(self.trace)

    @property
    def proved(self) -> bool:
        return self.status == "proved"

    def to_dict(self) -> dict:
        return {
            "version": CERT_VERSION,
            "type": "proof",
            "property": self.property,
            "goal": {"lhs": self.lhs.text, "rhs": self.rhs.text},
            "assumptions": [a.text for a in self.assumptions.to_exprs()],
            "trace": [s.to_dict() for s in self.trace],
            "normal_forms": {"lhs": _text(self.lhs_normal), "rhs": _text(self.rhs_normal)},
            "status": self.status,
            "step_count": self.step_count,
            "detail": self.detail,
            "note": SEMANTICS_NOTE,
        }


def _text(e):
    return None if e is None else e.text


def prove_equal(lhs: Expr | str, rhs: Expr | str, asm: Assumptions | None = None,
                prop: str = "equality", limit: int = STEP_LIMIT) -> ProofCertificate:
    """Normalize both sides; proved iff the normal forms coincide."""
    lhs = parse(lhs) if isinstance(lhs, str) else lhs
    rhs = parse(rhs) if isinstance(rhs, str) else rhs
    asm = asm or Assumptions()
    cert = ProofCertificate(prop, lhs, rhs, asm)
    try:
        nl, tl = simplify(lhs, asm, limit, side="lhs")
        nr, tr = simplify(rhs, asm, limit - len(tl), side="rhs")
    except StepLimitExceeded as exc:
        cert.detail = str(exc)
        return cert
    cert.trace = tl + tr
    cert.lhs_normal, cert.rhs_normal = nl, nr
    if nl == nr:
        cert.status = "proved"
    else:
        cert.detail = f"normal forms differ: {nl.text} vs {nr.text}"
    return cert


def prove_numeric(prop: str, claims: Sequence[Expr], asm: Assumptions | None = None) -> ProofCertificate:
    """Certificate built from closed numeric claims, each evaluated exactly."""
    from .expr import TRUE

    asm = asm or Assumptions()
    goal = App("and", list(claims))
    cert = ProofCertificate(prop, goal, TRUE, asm)
    failed = []
    for c in claims:
        value = normal_form(c, asm)
        cert.trace.append(Evidence(c, value))
        if value != TRUE:
            failed.append(c.text)
    cert.status = "failed" if failed else "proved"
    cert.lhs_normal = TRUE if not failed else goal
    cert.rhs_normal = TRUE
    if failed:
        cert.detail = "claims not confirmed: " + "; ".join(failed)
    return cert


def apply_step(e: Expr, step: Step, asm: Assumptions) -> Expr:
    """Apply the named rule at the named position (used by the replay tests)."""
    from .rules import RULE_INDEX

    out = RULE_INDEX[step.rule].apply(subterm(e, step.path), asm)
    if out is None:
        raise ValueError(f"rule {step.rule} does not apply at {list(step.path)}")
    return replace_at(e, step.path, out)
