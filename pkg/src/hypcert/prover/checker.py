"""Independent replay of proof and bound certificates.

The replay uses only the rule table and the expression helpers; it does not
call the normalizer.  For every rewrite step it recomputes which redex the
innermost-leftmost strategy must pick, which rule fires there, and what the
rule produces, then compares all three with the recorded step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .expr import FALSE, TRUE, App, Expr, ExprError, Num, Sym, parse, replace_at, subterm
from .rules import RULES, Assumptions


class MalformedCertificate(ValueError):
    pass


@dataclass
class CheckResult:
    accepted: bool
    failing_step: int | None = None
    reasons: list = field(default_factory=list)

    def __bool__(self):
        return self.accepted


def _reject(step, reason) -> CheckResult:
    return CheckResult(False, step, [reason])


class _Replayer:
    def __init__(self, asm: Assumptions):
        self.asm = asm
        self.normal: set = set()

    def fire(self, e: Expr):
        for r in RULES:
            out = r.apply(e, self.asm)
            if out is not None:
                return r.name, out
        return None

    def redex(self, e: Expr, path: tuple = ()):
        """First redex in post-order: (path, rule name, subterm, result) or None."""
        if e in self.normal:
            return None
        if isinstance(e, App):
            for i, a in enumerate(e.args):
                hit = self.redex(a, path + (i,))
                if hit is not None:
                    return hit
        fired = self.fire(e)
        if fired is None:
            self.normal.add(e)
            return None
        return path, fired[0], e, fired[1]


# exact evaluation of closed numeric claims

class _NotExact(ValueError):
    pass


def _exact(e: Expr):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Sym):
        if e == TRUE:
            return True
        if e == FALSE:
            return False
        raise _NotExact(f"free symbol {e.name}")
    op = e.op
    if op == "piecewise":
        for c, v in zip(e.args[::2], e.args[1::2]):
            if _exact(c) is True:
                return _exact(v)
        raise _NotExact("no branch applies")
    v = [_exact(a) for a in e.args]
    if op == "and":
        return all(x is True for x in v)
    if any(isinstance(x, bool) for x in v):
        raise _NotExact(f"boolean argument to {op}")
    if op == "+":
        return sum(v, Fraction(0))
    if op == "*":
        out = Fraction(1)
        for x in v:
            out *= x
        return out
    if op == "-":
        return -v[0] if len(v) == 1 else v[0] - v[1]
    if op == "/":
        if v[1] == 0:
            raise _NotExact("division by zero")
        return v[0] / v[1]
    if op == "^":
        if v[1].denominator != 1 or (v[0] == 0 and v[1] < 0):
            raise _NotExact("non-integer or singular power")
        return v[0] ** int(v[1])
    if op == "abs":
        return abs(v[0])
    if op == "min":
        return min(v)
    if op == "max":
        return max(v)
    if op == "sqrt":
        x = v[0]
        if x < 0:
            raise _NotExact("negative root")
        n, d = x.numerator, x.denominator
        rn, rd = _isqrt(n), _isqrt(d)
        if rn * rn != n or rd * rd != d:
            raise _NotExact("irrational root")
        return Fraction(rn, rd)
    if op in ("<", "<=", ">", ">=", "="):
        a, b = v
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "=": a == b}[op]
    raise _NotExact(f"operator {op} has no exact value")


def _isqrt(n: int) -> int:
    import math

    return math.isqrt(n)


def _value_expr(x) -> Expr:
    if x is True:
        return TRUE
    if x is False:
        return FALSE
    return Num(x)


def _parse(text, what):
    try:
        return parse(text)
    except (ExprError, TypeError) as exc:
        raise MalformedCertificate(f"cannot parse {what}: {exc}") from None


def check_proof_certificate(cert: dict) -> CheckResult:
    try:
        goal = cert["goal"]
        lhs = _parse(goal["lhs"], "goal lhs")
        rhs = _parse(goal["rhs"], "goal rhs")
        asm = Assumptions.from_exprs([_parse(a, "assumption") for a in cert["assumptions"]])
        trace = cert["trace"]
        status = cert["status"]
        normals = cert["normal_forms"]
        count = cert["step_count"]
    except (KeyError, TypeError, ExprError) as exc:
        raise MalformedCertificate(f"missing or invalid field: {exc}") from None
    if count != len(trace):
        return _reject(None, f"step_count {count} != trace length {len(trace)}")
    if status not in ("proved", "failed"):
        return _reject(None, f"unknown status {status!r}")

    if trace and all(s.get("kind") == "numeric" for s in trace):
        return _check_numeric(lhs, rhs, trace, status)

    rp = _Replayer(asm)
    state = {"lhs": lhs, "rhs": rhs}
    seen_rhs = False
    for i, s in enumerate(trace):
        if s.get("kind") != "rewrite":
            return _reject(i, "mixed or unknown step kinds")
        side = s.get("side")
        if side not in state or (side == "lhs" and seen_rhs):
            return _reject(i, "steps must cover the left side, then the right side")
        seen_rhs = seen_rhs or side == "rhs"
        cur = state[side]
        hit = rp.redex(cur)
        if hit is None:
            return _reject(i, f"{side} is already in normal form")
        path, rule, before, after = hit
        try:
            rec_path = tuple(int(k) for k in s["path"])
            rec_before = _parse(s["before"], f"step {i} before")
            rec_after = _parse(s["after"], f"step {i} after")
        except (KeyError, TypeError, ValueError) as exc:
            return _reject(i, f"malformed step: {exc}")
        if rec_path != path:
            return _reject(i, f"position {list(rec_path)} is not the innermost-leftmost redex {list(path)}")
        if s.get("rule") != rule:
            return _reject(i, f"rule {s.get('rule')!r} recorded where {rule!r} applies first")
        try:
            if subterm(cur, rec_path) != rec_before or rec_before != before:
                return _reject(i, "before-expression does not match the current term")
        except ExprError:
            return _reject(i, "invalid position")
        if rec_after != after:
            return _reject(i, "after-expression does not match the rule's result")
        state[side] = replace_at(cur, path, after)

    for side in ("lhs", "rhs"):
        if rp.redex(state[side]) is not None:
            return _reject(None, f"{side} trace stops before a normal form")
        claimed = normals.get(side)
        if claimed is None or _parse(claimed, f"{side} normal form") != state[side]:
            return _reject(None, f"claimed {side} normal form differs from the replay")
    proved = state["lhs"] == state["rhs"]
    if (status == "proved") != proved:
        return _reject(None, f"status {status!r} contradicts the replayed normal forms")
    return CheckResult(True)


def _check_numeric(lhs: Expr, rhs: Expr, trace: list, status: str) -> CheckResult:
    claims = []
    all_true = True
    for i, s in enumerate(trace):
        try:
            expr = _parse(s["expr"], f"step {i} expr")
            value = _parse(s["value"], f"step {i} value")
        except KeyError as exc:
            return _reject(i, f"malformed evidence step: {exc}")
        try:
            exact = _value_expr(_exact(expr))
        except _NotExact as exc:
            return _reject(i, f"claim has no exact value: {exc}")
        if exact != value:
            return _reject(i, f"claimed value {value.text} but exact value is {exact.text}")
        claims.append(expr)
        all_true &= exact == TRUE
    if lhs != App("and", claims) or rhs != TRUE:
        return _reject(None, "goal does not match the evidence claims")
    if (status == "proved") != all_true:
        return _reject(None, f"status {status!r} contradicts the evidence")
    return CheckResult(True)


def check_certificate(cert) -> CheckResult:
    """Accept or reject a proof certificate or a bound certificate."""
    if hasattr(cert, "to_dict"):
        cert = cert.to_dict()
    if not isinstance(cert, dict) or "type" not in cert:
        raise MalformedCertificate("certificate must be a mapping with a 'type' field")
    if cert["type"] == "proof":
        return check_proof_certificate(cert)
    if cert["type"] == "bound":
        from ..certifier import check_bound_certificate

        try:
            errors = check_bound_certificate(cert)
        except (KeyError, TypeError, IndexError) as exc:
            raise MalformedCertificate(f"missing or invalid field: {exc}") from None
        if not errors:
            return CheckResult(True)
        return CheckResult(False, _first_step(errors), errors)
    raise MalformedCertificate(f"unknown certificate type {cert['type']!r}")


def _first_step(errors: list) -> int | None:
    import re

    for e in errors:
        m = re.search(r"step (\d+)", str(e))
        if m:
            return int(m.group(1))
    return None
