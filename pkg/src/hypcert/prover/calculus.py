"""Symbolic derivatives and one-sided limits built on the rewrite engine."""

from __future__ import annotations

from fractions import Fraction

from .engine import simplify
from .expr import FALSE, TRUE, App, Expr, Num, Sym, is_app, parse, substitute
from .rules import Assumptions, _poly_mul, _to_poly, from_poly, ring_normal

UNDEFINED = App("undefined", [])
# probe offset used to decide piecewise guards on one side of a point
GUARD_OFFSET = Fraction(1, 10**9)


class NotDifferentiable(ValueError):
    pass


class UnsupportedLimit(ValueError):
    pass


def _contains(e: Expr, op: str) -> bool:
    if is_app(e, op):
        return True
    return isinstance(e, App) and any(_contains(a, op) for a in e.args)


def diff(e: Expr | str, var: str, asm: Assumptions | None = None) -> Expr:
    """Normal form of de/dvar; abs/min/max must have been resolved by assumptions."""
    e = parse(e) if isinstance(e, str) else e
    out, _ = simplify(App("d", [e, Sym(var)]), asm)
    if _contains(out, "d"):
        raise NotDifferentiable(f"cannot differentiate {e.text} with respect to {var}")
    return out


def _side(side) -> int:
    if side in ("right", "+", 1):
        return 1
    if side in ("left", "-", -1):
        return -1
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def is_defined(e: Expr) -> bool:
    """False when ``e`` holds a division by zero, an empty piecewise or a negative root."""
    if is_app(e, "undefined"):
        return False
    if is_app(e, "^") and isinstance(e.args[0], Num) and e.args[0].value == 0:
        p = e.args[1]
        if not isinstance(p, Num) or p.value < 0:
            return False
    if is_app(e, "sqrt") and isinstance(e.args[0], Num) and e.args[0].value < 0:
        return False
    if is_app(e, "piecewise"):
        return False  # undecided guards
    return not isinstance(e, App) or all(is_defined(a) for a in e.args)


def _sign_num(e: Expr) -> int | None:
    if isinstance(e, Num):
        return (e.value > 0) - (e.value < 0)
    return None


def _select_branch(e: Expr, var: str, point: Expr, s: int, asm: Assumptions) -> Expr:
    probe = ring_normal(App("+", [point, Num(s * GUARD_OFFSET)]))
    a = e.args
    for cond, val in zip(a[::2], a[1::2]):
        decided, _ = simplify(substitute(cond, {var: probe}), asm)
        if decided == TRUE:
            return val
        if decided != FALSE:
            raise UnsupportedLimit(f"guard {cond.text} undecided near {point.text}")
    return UNDEFINED


def _split_fraction(e: Expr) -> tuple[Expr, Expr]:
    """Write a ring normal form as numerator/denominator polynomials."""
    poly = _to_poly(e)
    den: dict = {}
    for mono in poly:
        for atom, k in mono:
            if k < 0:
                den[atom] = max(den.get(atom, 0), -k)
    dmono = tuple(sorted(den.items(), key=lambda kv: kv[0].sort_key))
    N = from_poly(_poly_mul(poly, {dmono: Fraction(1)}))
    D = ring_normal(from_poly({dmono: Fraction(1)}))
    return N, D


def limit(e: Expr | str, var: str, point: Expr | str | int | Fraction, side="right",
          asm: Assumptions | None = None) -> Expr:
    """One-sided limit of ``e`` as ``var`` approaches ``point``.

    Returns the value, an ``(inf 1)``/``(inf -1)`` marker for a signed simple
    pole, or ``(undefined)`` when a single L'Hopital pass does not settle it.
    """
    e = parse(e) if isinstance(e, str) else e
    if isinstance(point, str):
        point = parse(point)
    elif not isinstance(point, Expr):
        point = Num(point)
    s = _side(side)
    asm = asm or Assumptions()
    e, _ = simplify(e, asm)
    if is_app(e, "piecewise"):
        branch = _select_branch(e, var, point, s, asm)
        if branch == UNDEFINED:
            return UNDEFINED
        return limit(branch, var, point, side, asm)
    N, D = _split_fraction(e)
    d0, _ = simplify(substitute(D, {var: point}), asm)
    if not is_defined(d0):
        raise UnsupportedLimit(f"{e.text} is not rational in {var} near {point.text}")
    if d0 != Num(0):
        direct, _ = simplify(substitute(e, {var: point}), asm)
        if not is_defined(direct):
            raise UnsupportedLimit(f"{e.text} is not continuous at {point.text}")
        return direct
    n0, _ = simplify(substitute(N, {var: point}), asm)
    if not is_defined(n0):
        raise UnsupportedLimit(f"{e.text} is not rational in {var} near {point.text}")
    dD, _ = simplify(substitute(diff(D, var, asm), {var: point}), asm)
    if n0 != Num(0):
        sn, sd = _sign_num(n0), _sign_num(dD)
        if sn is None or not sd:
            return UNDEFINED
        return App("inf", [Num(sn * sd * s)])
    dN, _ = simplify(substitute(diff(N, var, asm), {var: point}), asm)
    if dD == Num(0) or not is_defined(dD):
        return UNDEFINED
    out, _ = simplify(App("*", [dN, App("^", [dD, Num(-1)])]), asm)
    return out if is_defined(out) else UNDEFINED
