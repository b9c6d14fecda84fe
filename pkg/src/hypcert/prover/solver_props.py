"""Symbolic forms of the finite-volume building blocks and their correctness proofs."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..fv import LIMITERS
from ..pde import PdeSystem
from .engine import ProofCertificate, normal_form, prove_equal, prove_numeric
from .expr import TRUE, App, Expr, Num, Sym, app, parse
from .rules import Assumptions

ENTROPY_FIX = Fraction(1, 10)
THETA_SAMPLES = (Fraction(1, 2), Fraction(2), Fraction(1, 3), Fraction(3), Fraction(2, 3), Fraction(3, 2),
                 Fraction(1, 5), Fraction(5), Fraction(1), Fraction(7, 4))
THETA_NONPOSITIVE = (Fraction(0), Fraction(-1, 2), Fraction(-2))


def _half(e) -> App:
    return app("*", Fraction(1, 2), e)


def _sub(a, b) -> App:
    return app("+", a, app("*", -1, b))


def _div(a, b) -> App:
    return app("*", a, app("^", b, -1))


def state_symbols(sys: PdeSystem, suffix: str = "") -> list[Sym]:
    if sys.is_scalar:
        names = ["u"]
    elif sys.dim == 1:
        names = ["rho", "m", "E"]
    else:
        names = ["rho", "mx", "my", "E"]
    return [Sym(n + suffix) for n in names]


def _perm(sys: PdeSystem, direction: int) -> list[int]:
    if sys.dim == 2 and direction == 1 and not sys.is_scalar:
        return [0, 2, 1, 3]
    return list(range(sys.m))


def _pressure(sys: PdeSystem, U: Sequence[Expr]) -> Expr:
    rho, E = U[0], U[-1]
    kinetic = app("+", *[app("^", mom, 2) for mom in U[1:-1]])
    return app("*", app("+", "gamma", -1), _sub(E, _half(_div(kinetic, rho))))


def flux(sys: PdeSystem, U: Sequence[Expr], direction: int = 0) -> list[Expr]:
    """Physical flux components in the given direction."""
    if sys.kind == "advection":
        return [app("*", "a", U[0])]
    if sys.kind == "burgers":
        return [_half(app("^", U[0], 2))]
    perm = _perm(sys, direction)
    V = [U[k] for k in perm]
    rho, mn, E = V[0], V[1], V[-1]
    p = _pressure(sys, V)
    out = [mn, app("+", _div(app("^", mn, 2), rho), p)]
    if sys.dim == 2:
        out.append(_div(app("*", mn, V[2]), rho))
    out.append(app("*", _div(mn, rho), app("+", E, p)))
    return [out[k] for k in perm]


def _sound_speed(sys: PdeSystem, U) -> Expr:
    return app("sqrt", _div(app("*", "gamma", _pressure(sys, U)), U[0]))


def max_speed(sys: PdeSystem, U: Sequence[Expr], direction: int = 0) -> Expr:
    if sys.kind == "advection":
        return app("abs", "a")
    if sys.kind == "burgers":
        return app("abs", U[0])
    V = [U[k] for k in _perm(sys, direction)]
    return app("+", app("abs", _div(V[1], V[0])), _sound_speed(sys, V))


def _vec(parts: list[Expr]) -> Expr:
    return parts[0] if len(parts) == 1 else App("vec", parts)


def lax_friedrichs(sys: PdeSystem, L, R, direction: int = 0) -> Expr:
    s = app("max", max_speed(sys, L, direction), max_speed(sys, R, direction))
    fL, fR = flux(sys, L, direction), flux(sys, R, direction)
    return _vec([_sub(_half(app("+", a, b)), _half(app("*", s, _sub(r, l))))
                 for a, b, l, r in zip(fL, fR, L, R)])


def _fixed_abs(lam: Expr, delta: Expr) -> Expr:
    smooth = _div(app("+", app("^", lam, 2), app("^", delta, 2)), app("*", 2, delta))
    return app("piecewise", app("<", app("abs", lam), delta), smooth, TRUE, app("abs", lam))


def _delta(lam, lamL, lamR, spread) -> Expr:
    return app("max", app("*", ENTROPY_FIX, spread), _sub(lam, lamL), _sub(lamR, lam))


def roe(sys: PdeSystem, L, R, direction: int = 0) -> Expr:
    """Roe flux with the Harten entropy fix on the genuinely nonlinear waves."""
    fL, fR = flux(sys, L, direction), flux(sys, R, direction)
    if sys.is_scalar:
        if sys.kind == "advection":
            lam, lamL, lamR = Sym("a"), Sym("a"), Sym("a")
        else:
            lam, lamL, lamR = _half(app("+", L[0], R[0])), L[0], R[0]
        fix = _fixed_abs(lam, _delta(lam, lamL, lamR, app("abs", lam)))
        return _sub(_half(app("+", fL[0], fR[0])), _half(app("*", fix, _sub(R[0], L[0]))))

    perm = _perm(sys, direction)
    A, B = [L[k] for k in perm], [R[k] for k in perm]
    sL, sR = app("sqrt", A[0]), app("sqrt", B[0])
    w = app("+", sL, sR)
    HL = _div(app("+", A[-1], _pressure(sys, A)), A[0])
    HR = _div(app("+", B[-1], _pressure(sys, B)), B[0])
    u = _div(app("+", _div(A[1], sL), _div(B[1], sR)), w)
    H = _div(app("+", app("*", sL, HL), app("*", sR, HR)), w)
    d = [_sub(b, a) for a, b in zip(A, B)]
    if sys.dim == 2:
        v = _div(app("+", _div(A[2], sL), _div(B[2], sR)), w)
        q2 = app("+", app("^", u, 2), app("^", v, 2))
    else:
        v = None
        q2 = app("^", u, 2)
    c = app("sqrt", app("*", app("+", "gamma", -1), _sub(H, _half(q2))))
    # wave strengths
    dE = d[-1] if v is None else _sub(d[-1], app("*", _sub(d[2], app("*", v, d[0])), v))
    a2 = app("*", app("+", "gamma", -1), app("^", c, -2),
             app("+", app("*", d[0], _sub(H, app("^", u, 2))), app("*", u, d[1]), app("*", -1, dE)))
    a1 = app("*", _div(1, app("*", 2, c)), _sub(app("+", app("*", d[0], app("+", u, c)), app("*", -1, d[1])),
                                                  app("*", c, a2)))
    a5 = _sub(d[0], app("+", a1, a2))
    lam1, lam5 = _sub(u, c), app("+", u, c)
    cL, cR = _sound_speed(sys, A), _sound_speed(sys, B)
    spread = app("max", app("abs", lam1), app("abs", u), app("abs", lam5))
    fix1 = _fixed_abs(lam1, _delta(lam1, _sub(_div(A[1], A[0]), cL), _sub(_div(B[1], B[0]), cR), spread))
    fix5 = _fixed_abs(lam5, _delta(lam5, app("+", _div(A[1], A[0]), cL), app("+", _div(B[1], B[0]), cR), spread))
    fix_u = app("abs", u)
    if v is None:
        K1 = [Num(1), lam1, _sub(H, app("*", u, c))]
        K2 = [Num(1), u, _half(q2)]
        K5 = [Num(1), lam5, app("+", H, app("*", u, c))]
        waves = [(fix1, a1, K1), (fix_u, a2, K2), (fix5, a5, K5)]
    else:
        a3 = _sub(d[2], app("*", v, d[0]))
        K1 = [Num(1), lam1, v, _sub(H, app("*", u, c))]
        K2 = [Num(1), u, v, _half(q2)]
        K3 = [Num(0), Num(0), Num(1), v]
        K5 = [Num(1), lam5, v, app("+", H, app("*", u, c))]
        waves = [(fix1, a1, K1), (fix_u, a2, K2), (fix_u, a3, K3), (fix5, a5, K5)]
    diss = [app("+", *[app("*", f, a, K[i]) for f, a, K in waves]) for i in range(sys.m)]
    out = [_sub(_half(app("+", fL[k], fR[k])), _half(diss[perm.index(k)])) for k in range(sys.m)]
    return _vec(out)


NUMERICAL_FLUXES = {"lax_friedrichs": lax_friedrichs, "roe": roe}


def _base_assumptions(sys: PdeSystem, extra_define: dict | None = None, **kw) -> Assumptions:
    if sys.is_scalar:
        real = ["u"] + (["a"] if sys.kind == "advection" else [])
        return Assumptions.of(real=real, define=extra_define, **kw)
    positive = ["rho", "E", "gamma"]
    real = [s.name for s in state_symbols(sys)[1:-1]]
    return Assumptions.of(positive=positive + kw.pop("positive", []), real=real + kw.pop("real", []),
                          facts=["(> gamma 1)"] + list(kw.pop("facts", [])), define=extra_define, **kw)


def prove_flux_continuity(sys: PdeSystem, scheme: str, direction: int = 0) -> ProofCertificate:
    """F(u, u) = f(u): the numerical flux is consistent with the physical flux."""
    U = state_symbols(sys)
    L, R = state_symbols(sys, "L"), state_symbols(sys, "R")
    defs = {s.name: base for s, base in zip(L + R, U + U)}
    asm = _base_assumptions(sys, defs)
    lhs = NUMERICAL_FLUXES[scheme](sys, L, R, direction)
    rhs = _vec(flux(sys, U, direction))
    return prove_equal(lhs, rhs, asm, prop=f"flux_continuity[{scheme},{'xy'[direction]}]")


def eigenvalues(sys: PdeSystem, direction: int = 0) -> tuple[list[Expr], Assumptions]:
    """Characteristic speeds and the validity assumptions they are proved under.

    Scalar speeds come from differentiating the flux; Euler speeds are written in
    primitive variables (density, velocity, pressure).
    """
    if sys.is_scalar:
        asm = _base_assumptions(sys)
        u = state_symbols(sys)[0]
        return [App("d", [flux(sys, [u], direction)[0], u])], asm
    vel = "uv"[direction] if sys.dim == 2 else "u"
    real = ["u", "v"] if sys.dim == 2 else ["u"]
    asm = Assumptions.of(positive=["rho", "p", "gamma"], real=real, facts=["(> gamma 1)"])
    c = parse("(sqrt (* gamma p (^ rho -1)))")
    lam = [_sub(Sym(vel), c)] + [Sym(vel)] * (sys.m - 2) + [app("+", vel, c)]
    return lam, asm


def prove_hyperbolicity(sys: PdeSystem, direction: int = 0) -> ProofCertificate:
    lam, asm = eigenvalues(sys, direction)
    goal = App("and", [App("real", [x]) for x in lam])
    return prove_equal(goal, TRUE, asm, prop=f"hyperbolicity[{'xy'[direction]}]")


def prove_cfl(sys: PdeSystem, direction: int = 0) -> ProofCertificate:
    """|lam| dt/dx <= C_CFL once dt = C_CFL dx / s_max and |lam| <= s_max."""
    lam, asm = eigenvalues(sys, direction)
    abs_lam = [normal_form(App("abs", [x]), asm) for x in lam]
    facts = list(asm.facts) + [App("<=", [a, Sym("smax")]) for a in abs_lam]
    preds = {k: set(v) for k, v in asm.predicates.items()}
    for s in ("dx", "smax", "cfl"):
        preds.setdefault(s, set()).add("positive")
    asm = Assumptions({k: frozenset(v) for k, v in preds.items()}, tuple(dict.fromkeys(facts)),
                      {"dt": parse("(* cfl dx (^ smax -1))")})
    goal = App("and", [parse(f"(<= (* (abs {x.text}) dt (^ dx -1)) cfl)") for x in lam])
    return prove_equal(goal, TRUE, asm, prop=f"cfl[{'xy'[direction]}]")


def limiter_expr(kind: str, theta: Expr) -> Expr:
    t = theta
    if kind == "minmod":
        return app("max", 0, app("min", 1, t))
    if kind == "superbee":
        return app("max", 0, app("min", app("*", 2, t), 1), app("min", t, 2))
    if kind == "monotonized_centered":
        return app("max", 0, app("min", app("*", 2, t), _half(app("+", 1, t)), 2))
    if kind == "van_leer":
        return _div(app("+", t, app("abs", t)), app("+", 1, app("abs", t)))
    raise ValueError(f"no symbolic form for limiter {kind!r}")


def prove_limiter_symmetry(kind: str) -> ProofCertificate:
    claims = []
    for th in THETA_SAMPLES:
        t = Num(th)
        claims.append(app("=", _div(limiter_expr(kind, t), t), limiter_expr(kind, Num(1 / th))))
    return prove_numeric(f"limiter_symmetry[{kind}]", claims)


def prove_limiter_tvd(kind: str) -> ProofCertificate:
    claims = []
    for th in THETA_SAMPLES:
        phi = limiter_expr(kind, Num(th))
        claims.append(app("and", app("<=", 0, phi), app("<=", phi, app("min", app("*", 2, th), 2))))
    for th in THETA_NONPOSITIVE:
        claims.append(app("=", limiter_expr(kind, Num(th)), 0))
    return prove_numeric(f"limiter_tvd[{kind}]", claims)


def prove_solver_properties(sys: PdeSystem, scheme=None) -> dict[str, ProofCertificate]:
    """All property certificates for ``sys``; ``scheme`` may fix flux and limiter."""
    fluxes = ("lax_friedrichs", "roe")
    limiter = getattr(scheme, "limiter", None) if scheme is not None else None
    limiters = [limiter] if limiter not in (None, "none") else [k for k in LIMITERS if k != "none"]
    out: dict[str, ProofCertificate] = {}
    for direction in range(sys.dim):
        for f in fluxes:
            c = prove_flux_continuity(sys, f, direction)
            out[c.property] = c
        for c in (prove_hyperbolicity(sys, direction), prove_cfl(sys, direction)):
            out[c.property] = c
    for k in limiters:
        for c in (prove_limiter_symmetry(k), prove_limiter_tvd(k)):
            out[c.property] = c
    return out
