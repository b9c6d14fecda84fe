"""The rewrite rule table shared by the prover and the independent checker.

Each rule maps one expression node to a new node (or ``None`` when it does
not apply).  Rules are either pattern rules (``lhs`` -> ``rhs`` with pattern
variables written ``_name``) or procedural rules; the latter include the
ring normal form that turns arithmetic into sorted sums of Laurent monomials.
Every rule is sound over the reals wherever its left side is defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .expr import (
    ARITH,
    FALSE,
    ONE,
    RELATIONS,
    TRUE,
    ZERO,
    App,
    Expr,
    ExprError,
    Num,
    Sym,
    is_app,
    is_num,
    parse,
    symbols,
)

EXPAND_MAX = 8
UNDEFINED = App("undefined", [])
MAX_TERMS = 4000


class RewriteError(RuntimeError):
    pass


# -- assumptions -------------------------------------------------------------------

PREDICATES = ("positive", "nonnegative", "negative", "nonzero", "real")


@dataclass
class Assumptions:
    predicates: dict[str, frozenset] = field(default_factory=dict)
    facts: tuple[Expr, ...] = ()
    definitions: dict[str, Expr] = field(default_factory=dict)

    @classmethod
    def of(cls, positive=(), nonnegative=(), negative=(), nonzero=(), real=(), facts=(),
           define: Mapping[str, Expr | str] | None = None) -> "Assumptions":
        preds: dict[str, set] = {}
        for name, group in (("positive", positive), ("nonnegative", nonnegative), ("negative", negative),
                            ("nonzero", nonzero), ("real", real)):
            for s in group:
                preds.setdefault(s, set()).add(name)
        facts = tuple(parse(f) if isinstance(f, str) else f for f in facts)
        defs = {k: parse(v) if isinstance(v, str) else v for k, v in (define or {}).items()}
        return cls({k: frozenset(v) for k, v in preds.items()}, facts, defs)

    def has(self, name: str, pred: str) -> bool:
        return pred in self.predicates.get(name, ())

    def to_exprs(self) -> list[Expr]:
        out: list[Expr] = []
        for name in sorted(self.predicates):
            for p in sorted(self.predicates[name]):
                out.append(App(p, [Sym(name)]))
        out.extend(self.facts)
        for k in sorted(self.definitions):
            out.append(App("define", [Sym(k), self.definitions[k]]))
        return out

    @classmethod
    def from_exprs(cls, items: Iterable[Expr]) -> "Assumptions":
        preds: dict[str, set] = {}
        facts, defs = [], {}
        for e in items:
            if is_app(e) and e.op in PREDICATES and isinstance(e.args[0], Sym):
                preds.setdefault(e.args[0].name, set()).add(e.op)
            elif is_app(e, "define") and isinstance(e.args[0], Sym):
                defs[e.args[0].name] = e.args[1]
            elif is_app(e) and e.op in RELATIONS:
                facts.append(e)
            else:
                raise ExprError(f"not an assumption: {e}")
        return cls({k: frozenset(v) for k, v in preds.items()}, tuple(facts), defs)


# -- sign oracle -------------------------------------------------------------------

POS, NEG, ZER, NONNEG, NONPOS, NONZERO = "pos", "neg", "zero", "nonneg", "nonpos", "nonzero"


def _flip(s):
    return {POS: NEG, NEG: POS, NONNEG: NONPOS, NONPOS: NONNEG, ZER: ZER, NONZERO: NONZERO}.get(s)


def _nonneg(s) -> bool:
    return s in (POS, ZER, NONNEG)


def _nonpos(s) -> bool:
    return s in (NEG, ZER, NONPOS)


def _nonzero(s) -> bool:
    return s in (POS, NEG, NONZERO)


def sign(e: Expr, asm: Assumptions) -> str | None:
    """Best-effort sign of ``e`` from symbol predicates; ``None`` when unknown."""
    if isinstance(e, Num):
        return POS if e.value > 0 else NEG if e.value < 0 else ZER
    if isinstance(e, Sym):
        if asm.has(e.name, "positive"):
            return POS
        if asm.has(e.name, "negative"):
            return NEG
        if asm.has(e.name, "nonnegative"):
            return NONNEG
        if asm.has(e.name, "nonzero"):
            return NONZERO
        return None
    op, args = e.op, e.args
    if op == "+":
        ss = [sign(a, asm) for a in args]
        if all(_nonneg(s) for s in ss):
            return POS if POS in ss else (ZER if all(s == ZER for s in ss) else NONNEG)
        if all(_nonpos(s) for s in ss):
            return NEG if NEG in ss else NONPOS
        return None
    if op == "-":
        if len(args) == 1:
            return _flip(sign(args[0], asm))
        return sign(App("+", [args[0], App("*", [Num(-1), args[1]])]), asm)
    if op in ("*", "/"):
        roots = {a.args[0] for a in args if is_app(a, "sqrt")} if op == "*" else set()
        ss = [_factor_sign(a, asm, roots) for a in args]
        if op == "/" and not _nonzero(ss[1]):
            return None
        if ZER in ss[:1] or (op == "*" and ZER in ss):
            return ZER
        neg = 0
        weak = False
        for s in ss:
            if s in (NEG, NONPOS):
                neg += 1
            if s in (NONNEG, NONPOS):
                weak = True
            elif s not in (POS, NEG):
                return NONZERO if all(_nonzero(x) for x in ss) else None
        if weak:
            return NONPOS if neg % 2 else NONNEG
        return NEG if neg % 2 else POS
    if op == "^":
        b, p = args
        sb = sign(b, asm)
        if isinstance(p, Num) and p.value.denominator == 1:
            n = p.value.numerator
            if n == 0:
                return POS
            if n < 0 and _nonneg(sb):
                return POS  # a negative power is only defined away from zero
            if n < 0 and _nonpos(sb):
                return NEG if n % 2 else POS
            if n < 0 and not _nonzero(sb):
                return None
            if n % 2 == 0:
                return POS if _nonzero(sb) else NONNEG
            return sb
        return POS if sb == POS else None
    if op == "sqrt":
        return POS if sign(args[0], asm) == POS else NONNEG
    if op == "abs":
        return POS if _nonzero(sign(args[0], asm)) else NONNEG
    if op == "cosh":
        return POS
    if op in ("sinh", "tanh", "arcsinh"):
        return sign(args[0], asm)
    if op in ("min", "max"):
        ss = [sign(a, asm) for a in args]
        strong, weak_ok, strong_neg, weak_neg = POS, _nonneg, NEG, _nonpos
        if op == "max":
            if any(s == POS for s in ss):
                return POS
            if any(_nonneg(s) for s in ss):
                return NONNEG
            if all(s == NEG for s in ss):
                return NEG
            return None
        if all(s == strong for s in ss):
            return POS
        if all(weak_ok(s) for s in ss):
            return NONNEG
        if any(s == strong_neg for s in ss):
            return NEG
        if any(weak_neg(s) for s in ss):
            return NONPOS
        return None
    return None


def _factor_sign(f: Expr, asm: Assumptions, roots: set) -> str | None:
    # a base whose square root is also a factor is nonnegative wherever the product is defined
    base = f.args[0] if is_app(f, "^") else f
    if base not in roots:
        return sign(f, asm)
    if sign(base, asm) == POS:
        return POS
    if is_app(f, "^") and isinstance(f.args[1], Num) and f.args[1].value < 0:
        return POS
    return NONNEG


# -- ring normal form -------------------------------------------------------------

Mono = tuple  # ((atom, exponent), ...) sorted by atom text
Poly = dict


def _mono_mul(a: Mono, b: Mono) -> Mono:
    d: dict[Expr, int] = {}
    for atom, e in a + b:
        d[atom] = d.get(atom, 0) + e
    return tuple(sorted(((k, v) for k, v in d.items() if v != 0), key=lambda kv: kv[0].sort_key))


def _poly_mul(p: Poly, q: Poly) -> Poly:
    return _settle(_poly_mul_raw(p, q))


def _poly_mul_raw(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for ma, ca in p.items():
        for mb, cb in q.items():
            m = _mono_mul(ma, mb)
            out[m] = out.get(m, 0) + ca * cb
    out = {m: c for m, c in out.items() if c != 0}
    if len(out) > MAX_TERMS:
        raise RewriteError("expression too large for the ring normal form")
    return out


def _poly_add(p: Poly, q: Poly, scale=1) -> Poly:
    out = dict(p)
    for m, c in q.items():
        out[m] = out.get(m, 0) + scale * c
    return {m: c for m, c in out.items() if c != 0}


def _settle(p: Poly) -> Poly:
    """Expand sum atoms that ended up with a small positive exponent."""
    while True:
        hit = None
        for m in p:
            for atom, e in m:
                if is_app(atom, "+") and 0 < e <= EXPAND_MAX:
                    hit = (m, atom, e)
                    break
            if hit:
                break
        if not hit:
            return p
        m, atom, e = hit
        c = p.pop(m)
        rest = tuple(f for f in m if f[0] != atom)
        base = _to_poly(atom)
        term = {rest: c}
        for _ in range(e):
            term = _poly_mul(term, base)
        p = _poly_add(p, term)


def _atom(e: Expr, exp: int = 1) -> Poly:
    return {((e, exp),): Fraction(1)}


def _pow_int(base: Poly, n: int, node: Expr) -> Poly:
    if n == 0:
        return {(): Fraction(1)}
    if len(base) == 1:
        (m, c), = base.items()
        if c == 0 or (n < 0 and c == 0):
            return _atom(node)
        return {tuple((a, e * n) for a, e in m): Fraction(c) ** n}
    if not base:
        return {} if n > 0 else _atom(node)
    if 0 < n <= EXPAND_MAX:
        out = {(): Fraction(1)}
        for _ in range(n):
            out = _poly_mul(out, base)
        return out
    return _atom(from_poly(base), n)


def _sum_as_atom(p: Poly) -> Poly:
    return _atom(from_poly(p)) if len(p) > 1 else p


def _to_poly(e: Expr) -> Poly:
    if isinstance(e, Num):
        return {(): e.value} if e.value != 0 else {}
    if not is_app(e) or e.op not in ARITH:
        return _atom(e)
    op, args = e.op, e.args
    if op == "+":
        out: Poly = {}
        for a in args:
            out = _poly_add(out, _to_poly(a))
        return _settle(out)
    if op == "-":
        if len(args) == 1:
            return {m: -c for m, c in _to_poly(args[0]).items()}
        return _settle(_poly_add(_to_poly(args[0]), _to_poly(args[1]), -1))
    if op in ("*", "/"):
        # sums enter as atoms so that a sum and its inverse cancel before expansion
        factors = [_sum_as_atom(_to_poly(a)) for a in args]
        if op == "/":
            if not factors[1]:
                return _atom(e)
            factors[1] = _pow_int(factors[1], -1, e)
        out = {(): Fraction(1)}
        for f in factors:
            out = _poly_mul_raw(out, f)
        return _settle(out)
    # "^"
    b, p = args
    if isinstance(p, Num) and p.value.denominator == 1:
        return _settle(_pow_int(_to_poly(b), p.value.numerator, e))
    return _atom(e)


def _factor_expr(atom: Expr, e: int) -> Expr:
    return atom if e == 1 else App("^", [atom, Num(e)])


def from_poly(p: Poly) -> Expr:
    terms = []
    for m in sorted(p, key=lambda m: tuple((a.sort_key, e) for a, e in m)):
        c = p[m]
        factors = [_factor_expr(a, e) for a, e in m]
        if not factors:
            terms.append(Num(c))
        elif c == 1:
            terms.append(factors[0] if len(factors) == 1 else App("*", factors))
        else:
            terms.append(App("*", [Num(c)] + factors))
    if not terms:
        return ZERO
    return terms[0] if len(terms) == 1 else App("+", terms)


def ring_normal(e: Expr) -> Expr:
    return from_poly(_to_poly(e))


def is_ring_node(e: Expr) -> bool:
    if not is_app(e) or e.op not in ARITH:
        return False
    return e.op != "^" or (isinstance(e.args[1], Num) and e.args[1].value.denominator == 1)


def monomial(e: Expr) -> tuple[Fraction, Mono] | None:
    p = _to_poly(e)
    if len(p) != 1:
        return None
    (m, c), = p.items()
    return c, m


def negate(e: Expr) -> Expr:
    return from_poly({m: -c for m, c in _to_poly(e).items()})


def difference_sign(a: Expr, b: Expr, asm: Assumptions) -> str | None:
    return sign(ring_normal(App("+", [a, App("*", [Num(-1), b])])), asm)


# -- pattern matching ------------------------------------------------------------

def is_var(p: Expr) -> bool:
    return isinstance(p, Sym) and p.name.startswith("_")


def match(pattern: Expr, e: Expr, bind: dict | None = None) -> dict | None:
    bind = {} if bind is None else bind
    if is_var(pattern):
        if pattern.name in bind:
            return bind if bind[pattern.name] == e else None
        bind[pattern.name] = e
        return bind
    if isinstance(pattern, App):
        if not isinstance(e, App) or e.op != pattern.op or len(e.args) != len(pattern.args):
            return None
        for p, a in zip(pattern.args, e.args):
            if match(p, a, bind) is None:
                return None
        return bind
    return bind if pattern == e else None


def instantiate(template: Expr, bind: Mapping[str, Expr]) -> Expr:
    if is_var(template):
        return bind[template.name]
    if isinstance(template, App):
        return App(template.op, [instantiate(a, bind) for a in template.args])
    return template


# -- rules -----------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    name: str
    lhs: Expr | None = None
    rhs: Expr | None = None
    cond: Callable | None = None  # (bindings, assumptions) -> bool
    fn: Callable | None = None  # (expr, assumptions) -> Expr | None
    doc: str = ""

    def apply(self, e: Expr, asm: Assumptions) -> Expr | None:
        if self.fn is not None:
            out = self.fn(e, asm)
        else:
            bind = match(self.lhs, e)
            if bind is None or (self.cond is not None and not self.cond(bind, asm)):
                return None
            out = instantiate(self.rhs, bind)
        return None if out is None or out == e else out


def _pattern(name, lhs, rhs, cond=None, doc=""):
    return Rule(name, parse(lhs), parse(rhs), cond, None, doc)


def _unfold(e, asm):
    if isinstance(e, Sym) and e.name in asm.definitions:
        return asm.definitions[e.name]
    return None


def _isqrt_fraction(v: Fraction) -> Fraction | None:
    if v < 0:
        return None
    n, d = math.isqrt(v.numerator), math.isqrt(v.denominator)
    return Fraction(n, d) if n * n == v.numerator and d * d == v.denominator else None


def _const_fold(e, asm):
    if not is_app(e) or not e.args or not all(isinstance(a, Num) for a in e.args):
        return None
    v = [a.value for a in e.args]
    op = e.op
    if op == "abs":
        return Num(abs(v[0]))
    if op == "min":
        return Num(min(v))
    if op == "max":
        return Num(max(v))
    if op == "sqrt":
        r = _isqrt_fraction(v[0])
        return Num(r) if r is not None else None
    if v[0] == 0 and op in ("sinh", "tanh", "arcsinh", "sin"):
        return ZERO
    if v[0] == 0 and op in ("cosh", "cos"):
        return ONE
    return None


def _ring(e, asm):
    if not is_ring_node(e):
        return None
    return ring_normal(e)


def _sqrt_power(e, asm):
    if not (is_app(e, "^") and is_app(e.args[0], "sqrt") and isinstance(e.args[1], Num)):
        return None
    n = e.args[1].value
    if n.denominator != 1 or n in (0, 1):
        return None
    n = n.numerator
    x = e.args[0].args[0]
    if n % 2 == 0:
        return App("^", [x, Num(n // 2)])
    return App("*", [App("^", [x, Num((n - 1) // 2)]), e.args[0]])


def _pow_halfint(e, asm):
    if not (is_app(e, "^") and isinstance(e.args[1], Num) and e.args[1].value.denominator == 2):
        return None
    k = (e.args[1].value.numerator - 1) // 2
    root = App("sqrt", [e.args[0]])
    return root if k == 0 else App("*", [App("^", [e.args[0], Num(k)]), root])


def _undefined(e, asm):
    if not is_app(e) or e.op in ("piecewise", "undefined"):
        return None
    a = e.args
    if any(is_app(x, "undefined") for x in a):
        return UNDEFINED
    if e.op == "^" and is_num(a[0], 0) and isinstance(a[1], Num) and a[1].value < 0:
        return UNDEFINED
    if e.op == "/" and is_num(a[1], 0):
        return UNDEFINED
    if e.op == "sqrt" and isinstance(a[0], Num) and a[0].value < 0:
        return UNDEFINED
    return None


def _sqrt_coef(e, asm):
    if not is_app(e, "sqrt"):
        return None
    mono = monomial(e.args[0])
    if mono is None or not mono[1]:
        return None
    c, m = mono
    r = _isqrt_fraction(c) if c > 0 else None
    if r is None or r == 1:
        return None
    return App("*", [Num(r), App("sqrt", [from_poly({m: Fraction(1)})])])


def _sqrt_square(e, asm):
    if not is_app(e, "sqrt"):
        return None
    mono = monomial(e.args[0])
    if mono is None or mono[0] != 1 or not mono[1] or any(k % 2 for _, k in mono[1]):
        return None
    return App("abs", [from_poly({tuple((a, k // 2) for a, k in mono[1]): Fraction(1)})])


def _abs_sign(e, asm):
    if not is_app(e, "abs"):
        return None
    s = sign(e.args[0], asm)
    if _nonneg(s):
        return e.args[0]
    if _nonpos(s):
        return negate(e.args[0])
    return None


def _abs_neg(e, asm):
    if not is_app(e, "abs"):
        return None
    mono = monomial(e.args[0])
    if mono is None or mono[0] >= 0 or not mono[1]:
        return None
    return App("abs", [negate(e.args[0])])


def _minmax_sort(e, asm):
    if not (is_app(e, "min") or is_app(e, "max")):
        return None
    flat: list[Expr] = []
    for a in e.args:
        flat.extend(a.args if is_app(a, e.op) else [a])
    uniq = sorted(set(flat))
    if len(uniq) == 1:
        return uniq[0]
    return App(e.op, uniq)


def _minmax_resolve(e, asm):
    if not (is_app(e, "min") or is_app(e, "max")):
        return None
    keep = list(e.args)
    for i, a in enumerate(e.args):
        for j, b in enumerate(e.args):
            if i == j or a not in keep or b not in keep:
                continue
            s = difference_sign(b, a, asm)  # sign of b - a
            if s is None:
                continue
            if e.op == "min" and _nonneg(s):
                keep.remove(b)
            elif e.op == "max" and _nonpos(s):
                keep.remove(b)
    if len(keep) == len(e.args):
        return None
    return keep[0] if len(keep) == 1 else App(e.op, keep)


_ODD = ("sinh", "tanh", "arcsinh", "sin")
_EVEN = ("cosh", "cos")


def _odd_even(e, asm):
    if not (is_app(e) and e.op in _ODD + _EVEN):
        return None
    mono = monomial(e.args[0])
    if mono is None or mono[0] >= 0:
        return None
    inner = App(e.op, [negate(e.args[0])])
    return inner if e.op in _EVEN else App("*", [Num(-1), inner])


# derivatives: (d expr var)

def _d(e, x):
    return App("d", [e, x])


def _d_const(e, asm):
    if not is_app(e, "d") or not isinstance(e.args[1], Sym):
        return None
    return ZERO if e.args[1].name not in symbols(e.args[0]) else None


def _d_var(e, asm):
    if is_app(e, "d") and isinstance(e.args[1], Sym) and e.args[0] == e.args[1]:
        return ONE
    return None


def _d_add(e, asm):
    if not (is_app(e, "d") and is_app(e.args[0], "+")):
        return None
    return App("+", [_d(a, e.args[1]) for a in e.args[0].args])


def _d_mul(e, asm):
    if not (is_app(e, "d") and is_app(e.args[0], "*")):
        return None
    fs = e.args[0].args
    terms = []
    for i in range(len(fs)):
        terms.append(App("*", list(fs[:i]) + [_d(fs[i], e.args[1])] + list(fs[i + 1:])))
    return App("+", terms)


def _d_pow(e, asm):
    if not (is_app(e, "d") and is_app(e.args[0], "^")):
        return None
    b, p = e.args[0].args
    x = e.args[1]
    if x.name in symbols(p):
        return None
    return App("*", [p, App("^", [b, App("+", [p, Num(-1)])]), _d(b, x)])


_CHAIN = {
    "sqrt": "(* 1/2 (^ (sqrt _f) -1))",
    "sinh": "(cosh _f)",
    "cosh": "(sinh _f)",
    "tanh": "(+ 1 (* -1 (^ (tanh _f) 2)))",
    "arcsinh": "(^ (sqrt (+ 1 (^ _f 2))) -1)",
    "sin": "(cos _f)",
    "cos": "(* -1 (sin _f))",
}
_CHAIN_PARSED = {k: parse(v) for k, v in _CHAIN.items()}


def _d_chain(e, asm):
    if not (is_app(e, "d") and is_app(e.args[0]) and e.args[0].op in _CHAIN):
        return None
    f = e.args[0].args[0]
    outer = instantiate(_CHAIN_PARSED[e.args[0].op], {"_f": f})
    return App("*", [outer, _d(f, e.args[1])])


def _d_piecewise(e, asm):
    if not (is_app(e, "d") and is_app(e.args[0], "piecewise")):
        return None
    a = e.args[0].args
    out = []
    for c, v in zip(a[::2], a[1::2]):
        out += [c, _d(v, e.args[1])]
    return App("piecewise", out)


def _d_vec(e, asm):
    if not (is_app(e, "d") and is_app(e.args[0], "vec")):
        return None
    return App("vec", [_d(a, e.args[1]) for a in e.args[0].args])


# relations and logic

def _decide(op: str, s: str | None) -> Expr | None:
    if s is None:
        return None
    if op == "<":
        return TRUE if s == NEG else FALSE if _nonneg(s) else None
    if op == "<=":
        return TRUE if _nonpos(s) else FALSE if s == POS else None
    if op == ">":
        return TRUE if s == POS else FALSE if _nonpos(s) else None
    if op == ">=":
        return TRUE if _nonneg(s) else FALSE if s == NEG else None
    return TRUE if s == ZER else FALSE if _nonzero(s) else None


def _rel_decide(e, asm):
    if not (is_app(e) and e.op in RELATIONS):
        return None
    return _decide(e.op, difference_sign(e.args[0], e.args[1], asm))


_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}


def _rel_assumed(e, asm):
    if not (is_app(e) and e.op in RELATIONS):
        return None
    flipped = App(_FLIP[e.op], [e.args[1], e.args[0]])
    return TRUE if e in asm.facts or flipped in asm.facts else None


def _rel_cancel(e, asm):
    if not (is_app(e) and e.op in RELATIONS):
        return None
    ma, mb = monomial(e.args[0]), monomial(e.args[1])
    if ma is None or mb is None or ma[0] == 0 or not mb[1]:
        return None
    if sign(e.args[1], asm) != POS:
        return None
    q = _mono_mul(ma[1], tuple((a, -k) for a, k in mb[1]))
    c = Fraction(ma[0]) / mb[0]
    pos = tuple((a, k) for a, k in q if k > 0)
    neg = tuple((a, -k) for a, k in q if k < 0)
    P = from_poly({pos: c})
    N = from_poly({neg: Fraction(1)})
    if sign(N, asm) != POS:
        return None
    return App(e.op, [P, N])


def _and(e, asm):
    if not is_app(e, "and"):
        return None
    flat: list[Expr] = []
    for a in e.args:
        flat.extend(a.args if is_app(a, "and") else [a])
    if FALSE in flat:
        return FALSE
    rest = sorted(set(a for a in flat if a != TRUE))
    if not rest:
        return TRUE
    return rest[0] if len(rest) == 1 else App("and", rest)


_REAL_SPLIT = ("+", "-", "*", "/", "min", "max", "abs", "sinh", "cosh", "tanh", "arcsinh", "sin", "cos", "vec")


def _real(e, asm):
    if not is_app(e, "real"):
        return None
    x = e.args[0]
    if isinstance(x, Num):
        return TRUE
    if isinstance(x, Sym):
        ok = any(asm.has(x.name, p) for p in ("real", "positive", "nonnegative", "negative"))
        return TRUE if ok else None
    if x.op in _REAL_SPLIT:
        return App("and", [App("real", [a]) for a in x.args])
    if x.op == "^" and isinstance(x.args[1], Num) and x.args[1].value.denominator == 1:
        return App("real", [x.args[0]])
    if x.op == "sqrt":
        return App(">=", [x.args[0], ZERO])
    return None


def _pw_select(e, asm):
    if is_app(e, "piecewise") and e.args[0] == TRUE:
        return e.args[1]
    return None


def _pw_drop(e, asm):
    if not is_app(e, "piecewise"):
        return None
    a = e.args
    pairs = [(c, v) for c, v in zip(a[::2], a[1::2]) if c != FALSE]
    if len(pairs) == len(a) // 2:
        return None
    if not pairs:
        return App("undefined", [])
    return App("piecewise", [x for p in pairs for x in p])


def _proc(name, fn, doc):
    return Rule(name, fn=fn, doc=doc)


RULES: list[Rule] = [
    _proc("undefined", _undefined, "division by zero and roots of negative numbers are undefined"),
    _proc("unfold", _unfold, "replace a defined symbol by its definition"),
    _proc("const_fold", _const_fold, "evaluate exact numeric applications"),
    _proc("ring", _ring, "canonical sum of Laurent monomials"),
    _proc("pow_halfint", _pow_halfint, "half-integer powers through sqrt"),
    _proc("sqrt_power", _sqrt_power, "integer powers of a square root"),
    _proc("sqrt_coef", _sqrt_coef, "pull a square rational coefficient out of sqrt"),
    _proc("sqrt_square", _sqrt_square, "sqrt of an even monomial is an absolute value"),
    _proc("abs_sign", _abs_sign, "resolve abs by the sign oracle"),
    _proc("abs_neg", _abs_neg, "abs(-m) = abs(m)"),
    _proc("minmax_sort", _minmax_sort, "flatten, deduplicate and order min/max arguments"),
    _proc("minmax_resolve", _minmax_resolve, "drop min/max arguments dominated by the sign oracle"),
    _pattern("sinh_arcsinh", "(sinh (arcsinh _x))", "_x"),
    _pattern("arcsinh_sinh", "(arcsinh (sinh _x))", "_x"),
    _proc("odd_even", _odd_even, "odd and even functions of a negated monomial"),
    _proc("d_const", _d_const, "derivative of an expression free of the variable"),
    _proc("d_var", _d_var, "derivative of the variable itself"),
    _proc("d_add", _d_add, "linearity"),
    _proc("d_mul", _d_mul, "product rule"),
    _proc("d_pow", _d_pow, "power rule with a constant exponent"),
    _proc("d_chain", _d_chain, "chain rule for catalog functions"),
    _proc("d_piecewise", _d_piecewise, "branchwise derivative away from guards"),
    _proc("d_vec", _d_vec, "componentwise derivative"),
    _proc("rel_assumed", _rel_assumed, "relation given as an assumption"),
    _proc("rel_decide", _rel_decide, "decide a relation from the sign of the difference"),
    _proc("rel_cancel", _rel_cancel, "cancel a positive monomial from both sides"),
    _proc("and", _and, "flatten and simplify conjunctions"),
    _proc("real", _real, "realness of an expression"),
    _proc("pw_select", _pw_select, "first true guard selects its branch"),
    _proc("pw_drop", _pw_drop, "drop branches with false guards"),
]
RULE_INDEX = {r.name: r for r in RULES}


def first_applicable(e: Expr, asm: Assumptions) -> tuple[Rule, Expr] | None:
    for r in RULES:
        out = r.apply(e, asm)
        if out is not None:
            return r, out
    return None
