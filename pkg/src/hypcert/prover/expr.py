"""Symbolic expressions and their parenthesized prefix wire format.

Atoms are exact rationals (``Num``) and identifiers (``Sym``); everything
else is an operator application (``App``).  Expressions are immutable and
compare by their canonical text, which is cached.
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

ARITY = {
    "+": (1, None), "*": (1, None), "-": (1, 2), "/": (2, 2), "^": (2, 2),
    "sqrt": (1, 1), "abs": (1, 1), "min": (2, None), "max": (2, None),
    "sinh": (1, 1), "cosh": (1, 1), "arcsinh": (1, 1), "tanh": (1, 1), "sin": (1, 1), "cos": (1, 1),
    "piecewise": (2, None), "d": (2, 2),
    "<": (2, 2), "<=": (2, 2), ">": (2, 2), ">=": (2, 2), "=": (2, 2),
    "and": (0, None), "real": (1, 1), "vec": (1, None),
    "inf": (1, 1), "undefined": (0, 0),
    # assumption forms
    "positive": (1, 1), "nonnegative": (1, 1), "negative": (1, 1), "nonzero": (1, 1), "define": (2, 2),
}
ARITH = frozenset({"+", "-", "*", "/", "^"})
RELATIONS = frozenset({"<", "<=", ">", ">=", "="})
UNARY_FUNCS = frozenset({"sqrt", "abs", "sinh", "cosh", "arcsinh", "tanh", "sin", "cos"})
RESERVED = frozenset({"true", "false"})


class ExprError(ValueError):
    pass


class Expr:
    __slots__ = ("_text", "_hash")

    def __eq__(self, other):
        return isinstance(other, Expr) and self.text == other.text

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return self.text

    def __str__(self):
        return self.text

    def __lt__(self, other: "Expr") -> bool:
        return self.sort_key < other.sort_key

    @property
    def text(self) -> str:
        return self._text

    @property
    def sort_key(self):
        # numbers first, then symbols, then applications; ties by text
        return (self.rank, self.text)

    rank = 3
    args: tuple = ()


class Num(Expr):
    __slots__ = ("value",)
    rank = 0

    def __init__(self, value):
        v = Fraction(value)
        self.value = v
        self._text = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        self._hash = hash(self._text)


class Sym(Expr):
    __slots__ = ("name",)
    rank = 1

    def __init__(self, name: str):
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ExprError(f"invalid symbol {name!r}")
        self.name = name
        self._text = name
        self._hash = hash(name)


class App(Expr):
    __slots__ = ("op", "args")
    rank = 2

    def __init__(self, op: str, args: Sequence[Expr] = ()):
        if op not in ARITY:
            raise ExprError(f"unknown operator {op!r}")
        lo, hi = ARITY[op]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ExprError(f"operator {op} takes {lo}..{hi or 'n'} arguments, got {len(args)}")
        if op == "piecewise" and len(args) % 2:
            raise ExprError("piecewise takes condition/value pairs")
        self.op = op
        self.args = tuple(args)
        for a in self.args:
            if not isinstance(a, Expr):
                raise ExprError(f"argument {a!r} is not an expression")
        self._text = "(" + " ".join([op] + [a.text for a in self.args]) + ")"
        self._hash = hash(self._text)


TRUE = Sym("true")
FALSE = Sym("false")
ZERO = Num(0)
ONE = Num(1)


def num(v) -> Num:
    return Num(v)


def sym(name: str) -> Sym:
    return Sym(name)


def app(op: str, *args) -> App:
    return App(op, [_lift(a) for a in args])


def _lift(a) -> Expr:
    if isinstance(a, Expr):
        return a
    if isinstance(a, (int, Fraction)):
        return Num(a)
    if isinstance(a, str):
        return parse(a)
    raise ExprError(f"cannot lift {a!r}")


def is_num(e: Expr, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def is_app(e: Expr, op: str | None = None) -> bool:
    return isinstance(e, App) and (op is None or e.op == op)


# -- wire format -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")
_NUMBER = re.compile(r"-?\d+(/\d+)?")


def parse(text: str) -> Expr:
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise ExprError("empty expression")
    pos = 0

    def read() -> Expr:
        nonlocal pos
        if pos >= len(tokens):
            raise ExprError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens) or tokens[pos] in "()":
                raise ExprError("application needs an operator")
            op = tokens[pos]
            pos += 1
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(read())
            if pos >= len(tokens):
                raise ExprError("missing ')'")
            pos += 1
            return App(op, args)
        if tok == ")":
            raise ExprError("unexpected ')'")
        if _NUMBER.fullmatch(tok):
            n, _, d = tok.partition("/")
            if d and int(d) == 0:
                raise ExprError("zero denominator")
            return Num(Fraction(int(n), int(d) if d else 1))
        return Sym(tok)

    e = read()
    if pos != len(tokens):
        raise ExprError("trailing tokens after expression")
    return e


# -- structure -------------------------------------------------------------------

def subterm(e: Expr, path: Sequence[int]) -> Expr:
    for i in path:
        if not isinstance(e, App) or not 0 <= i < len(e.args):
            raise ExprError(f"invalid position {list(path)}")
        e = e.args[i]
    return e


def replace_at(e: Expr, path: Sequence[int], new: Expr) -> Expr:
    if not path:
        return new
    if not isinstance(e, App) or not 0 <= path[0] < len(e.args):
        raise ExprError(f"invalid position {list(path)}")
    args = list(e.args)
    args[path[0]] = replace_at(args[path[0]], path[1:], new)
    return App(e.op, args)


def positions(e: Expr, path: tuple = ()) -> Iterator[tuple[tuple, Expr]]:
    """Post-order (children left to right, then the node)."""
    if isinstance(e, App):
        for i, a in enumerate(e.args):
            yield from positions(a, path + (i,))
    yield path, e


def symbols(e: Expr) -> set[str]:
    if isinstance(e, Sym):
        return set() if e in (TRUE, FALSE) else {e.name}
    if isinstance(e, App):
        out: set[str] = set()
        for a in e.args:
            out |= symbols(a)
        return out
    return set()


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Sym):
        return mapping.get(e.name, e)
    if isinstance(e, App):
        return App(e.op, [substitute(a, mapping) for a in e.args])
    return e


def size(e: Expr) -> int:
    return 1 + sum(size(a) for a in e.args) if isinstance(e, App) else 1


def depth(e: Expr) -> int:
    return 1 + max((depth(a) for a in e.args), default=0) if isinstance(e, App) else 1


# -- numeric evaluation (tests and diagnostics) ------------------------------------

class Undefined(ArithmeticError):
    pass


def evaluate(e: Expr, env: Mapping[str, complex | float], cstep: float = 1e-30):
    """Float (or complex) evaluation; ``d`` nodes use a complex-step derivative."""
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Sym):
        if e == TRUE:
            return True
        if e == FALSE:
            return False
        if e.name not in env:
            raise Undefined(f"unbound symbol {e.name}")
        return env[e.name]
    op, args = e.op, e.args
    if op == "d":
        var = args[1].name
        env2 = dict(env)
        env2[var] = env[var] + 1j * cstep
        val = evaluate(args[0], env2)
        if isinstance(val, tuple):
            return tuple(complex(x).imag / cstep for x in val)
        return complex(val).imag / cstep
    if op == "piecewise":
        for c, v in zip(args[::2], args[1::2]):
            if evaluate(c, env):
                return evaluate(v, env)
        raise Undefined("no piecewise branch applies")
    if op == "and":
        return all(evaluate(a, env) for a in args)
    vals = [evaluate(a, env) for a in args]
    try:
        return _apply(op, vals)
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise Undefined(str(exc)) from None


def _re(v):
    return v.real if isinstance(v, complex) else v


def _apply(op: str, v: list):
    if op == "+":
        return sum(v[1:], v[0])
    if op == "*":
        out = v[0]
        for x in v[1:]:
            out = out * x
        return out
    if op == "-":
        return -v[0] if len(v) == 1 else v[0] - v[1]
    if op == "/":
        if v[1] == 0:
            raise ZeroDivisionError("division by zero")
        return v[0] / v[1]
    if op == "^":
        b, p = v
        if b == 0 and _re(p) < 0:
            raise ZeroDivisionError("zero to a negative power")
        if float(_re(p)).is_integer() and not isinstance(p, complex):
            return b ** int(p)
        if _re(b) < 0:
            raise ValueError("negative base with fractional power")
        return b ** p
    if op == "sqrt":
        if _re(v[0]) < 0:
            raise ValueError("sqrt of a negative number")
        return cmath.sqrt(v[0]) if isinstance(v[0], complex) else math.sqrt(v[0])
    if op == "abs":
        if isinstance(v[0], complex):
            # analytic continuation away from zero, used only by complex-step checks
            return v[0] if v[0].real >= 0 else -v[0]
        return abs(v[0])
    if op in ("min", "max"):
        key = lambda x: _re(x)
        return (min if op == "min" else max)(v, key=key)
    lib = cmath if any(isinstance(x, complex) for x in v) else math
    if op == "sinh":
        return lib.sinh(v[0])
    if op == "cosh":
        return lib.cosh(v[0])
    if op == "tanh":
        return lib.tanh(v[0])
    if op == "arcsinh":
        return lib.asinh(v[0])
    if op == "sin":
        return lib.sin(v[0])
    if op == "cos":
        return lib.cos(v[0])
    if op in RELATIONS:
        a, b = _re(v[0]), _re(v[1])
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "=": a == b}[op]
    if op == "real":
        return True
    if op == "vec":
        return tuple(v)
    if op == "inf":
        return math.copysign(math.inf, v[0])
    raise ValueError(f"cannot evaluate operator {op}")
