"""Random well-typed expressions of depth at most 12 for the property tests."""

from fractions import Fraction

from hypcert.prover.expr import App, Num, Sym

SYMS = ["x", "y", "z", "u"]
UNARY = ["sqrt", "abs", "sinh", "cosh", "arcsinh", "tanh", "sin", "cos", "-"]


def random_expr(rng, depth=None, budget=None):
    depth = depth if depth is not None else rng.randint(1, 12)
    budget = [budget if budget is not None else rng.randint(1, 40)]
    return _num(rng, depth, budget)


def _leaf(rng):
    if rng.random() < 0.4:
        return Num(Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2, 3])))
    return Sym(rng.choice(SYMS))


def _num(rng, d, b):
    b[0] -= 1
    if d <= 1 or b[0] <= 0 or rng.random() < 0.2:
        return _leaf(rng)
    k = rng.random()

    def sub():
        return _num(rng, d - 1, b)

    if k < 0.22:
        return App("+", [sub() for _ in range(rng.randint(2, 3))])
    if k < 0.42:
        return App("*", [sub() for _ in range(rng.randint(2, 3))])
    if k < 0.49:
        return App("-", [sub(), sub()])
    if k < 0.55:
        return App("/", [sub(), sub()])
    if k < 0.63:
        return App("^", [sub(), Num(rng.choice([-2, -1, 2, 3, Fraction(1, 2)]))])
    if k < 0.83:
        return App(rng.choice(UNARY), [sub()])
    if k < 0.90:
        return App(rng.choice(["min", "max"]), [sub(), sub()])
    if k < 0.95:
        return App("d", [sub(), Sym(rng.choice(SYMS))])
    guard = App(rng.choice(["<", "<="]), [sub(), sub()])
    return App("piecewise", [guard, sub(), Sym("true"), sub()])
