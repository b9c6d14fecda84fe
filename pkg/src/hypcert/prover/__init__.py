"""Equational prover: rewriting to normal form, derivatives, limits and certificates."""

from .calculus import NotDifferentiable, UnsupportedLimit, diff, limit
from .checker import CheckResult, MalformedCertificate, check_certificate
from .engine import ProofCertificate, StepLimitExceeded, normal_form, prove_equal, simplify
from .expr import App, Expr, ExprError, Num, Sym, parse
from .rules import RULES, Assumptions
from .solver_props import prove_solver_properties

__all__ = [
    "App", "Assumptions", "CheckResult", "Expr", "ExprError", "MalformedCertificate", "NotDifferentiable",
    "Num", "ProofCertificate", "RULES", "StepLimitExceeded", "Sym", "UnsupportedLimit", "check_certificate",
    "diff", "limit", "normal_form", "parse", "prove_equal", "prove_solver_properties", "simplify",
]
