"""Strictly monotone analytic maps used between learned stages.

Each map ``f`` has an exact inverse, a global Lipschitz constant ``1/C``
and a known image interval; ``f_inv(u)`` is the target the upstream
stage must learn so that ``f(f_inv(u)) = u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FORMS = ("arcsinh", "arctan", "tanh", "identity")


@dataclass(frozen=True)
class AnalyticMap:
    form: str
    C: float

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown analytic map {self.form!r}")
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ValueError("map parameter C must be positive and finite")

    @property
    def lipschitz(self) -> float:
        # every catalog map has f'(0) = 1/C as its maximal slope
        return 1.0 / self.C

    @property
    def image(self) -> tuple[float, float]:
        """Open image interval of ``f`` over the reals."""
        if self.form in ("arcsinh", "identity"):
            return (-math.inf, math.inf)
        half = (math.pi / 2 if self.form == "arctan" else 1.0) / self.C
        return (-half, half)

    def admits(self, lo: float, hi: float) -> bool:
        """Range containment: ``[lo, hi]`` lies strictly inside the image."""
        a, b = self.image
        return a < lo and hi < b

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        C = self.C
        if self.form == "arcsinh":
            return np.arcsinh(v) / C
        if self.form == "arctan":
            return np.arctan(v) / C
        if self.form == "tanh":
            return np.tanh(v) / C
        return v / C

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = (float(np.min(u)), float(np.max(u))) if u.size else (0.0, 0.0)
        if u.size and not self.admits(lo, hi):
            raise ValueError(f"values outside the image of {self.form}/{self.C}")
        C = self.C
        if self.form == "arcsinh":
            return np.sinh(C * u)
        if self.form == "arctan":
            return np.tan(C * u)
        if self.form == "tanh":
            return np.arctanh(C * u)
        return C * u

    def derivative(self, v):
        v = np.asarray(v, dtype=float)
        C = self.C
        if self.form == "arcsinh":
            return 1.0 / (C * np.sqrt(1.0 + v * v))
        if self.form == "arctan":
            return 1.0 / (C * (1.0 + v * v))
        if self.form == "tanh":
            return (1.0 - np.tanh(v) ** 2) / C
        return np.full_like(v, 1.0 / C)

    def to_dict(self) -> dict:
        return {"form": self.form, "C": self.C}

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyticMap":
        return cls(d["form"], float(d["C"]))
