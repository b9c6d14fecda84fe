"""Error and conservation metrics of a predicted frame series against the reference.

Normalizers: L-infinity errors are divided by max |reference| over the
predicted frames, L2 errors by the root-mean-square of the per-frame discrete
L2 norms of the reference, and conservation errors by the cell volume (so they
are plain sums over cells).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..fv import FrameSeries

HEADER = ("architecture", "l_inf_final", "l2_final", "l_inf_all", "l2_all")


class GridMismatch(ValueError):
    pass


@dataclass
class MetricsRow:
    architecture: str
    l_inf_final: float
    l2_final: float
    l_inf_all: float
    l2_all: float
    conservation_final: float  # headline component
    conservation_total: float
    components: list[str] = field(default_factory=list)
    conservation_final_by_component: list[float] = field(default_factory=list)
    conservation_total_by_component: list[float] = field(default_factory=list)

    def __post_init__(self):
        vals = (self.l_inf_final, self.l2_final, self.l_inf_all, self.l2_all,
                self.conservation_final, self.conservation_total)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("metrics must be finite")
        if self.l_inf_final < 0 or self.l_inf_all < 0:
            raise ValueError("L-infinity errors cannot be negative")

    def to_dict(self) -> dict:
        return {"architecture": self.architecture, "l_inf_final": self.l_inf_final, "l2_final": self.l2_final,
                "l_inf_all": self.l_inf_all, "l2_all": self.l2_all,
                "conservation_final": self.conservation_final, "conservation_total": self.conservation_total,
                "components": list(self.components),
                "conservation_final_by_component": list(self.conservation_final_by_component),
                "conservation_total_by_component": list(self.conservation_total_by_component)}

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsRow":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def _l2(a: np.ndarray, dv: float) -> np.ndarray:
    """Discrete L2 norm per frame; ``a`` has shape ``(K, cells...)``."""
    return np.sqrt(np.sum(a.reshape(len(a), -1) ** 2, axis=1) * dv)


def compute_metrics(reference: FrameSeries, predicted: FrameSeries, train_cutoff: int,
                    architecture: str = "", headline: int = 0, components=None) -> MetricsRow:
    """Metrics over frames ``train_cutoff + 1 ..`` (the frames the model did not see)."""
    if reference.grid != predicted.grid or reference.frames.shape != predicted.frames.shape:
        raise GridMismatch("reference and prediction live on different grids")
    if not np.array_equal(reference.times, predicted.times):
        raise GridMismatch("reference and prediction have different frame times")
    k0 = train_cutoff + 1
    if not 0 < k0 < len(reference):
        raise ValueError("train cutoff leaves no predicted frames")
    dv = reference.grid.cell_volume
    ref = reference.frames[k0:]
    diff = predicted.frames[k0:] - ref
    r, d = ref[:, headline], diff[:, headline]

    n_inf = float(np.max(np.abs(r))) or 1.0
    n_2 = float(np.sqrt(np.mean(_l2(r, dv) ** 2))) or 1.0
    per_frame_inf = np.max(np.abs(d.reshape(len(d), -1)), axis=1)
    per_frame_l2 = _l2(d, dv)
    # sum over cells of the signed difference, per component and frame
    cons = diff.reshape(diff.shape[0], diff.shape[1], -1).sum(axis=2)
    m = reference.frames.shape[1]
    return MetricsRow(
        architecture,
        float(per_frame_inf[-1] / n_inf), float(per_frame_l2[-1] / n_2),
        float(np.max(per_frame_inf) / n_inf), float(np.mean(per_frame_l2) / n_2),
        float(cons[-1, headline]), float(np.sum(cons[:, headline])),
        list(components) if components is not None else [f"u{i}" for i in range(m)],
        [float(v) for v in cons[-1]], [float(v) for v in cons.sum(axis=0)])


def scaled_sup_error(reference: FrameSeries, predicted: FrameSeries, u_min: float, u_max: float,
                     component: int = 0) -> float:
    """Sup over every frame of |prediction - reference| on the scale ``(u - u_min)/(u_max - u_min)``."""
    span = u_max - u_min if u_max > u_min else 1.0
    return float(np.max(np.abs(predicted.frames[:, component] - reference.frames[:, component])) / span)
