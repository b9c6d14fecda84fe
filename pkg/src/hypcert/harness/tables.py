"""CSV/JSON tables: one row per architecture."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

from .. import _io
from .metrics import HEADER, MetricsRow

CONSERVATION_HEADER = ("architecture", "conservation_final", "conservation_total")


def error_table(rows: Sequence[MetricsRow]) -> list[list]:
    return [list(HEADER)] + [[r.architecture, r.l_inf_final, r.l2_final, r.l_inf_all, r.l2_all] for r in rows]


def conservation_table(rows: Sequence[MetricsRow]) -> list[list]:
    """Headline columns, plus one pair per component when there is more than one."""
    header = list(CONSERVATION_HEADER)
    comps = rows[0].components if rows else []
    per_comp = len(comps) > 1
    if per_comp:
        header += [f"conservation_final[{c}]" for c in comps] + [f"conservation_total[{c}]" for c in comps]
    out = [header]
    for r in rows:
        line = [r.architecture, r.conservation_final, r.conservation_total]
        if per_comp:
            line += list(r.conservation_final_by_component) + list(r.conservation_total_by_component)
        out.append(line)
    return out


def to_csv(table: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in table:
        w.writerow([_io.fmt17(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def emit_tables(rows: Sequence[MetricsRow], fmt: str = "csv") -> dict[str, str]:
    """``{"errors": text, "conservation": text}`` in the requested format."""
    tables = {"errors": error_table(rows), "conservation": conservation_table(rows)}
    if fmt == "csv":
        return {k: to_csv(t) for k, t in tables.items()}
    if fmt == "json":
        return {k: _io.dumps17([dict(zip(t[0], r)) for r in t[1:]]) + "\n" for k, t in tables.items()}
    raise ValueError(f"unknown table format {fmt!r}")


def write_tables(rows: Sequence[MetricsRow], out: str | Path, fmt: str = "csv") -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in emit_tables(rows, fmt).items():
        p = out / f"{name}.{fmt}"
        p.write_text(text)
        paths.append(p)
    return paths
