"""JSON helpers that print every float with 17 significant digits."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np


def fmt17(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def parse_float(v: Any) -> float:
    """Inverse of ``fmt17`` for values that came back through ``json.loads``."""
    if isinstance(v, str):
        return float(v)
    return float(v)


def dumps17(obj: Any, indent: int | None = 1, _level: int = 0) -> str:
    """Serialize ``obj`` to JSON text, floats at 17 significant digits.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt17(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ",".join(dumps17(v, None) for v in obj) + "]"
        items = [dumps17(v, indent, _level + 1) for v in obj]
        return "[" + pad + ("," + pad).join(items) + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + dumps17(v, indent, _level + 1) for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: str | Path, obj: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps17(obj) + "\n")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())
