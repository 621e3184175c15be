"""Deterministic CSV/JSON emission.

Floats are always written with 17 significant digits so that identical runs
give byte-identical files; non-finite floats become null in JSON and "nan",
"inf", "-inf" in CSV.
"""

from __future__ import annotations

import enum
import json
import math
from pathlib import Path

import numpy as np


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, enum.Enum):
        return str(v.value)
    if v is None:
        return ""
    return str(v)


def to_json(obj, indent: int = 2) -> str:
    """JSON text with fixed float formatting; dict key order is preserved."""
    return _emit(obj, indent, 0) + "\n"


def _emit(obj, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, enum.Enum):
        obj = obj.value
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_emit(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _emit(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_json(path, obj) -> Path:
    return write_text(path, to_json(obj))


def write_csv(path, header, rows) -> Path:
    return write_text(path, to_csv(header, rows))


def trajectory_rows(traj):
    return zip(traj.r, traj.u, traj.v)


def write_trajectory_csv(path, traj) -> Path:
    return write_csv(path, ("r", "u", "v"), trajectory_rows(traj))


def events_record(traj) -> list:
    return [{"kind": e.kind.value, "r": e.r, "value": e.value, "index": e.index}
            for e in traj.events]


def write_events_json(path, traj) -> Path:
    return write_json(path, events_record(traj))
