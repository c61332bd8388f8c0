"""
JSON and CSV readers/writers for result files.

Floats are written with repr() so values read back are bit-identical.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np

from ..types import Profile, StrategyLadder

PathLike = Union[str, Path]


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, default=_json_default)
        f.write("\n")
    return path


def read_json(path: PathLike) -> Any:
    with open(path, "r") as f:
        return json.load(f)


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return value


def write_csv(rows: Iterable[Dict[str, Any]], path: PathLike, columns: Sequence[str]) -> Path:
    """Write dict rows with a fixed column order; missing keys become empty cells."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, "r", newline="") as f:
        return list(csv.DictReader(f))


def profile_to_csv(profile: Profile, ladder: StrategyLadder, path: PathLike) -> Path:
    """(node_id, rate_exponent) rows; rate 0 is written as "zero"."""
    rows = ({"node_id": u, "rate_exponent": ladder.exponent_label(i)} for u, i in enumerate(profile.idx))
    return write_csv(rows, path, ["node_id", "rate_exponent"])


def profile_from_csv(path: PathLike, ladder: StrategyLadder) -> Profile:
    rows = read_csv(path)
    idx = [0] * len(rows)
    for row in rows:
        u = int(row["node_id"])
        if not 0 <= u < len(rows):
            raise ValueError(f"Node id {u} in {path} is outside 0..{len(rows) - 1}")
        idx[u] = ladder.index_from_label(row["rate_exponent"])
    return Profile(tuple(idx))


TRACE_COLUMNS = ["iteration", "mover", "old_idx", "new_idx", "gain", "objective_after"]


def trace_to_csv(trace: Iterable[Any], path: PathLike) -> Path:
    """Write TraceEntry rows."""
    return write_csv((entry.to_dict() for entry in trace), path, TRACE_COLUMNS)
