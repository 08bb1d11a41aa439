"""Deterministic report serialization.

The numerical payload (resolved config, tool version, per-task results)
is serialized with sorted keys and canonical float repr, so identical
configurations reproduce identical bytes; wall-clock timings live in a
separate sidecar, never inside the payload.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and exotic floats."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if value != value:
            return "nan"
        if value in (float("inf"), float("-inf")):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    return obj


def payload_bytes(payload: dict) -> bytes:
    return json.dumps(
        to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False
    ).encode()


def write_payload(out_dir, task: str, config: dict, results: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "task": task,
        "tool_version": __version__,
        "config": config,
        "results": results,
    }
    path = out_dir / "payload.json"
    path.write_bytes(payload_bytes(payload))
    return path


def write_run_meta(out_dir, timings: dict, extra: dict | None = None) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {"timings_s": to_jsonable(timings)}
    if extra:
        meta.update(to_jsonable(extra))
    path = out_dir / "run_meta.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True))
    return path


def write_series_csv(out_dir, name: str, columns: dict[str, list]) -> Path:
    """Write one delimited series (column name -> values)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    keys = list(columns.keys())
    rows = zip(*(columns[k] for k in keys))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for row in rows:
            writer.writerow(
                [repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
            )
    return path


def read_series_csv(path) -> dict[str, list[float]]:
    with open(path) as fh:
        reader = csv.DictReader(fh)
        out: dict[str, list[float]] = {k: [] for k in reader.fieldnames}
        for row in reader:
            for k, v in row.items():
                try:
                    out[k].append(float(v))
                except ValueError:
                    out[k].append(v)
    return out
