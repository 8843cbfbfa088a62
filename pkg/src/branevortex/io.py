"""On-disk formats: raw float64 field dumps, iteration CSV, report JSON.

A field dump is a pair of files: ``<name>.f64`` holding the values as
little-endian 64-bit floats in C (row-major) order for an array of shape
(nx, ny) indexed [ix, iy], and ``<name>.f64.json`` holding the metadata
{"nx", "ny", "Lx", "Ly", "name", "component"}.  All writers are
deterministic byte-for-byte for identical inputs.
"""

import csv
import json
from pathlib import Path

import numpy as np

FIELD_SUFFIX = ".f64"
HISTORY_HEADER = ("iter", "energy", "grad_norm", "step")


def write_field(directory, name: str, component: int, values: np.ndarray,
                grid) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    values = np.ascontiguousarray(values, dtype="<f8")
    if values.shape != (grid.nx, grid.ny):
        raise ValueError(
            f"field shape {values.shape} does not match grid "
            f"({grid.nx}, {grid.ny})")
    stem = f"{name}_{component}" if component else name
    path = directory / f"{stem}{FIELD_SUFFIX}"
    path.write_bytes(values.tobytes())
    meta = {"nx": grid.nx, "ny": grid.ny, "Lx": grid.Lx, "Ly": grid.Ly,
            "name": name, "component": component}
    sidecar = directory / f"{stem}{FIELD_SUFFIX}.json"
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n",
                       encoding="utf-8")
    return path


def read_field(path):
    """Load a dump written by :func:`write_field`; returns (values, meta)."""
    path = Path(path)
    meta = json.loads(Path(str(path) + ".json").read_text(encoding="utf-8"))
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    values = raw.reshape(meta["nx"], meta["ny"]).astype(float)
    return values, meta


def write_history_csv(path, history) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_HEADER)
        for i, e, g, s in history.rows():
            writer.writerow([i, repr(float(e)), repr(float(g)),
                             repr(float(s))])
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path


def write_decay_csv(path, r, log_usq, log_gradsq) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "log_usq", "log_gradsq"])
        for row in zip(r, log_usq, log_gradsq):
            writer.writerow([repr(float(v)) for v in row])
    return path
