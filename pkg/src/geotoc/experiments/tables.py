"""Tabular results with a manifest, written as CSV or JSON."""

import csv
import io
import json
import math
import platform
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..errors import InvalidInputError

FLOAT_FORMAT = ".12g"


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, str):
        return value
    return float(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def base_manifest(config_manifest=None, **extra):
    """Toolkit version, numeric library versions and the resolved run configuration."""
    out = {
        "toolkit_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "float_format": FLOAT_FORMAT,
    }
    if config_manifest is not None:
        out["config"] = config_manifest
    out.update(extra)
    return _jsonable(out)


@dataclass(frozen=True)
class ResultTable:
    """Named columns of numeric records plus a manifest of everything used to make them."""

    columns: tuple
    rows: tuple
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = tuple(self.columns)
        rows = tuple(tuple(_cell(v) for v in r) for r in self.rows)
        for r in rows:
            if len(r) != len(cols):
                raise InvalidInputError(f"row has {len(r)} cells, expected {len(cols)}")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([v if isinstance(v, (str, int)) else format(v, FLOAT_FORMAT) for v in r])
        return buf.getvalue()

    def to_json(self):
        doc = {
            "manifest": _jsonable(self.manifest),
            "columns": list(self.columns),
            "rows": [_jsonable(list(r)) for r in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"

    def write(self, path, fmt="csv"):
        """Write the table; CSV output gets a ``<path>.manifest.json`` sidecar."""
        if fmt == "json":
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.to_json())
            return [path]
        if fmt != "csv":
            raise InvalidInputError(f"unknown output format {fmt!r}")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())
        side = f"{path}.manifest.json"
        with open(side, "w", encoding="utf-8", newline="") as fh:
            json.dump(_jsonable(self.manifest), fh, indent=2, allow_nan=False)
            fh.write("\n")
        return [path, side]
