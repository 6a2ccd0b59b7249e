"""Deterministic CSV/JSON writers and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, complex):
        return repr(v)
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(experiment: str, params: dict) -> str:
    blob = json.dumps({"experiment": experiment, "params": jsonable(params)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunManifest:
    experiment: str
    config_sha256: str
    seeds: list
    version: str = __version__
    files: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def write(self, out: Path) -> None:
        write_json(out / "manifest.json", vars(self))

    @classmethod
    def read(cls, out: Path) -> "RunManifest":
        with open(out / "manifest.json") as fh:
            d = json.load(fh)
        return cls(**d)


def write_result(result, params: dict, out: Path, seeds: list) -> RunManifest:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, table in result.tables.items():
        fname = f"{name}.csv"
        write_csv(out / fname, table.header, table.rows)
        files.append(fname)
    summary = {"experiment": result.experiment, "passed": result.passed, **result.summary}
    write_json(out / "summary.json", summary)
    files.append("summary.json")
    man = RunManifest(result.experiment, config_hash(result.experiment, params), seeds,
                      files=sorted(files), params=jsonable(params))
    man.write(out)
    return man


def emit_plotdata(run_dirs, out_file: Path) -> int:
    """Merge run CSVs into ``experiment,series,x,y`` rows; returns the row count.

    ``x`` is the first column and ``y`` the last; ``series`` is
    ``<config hash prefix>:<table name>``.  Runs are merged in
    ``(config hash, seeds)`` order whatever order they are given in.
    """
    rows = []
    runs = sorted(((RunManifest.read(Path(d)), Path(d)) for d in run_dirs),
                  key=lambda md: (md[0].config_sha256, md[0].seeds))
    for man, d in runs:
        for fname in man.files:
            if not fname.endswith(".csv"):
                continue
            with open(d / fname, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header is None or len(header) < 2:
                    raise ValueError(f"{d / fname}: need at least two columns")
                series = f"{man.config_sha256[:8]}:{fname[:-4]}"
                for i, r in enumerate(reader, start=2):
                    if len(r) != len(header):
                        raise ValueError(f"{d / fname}:{i}: expected {len(header)} fields, got {len(r)}")
                    try:
                        x, y = float(r[0]), float(r[-1])
                    except ValueError:
                        continue  # non-numeric rows (labels) are not plottable
                    rows.append((man.experiment, series, x, y))
    write_csv(Path(out_file), ("experiment", "series", "x", "y"), rows)
    return len(rows)
