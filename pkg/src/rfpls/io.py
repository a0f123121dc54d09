"""CSV and JSON readers/writers for curves, flags, bands and fitted models."""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .bootstrap import PredictionBand
from .exceptions import InvalidArgumentError, ParseError
from .fflr import FflrModel
from .funcdata import FunctionalSample, Grid

PathLike = Union[str, "os.PathLike[str]"]
FLOAT_FORMAT = "%.17g"


def _fmt(values: Iterable[float]) -> list:
    return [FLOAT_FORMAT % v for v in values]


def _data_rows(path: PathLike):
    """Yield ``(line_number, fields)`` for non-blank, non-comment lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip() or raw.lstrip().startswith("#"):
                continue
            yield lineno, next(csv.reader([raw]))


def _comments(path: PathLike) -> list:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip()[1:].strip() for ln in fh if ln.lstrip().startswith("#")]


def _floats(fields, path, lineno):
    try:
        vals = np.array([float(f) for f in fields], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"non-numeric value ({exc})", path, lineno) from None
    if not np.all(np.isfinite(vals)):
        raise ParseError("non-finite value", path, lineno)
    return vals


def read_curves(path: PathLike, label: Optional[str] = None) -> FunctionalSample:
    """Read a curve file: header ``grid,<points>`` then one ``<id>,<values>`` row per curve."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise ParseError("file not found", path)
    rows = _data_rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError("empty file", path) from None
    if not header or header[0].strip().lower() != "grid":
        raise ParseError("header must start with 'grid'", path, lineno)
    points = _floats(header[1:], path, lineno)
    try:
        grid = Grid(points)
    except InvalidArgumentError as exc:
        raise ParseError(str(exc), path, lineno) from None
    ids, values = [], []
    for lineno, fields in rows:
        if len(fields) != len(points) + 1:
            raise ParseError(f"expected {len(points) + 1} fields, found {len(fields)}", path, lineno)
        ids.append(fields[0].strip())
        values.append(_floats(fields[1:], path, lineno))
    if not values:
        raise ParseError("no curves after the header", path)
    label = Path(path).stem if label is None else label
    return FunctionalSample(grid, np.vstack(values), label, tuple(ids))


def write_curves(path: PathLike, sample: FunctionalSample, comments: Iterable[str] = ()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["grid", *_fmt(sample.grid.points)])
        for cid, row in zip(sample.ids, sample.values):
            w.writerow([cid, *_fmt(row)])


def write_band(prefix: PathLike, band: PredictionBand, ids=None) -> tuple:
    """Write ``<prefix>_lower.csv`` and ``<prefix>_upper.csv``; returns both paths."""
    prefix = os.fspath(prefix)
    header = f"alpha={FLOAT_FORMAT % band.alpha},B={band.B}"
    paths = []
    for name, vals in (("lower", band.lower), ("upper", band.upper)):
        p = f"{prefix}_{name}.csv"
        write_curves(p, FunctionalSample(band.t_grid, vals, name, ids), [header])
        paths.append(p)
    return tuple(paths)


def read_band(lower_path: PathLike, upper_path: PathLike) -> PredictionBand:
    lo, up = read_curves(lower_path), read_curves(upper_path)
    if lo.grid != up.grid or lo.values.shape != up.values.shape:
        raise ParseError("lower and upper band files do not match", os.fspath(upper_path))
    meta = {}
    for c in _comments(lower_path):
        for part in c.split(","):
            if "=" in part:
                k, v = part.split("=", 1)
                meta[k.strip()] = v.strip()
    try:
        alpha, B = float(meta["alpha"]), int(meta["B"])
    except (KeyError, ValueError):
        raise ParseError("band header must carry alpha and B", os.fspath(lower_path)) from None
    return PredictionBand(lo.grid, lo.values, up.values, alpha, B)


def write_flags(path: PathLike, flags, ids=None) -> None:
    flags = np.asarray(flags, dtype=bool)
    ids = ids if ids is not None else [str(i + 1) for i in range(flags.size)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "outlier"])
        for cid, f in zip(ids, flags):
            w.writerow([cid, int(f)])


def read_flags(path: PathLike) -> np.ndarray:
    path = os.fspath(path)
    rows = _data_rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError("empty file", path) from None
    if [h.strip() for h in header] != ["id", "outlier"]:
        raise ParseError("header must be 'id,outlier'", path, lineno)
    out = []
    for lineno, fields in rows:
        if len(fields) != 2 or fields[1].strip() not in ("0", "1"):
            raise ParseError("expected '<id>,0|1'", path, lineno)
        out.append(fields[1].strip() == "1")
    return np.array(out, dtype=bool)


def dump_json(path: PathLike, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def load_json(path: PathLike):
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseError("file not found", path) from None
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from None


def save_model(path: PathLike, model: FflrModel) -> None:
    dump_json(path, model.to_dict())


def load_model(path: PathLike) -> FflrModel:
    d = load_json(path)
    try:
        return FflrModel.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed model document ({exc})", os.fspath(path)) from None
