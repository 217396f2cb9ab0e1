"""File formats.

Outlines: ``.csv`` with rows ``x,y`` (an optional header row is skipped) or
``.json`` holding an array of ``[x, y]`` pairs. Star functions and sketches
are JSON records; sketches also have a compact binary form (``.sketch``).
An index is a directory with ``manifest.json`` plus one binary sketch file
per entry.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Union

import numpy as np

from .analysis import SketchIndex
from .errors import InputError
from .geometry import Outline, StandardizedOutline, StarFunction
from .sketch import PhiSpec, Sketch

PathLike = Union[str, Path]

MANIFEST = "manifest.json"
SKETCH_SUFFIX = ".sketch"


def _read_text(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror or exc})") from exc


def _drop_closing_vertex(pts: np.ndarray) -> np.ndarray:
    if len(pts) > 3 and np.array_equal(pts[0], pts[-1]):
        return pts[:-1]
    return pts


def _parse_csv(path: Path) -> np.ndarray:
    rows = []
    for lineno, row in enumerate(csv.reader(_read_text(path).splitlines()), start=1):
        cells = [c.strip() for c in row]
        if not cells or not any(cells) or cells[0].startswith("#"):
            continue
        if len(cells) != 2:
            raise InputError(f"{path}:{lineno}: expected 'x,y', got {','.join(row)!r}")
        try:
            rows.append((float(cells[0]), float(cells[1])))
        except ValueError:
            if not rows and lineno == 1:
                continue  # header
            raise InputError(f"{path}:{lineno}: non-numeric row {','.join(row)!r}") from None
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


def _parse_point_list(data, path: Path) -> np.ndarray:
    try:
        pts = np.array(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: outline must be an array of [x, y] pairs") from exc
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError(f"{path}: outline must be an array of [x, y] pairs")
    return pts


def read_json(path: Path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_outline(path: PathLike) -> Outline:
    """Read an outline file, picking the parser from the extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".csv":
        pts = _parse_csv(path)
    elif suffix == ".json":
        data = read_json(path)
        if isinstance(data, dict) and "points" in data:
            data = data["points"]
        pts = _parse_point_list(data, path)
    else:
        raise InputError(f"{path}: unsupported outline format {suffix!r} (use .csv or .json)")
    try:
        return Outline(_drop_closing_vertex(pts))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def save_outline_csv(points, path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for x, y in np.asarray(points):
            writer.writerow([repr(float(x)), repr(float(y))])


def standardized_to_dict(shape: StandardizedOutline) -> dict:
    return {
        "points": shape.points.tolist(),
        "centroid": list(shape.centroid),
        "scale": shape.scale,
    }


def standardized_from_dict(data: dict) -> StandardizedOutline:
    return StandardizedOutline(data["points"], tuple(data.get("centroid", (0.0, 0.0))), data.get("scale", 1.0))


def write_json(obj, path: PathLike) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def save_sketch(sk: Sketch, path: PathLike) -> None:
    path = Path(path)
    if path.suffix == SKETCH_SUFFIX:
        path.write_bytes(sk.to_bytes())
    else:
        write_json(sk.to_dict(), path)


def load_sketch(path: PathLike) -> Sketch:
    path = Path(path)
    if path.suffix == SKETCH_SUFFIX:
        try:
            return Sketch.from_bytes(path.read_bytes())
        except OSError as exc:
            raise InputError(f"{path}: cannot read ({exc})") from exc
    data = read_json(path)
    if not isinstance(data, dict) or "phi" not in data:
        raise InputError(f"{path}: not a sketch record")
    return Sketch.from_dict(data)


def load_star_function(path: PathLike) -> StarFunction:
    data = read_json(Path(path))
    if not isinstance(data, dict):
        raise InputError(f"{path}: not a star function record")
    return StarFunction.from_dict(data)


def sniff(path: PathLike) -> str:
    """Classify a file as ``outline``, ``standardized``, ``star``, or ``sketch``."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == SKETCH_SUFFIX:
        return "sketch"
    if suffix == ".csv":
        return "outline"
    if suffix != ".json":
        raise InputError(f"{path}: unknown file type {suffix!r}")
    data = read_json(path)
    if isinstance(data, list):
        return "outline"
    if isinstance(data, dict):
        if "phi" in data:
            return "sketch"
        if "points" in data:
            return "standardized"
        if "values" in data:
            return "star"
    raise InputError(f"{path}: unrecognised JSON record")


def save_index(index: SketchIndex, directory: PathLike) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for i, key in enumerate(index.ids):
        name = f"{i:06d}{SKETCH_SUFFIX}"
        (directory / name).write_bytes(index[key].to_bytes())
        files.append(name)
    manifest = {
        "m": index.m,
        "phi": index.phi.to_dict(),
        "ids": index.ids,
        "files": files,
    }
    write_json(manifest, directory / MANIFEST)
    return directory


def load_index(directory: PathLike) -> SketchIndex:
    directory = Path(directory)
    manifest_path = directory / MANIFEST
    if not manifest_path.exists():
        raise InputError(f"{directory}: no {MANIFEST}; not an index directory")
    manifest = read_json(manifest_path)
    try:
        m, phi = int(manifest["m"]), PhiSpec.from_dict(manifest["phi"])
        ids, files = manifest["ids"], manifest["files"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{manifest_path}: malformed manifest ({exc})") from exc
    if len(ids) != len(files):
        raise InputError(f"{manifest_path}: ids and files differ in length")
    index = SketchIndex(m, phi)
    for key, name in zip(ids, files):
        index.add(key, load_sketch(directory / name))
    return index
