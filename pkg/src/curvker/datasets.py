"""Canonical point measures and their JSON/CSV file format."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import MeasureError, MeasureFileError, ParameterError
from .measures import DiscreteMeasure

SCHEMA = "measure/1"
CANTOR_MAX_GENERATION = 8


@dataclass(frozen=True)
class MeasureFile:
    measure: DiscreteMeasure
    metadata: dict = field(default_factory=dict)


def _check_count(count, minimum: int) -> int:
    if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < minimum:
        raise ParameterError(f"count must be an integer >= {minimum}, got {count!r}")
    return int(count)


def cantor4(k: int) -> DiscreteMeasure:
    """Centres of the 4**k generation-k squares of the four-corner set (ratio 1/4)."""
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
        raise ParameterError(f"generation must be a nonnegative integer, got {k!r}")
    if k > CANTOR_MAX_GENERATION:
        raise ParameterError(f"generation {k} exceeds the cap {CANTOR_MAX_GENERATION}")
    corners = np.zeros(1, dtype=complex)
    offsets = np.array([0, 1, 1j, 1 + 1j])
    for level in range(k):
        # Corner squares of side 4**-(level+1) sit at offsets 0 and 3/4 of the parent.
        step = 0.75 * 4.0**-level
        corners = (corners[:, None] + step * offsets[None, :]).ravel()
    side = 4.0**-k
    centers = corners + side / 2 * (1 + 1j)
    return DiscreteMeasure(centers, np.full(len(centers), side))


def segment(count: int) -> DiscreteMeasure:
    """Midpoints of ``count`` equal cells of [0, 1] x {0}, each of mass 1/count."""
    count = _check_count(count, 2)
    x = (np.arange(count) + 0.5) / count
    return DiscreteMeasure(x + 0j, np.full(count, 1.0 / count))


def circle(count: int, mass: Optional[float] = None) -> DiscreteMeasure:
    """Equispaced points on the circle of radius 1/2 about (1/2, 1/2).

    Weights are the arclength per point (total pi) unless ``mass`` fixes the total.
    """
    count = _check_count(count, 3)
    total = math.pi if mass is None else float(mass)
    if not (total > 0 and math.isfinite(total)):
        raise ParameterError("mass must be a positive finite real")
    z = 0.5 + 0.5j + 0.5 * np.exp(2j * math.pi * np.arange(count) / count)
    return DiscreteMeasure(z, np.full(count, total / count))


def random_circle(count: int, seed: int, mass: float = 1.0) -> DiscreteMeasure:
    """``count`` independent uniform points on the circle of radius 1/2 about (1/2, 1/2)."""
    count = _check_count(count, 3)
    angles = dataset_rng(seed).uniform(0.0, 2.0 * math.pi, size=count)
    z = 0.5 + 0.5j + 0.5 * np.exp(1j * angles)
    return DiscreteMeasure(z, np.full(count, float(mass) / count))


def dataset_rng(seed: int) -> np.random.Generator:
    """The seeded generator behind every random dataset (PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


def lipschitz_graph(slope: float, count: int, seed: int) -> DiscreteMeasure:
    """Graph of a random piecewise-linear A with ``|A'| <= slope``, sampled at x = i/(count-1).

    Weights are trapezoidal arclength shares, so the total mass is the graph length.
    """
    count = _check_count(count, 2)
    slope = float(slope)
    if not (slope >= 0 and math.isfinite(slope)):
        raise ParameterError("slope must be a finite nonnegative real")
    h = 1.0 / (count - 1)
    slopes = dataset_rng(seed).uniform(-slope, slope, size=count - 1)
    y = np.concatenate([[0.0], np.cumsum(slopes * h)])
    x = np.arange(count) * h
    seg = np.hypot(np.diff(x), np.diff(y))
    w = np.zeros(count)
    w[:-1] += seg / 2
    w[1:] += seg / 2
    return DiscreteMeasure(x + 1j * y, w)


GENERATORS = {
    "cantor4": cantor4,
    "segment": segment,
    "circle": circle,
    "lipschitz": lipschitz_graph,
    "random_circle": random_circle,
}


def generate(name: str, **params) -> MeasureFile:
    """Run a named generator and record its parameters as metadata."""
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ParameterError(f"unknown generator {name!r}") from None
    given = {k: v for k, v in params.items() if v is not None}
    meta = {"generator": name, **{k: str(v) for k, v in given.items()}}
    if name in ("lipschitz", "random_circle"):
        meta["rng"] = "PCG64"
    return MeasureFile(gen(**given), meta)


def to_json(mu: DiscreteMeasure, metadata: Optional[dict] = None) -> str:
    """JSON text with one point and one weight per line."""
    points = ",\n  ".join(json.dumps([float(z.real), float(z.imag)]) for z in mu.points)
    weights = ",\n  ".join(json.dumps(float(w)) for w in mu.weights)
    meta = json.dumps({str(k): str(v) for k, v in (metadata or {}).items()})
    return (f'{{"schema": {json.dumps(SCHEMA)},\n "points": [\n  {points}\n ],\n'
            f' "weights": [\n  {weights}\n ],\n "metadata": {meta}\n}}\n')


def save(mu: DiscreteMeasure, path, metadata: Optional[dict] = None) -> None:
    """Write the JSON measure file; floats use the shortest round-trip decimal form."""
    Path(path).write_text(to_json(mu, metadata))


def _finite(value, what: str, line: Optional[int]) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MeasureFileError(f"{what} must be a number", line)
    value = float(value)
    if not math.isfinite(value):
        raise MeasureFileError(f"{what} must be finite", line)
    return value


def _build(points, weights, line: Optional[int] = None) -> DiscreteMeasure:
    if len(points) != len(weights):
        raise MeasureFileError("points/weights length mismatch", line)
    for i, w in enumerate(weights):
        if w < 0:
            raise MeasureFileError(f"negative weight at index {i}", line)
    try:
        return DiscreteMeasure(np.asarray(points, dtype=float).reshape(-1, 2), weights)
    except MeasureError as exc:
        raise MeasureFileError(str(exc), line) from None


def parse_json(text: str) -> MeasureFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureFileError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise MeasureFileError("top level must be an object", 1)
    if doc.get("schema") != SCHEMA:
        raise MeasureFileError(f"schema must be {SCHEMA!r}, got {doc.get('schema')!r}")
    raw_points, raw_weights = doc.get("points"), doc.get("weights")
    if not isinstance(raw_points, list) or not isinstance(raw_weights, list):
        raise MeasureFileError("points and weights must be lists")
    points = []
    for i, p in enumerate(raw_points):
        if not isinstance(p, list) or len(p) != 2:
            raise MeasureFileError(f"point {i} must be an [x, y] pair")
        points.append([_finite(c, f"point {i} coordinate", None) for c in p])
    weights = [_finite(w, f"weight {i}", None) for i, w in enumerate(raw_weights)]
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise MeasureFileError("metadata must be an object")
    return MeasureFile(_build(points, weights), {str(k): str(v) for k, v in meta.items()})


def parse_csv(text: str) -> MeasureFile:
    rows = csv.reader(io.StringIO(text))
    points, weights = [], []
    header_seen = False
    for row in rows:
        line = rows.line_num
        cells = [c.strip() for c in row]
        if not cells or cells == [""]:
            continue
        if not header_seen:
            if cells != ["x", "y", "w"]:
                raise MeasureFileError('expected header "x,y,w"', line)
            header_seen = True
            continue
        if len(cells) != 3:
            raise MeasureFileError(f"expected 3 fields, got {len(cells)}", line)
        try:
            x, y, w = (float(c) for c in cells)
        except ValueError:
            raise MeasureFileError("fields must be numbers", line) from None
        if not all(math.isfinite(v) for v in (x, y, w)):
            raise MeasureFileError("fields must be finite", line)
        if w < 0:
            raise MeasureFileError(f"negative weight at index {len(weights)}", line)
        points.append([x, y])
        weights.append(w)
    if not header_seen:
        raise MeasureFileError("empty file", 1)
    return MeasureFile(_build(points, weights), {})


def load_file(path) -> MeasureFile:
    """Parse a JSON measure file, or CSV with header ``x,y,w``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MeasureFileError(f"cannot read {path}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        return parse_json(text)
    return parse_csv(text)


def load(path) -> DiscreteMeasure:
    return load_file(path).measure
