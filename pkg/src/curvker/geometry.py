"""Planar primitives: triangle statistics, Menger curvature and angle predicates.

Points are represented as complex numbers ``x + iy``.  Every function below
works on scalars and, unchanged, on a batch of triples whose fields are
equally shaped complex arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import DegenerateTripleError, ParameterError

#: A triple with area/perimeter**2 below this is treated as exactly collinear.
COLLINEAR_TOL = 1e-14

PointLike = Union[complex, float, Sequence[float]]


def as_point(p: PointLike) -> complex:
    """Coerce ``(x, y)`` pairs and real/complex numbers to a complex point."""
    if isinstance(p, (complex, np.complexfloating)):
        z = complex(p)
    elif isinstance(p, (int, float, np.integer, np.floating)) and not isinstance(p, bool):
        z = complex(float(p), 0.0)
    else:
        x, y = p
        z = complex(float(x), float(y))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ParameterError(f"point coordinates must be finite, got {p!r}")
    return z


def as_points(points) -> np.ndarray:
    """Coerce an (m, 2) real array or a sequence of points to a complex array."""
    arr = np.asarray(points)
    if np.iscomplexobj(arr):
        out = arr.astype(complex)
    else:
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ParameterError("expected an array of shape (m, 2)")
        out = arr[:, 0] + 1j * arr[:, 1]
    if not np.all(np.isfinite(out)):
        raise ParameterError("point coordinates must be finite")
    return out


def scalar_or_array(x):
    """Plain float for 0-d results, float64 array otherwise."""
    if np.ndim(x) == 0:
        return float(x)
    return np.asarray(x, dtype=float)


class Triple(NamedTuple):
    """Three planar points; the fields may also be arrays (a batch of triples)."""

    z1: complex
    z2: complex
    z3: complex

    @classmethod
    def of(cls, p1: PointLike, p2: PointLike, p3: PointLike) -> "Triple":
        tri = cls(as_point(p1), as_point(p2), as_point(p3))
        require_distinct(tri)
        return tri

    @classmethod
    def origin(cls, u, v) -> "Triple":
        """The triple ``(0, u, v)``."""
        u = np.asarray(u, dtype=complex)
        return cls(np.zeros_like(u), u, np.asarray(v, dtype=complex))

    def translated(self, w: complex) -> "Triple":
        return Triple(self.z1 + w, self.z2 + w, self.z3 + w)

    def scaled(self, s: complex) -> "Triple":
        return Triple(self.z1 * s, self.z2 * s, self.z3 * s)

    def conjugate(self) -> "Triple":
        return Triple(np.conj(self.z1), np.conj(self.z2), np.conj(self.z3))

    def to_origin(self) -> tuple:
        """Edge vectors ``(u, v) = (z2 - z1, z3 - z1)``."""
        return self.z2 - self.z1, self.z3 - self.z1

    def as_pairs(self) -> list[list[float]]:
        return [[float(np.real(z)), float(np.imag(z))] for z in self]


def require_distinct(tri: Triple) -> None:
    z1, z2, z3 = (np.asarray(z) for z in tri)
    if np.any(z1 == z2) or np.any(z1 == z3) or np.any(z2 == z3):
        raise DegenerateTripleError("triple has coincident points")


def cross(u, v):
    """Signed cross product ``Re u * Im v - Im u * Re v``."""
    u = np.asarray(u)
    v = np.asarray(v)
    return u.real * v.imag - u.imag * v.real


def collinear_mask(tri: Triple):
    """True where a triple counts as degenerate-collinear."""
    u, v = tri.to_origin()
    area = 0.5 * np.abs(cross(u, v))
    perimeter = np.abs(u) + np.abs(v) + np.abs(np.asarray(u) - v)
    return area < COLLINEAR_TOL * perimeter**2


def perimeter(tri: Triple):
    z1, z2, z3 = tri
    return scalar_or_array(np.abs(z1 - z2) + np.abs(z1 - z3) + np.abs(z2 - z3))


def natural_scale(tri: Triple):
    """``perimeter**-2``: the dilation-invariant scale for permutation values."""
    return scalar_or_array(np.asarray(perimeter(tri)) ** -2.0)


def line_angles(direction):
    """Angles of a line with direction ``direction`` to the vertical and horizontal axes.

    Both lie in [0, pi/2].
    """
    d = np.asarray(direction, dtype=complex)
    ax, ay = np.abs(d.real), np.abs(d.imag)
    return np.arctan2(ax, ay), np.arctan2(ay, ax)


@dataclass(frozen=True)
class TriangleStats:
    sides: tuple
    area: float
    theta_v: tuple
    theta_h: tuple


def triangle_stats(tri: Triple) -> TriangleStats:
    """Sides ``|z1-z2|, |z1-z3|, |z2-z3|``, unsigned area and side-line angles."""
    require_distinct(tri)
    z1, z2, z3 = (np.asarray(z, dtype=complex) for z in tri)
    edges = (z2 - z1, z3 - z1, z3 - z2)
    sides = tuple(scalar_or_array(np.abs(e)) for e in edges)
    area = scalar_or_array(0.5 * np.abs(cross(edges[0], edges[1])))
    angles = [line_angles(e) for e in edges]
    theta_v = tuple(scalar_or_array(a[0]) for a in angles)
    theta_h = tuple(scalar_or_array(a[1]) for a in angles)
    return TriangleStats(sides, area, theta_v, theta_h)


def menger_curvature(tri: Triple):
    """Reciprocal circumradius ``4 * area / (a * b * c)``; exactly 0 when collinear."""
    require_distinct(tri)
    u, v = (np.asarray(w, dtype=complex) for w in tri.to_origin())
    a, b, c = np.abs(u), np.abs(v), np.abs(u - v)
    twice_area = np.abs(cross(u, v))
    curv = 2.0 * twice_area / (a * b * c)
    curv = np.where(0.5 * twice_area < COLLINEAR_TOL * (a + b + c) ** 2, 0.0, curv)
    return scalar_or_array(curv)


class AnglePredicates(NamedTuple):
    in_otau: bool
    delta1: bool
    delta2: bool


def angle_predicates(tri: Triple, alpha0: float, tau: float) -> AnglePredicates:
    """Comparable sides (every side ratio <= tau) and the two angle-sum conditions.

    ``delta1`` asks that the side-lines make a total angle of at least
    ``alpha0`` with the vertical axis, ``delta2`` the same with the horizontal.
    """
    if not 0 < alpha0 < math.pi / 2:
        raise ParameterError("alpha0 must lie in (0, pi/2)")
    if not tau >= 1:
        raise ParameterError("tau must be >= 1")
    st = triangle_stats(tri)
    sides = np.stack(np.broadcast_arrays(*st.sides))
    in_otau = sides.max(axis=0) <= tau * sides.min(axis=0)
    delta1 = sum(st.theta_v) >= alpha0
    delta2 = sum(st.theta_h) >= alpha0
    if np.ndim(in_otau) == 0:
        return AnglePredicates(bool(in_otau), bool(delta1), bool(delta2))
    return AnglePredicates(in_otau, np.asarray(delta1), np.asarray(delta2))


def sample_triples(count: int, rng: np.random.Generator, *, min_shape: float = 1e-6,
                   max_ratio: float = 1e3) -> Triple:
    """Random well-conditioned triples with vertices uniform in [-1, 1]^2.

    Triples with area/perimeter**2 < ``min_shape`` or a side ratio above
    ``max_ratio`` are rejected and redrawn.
    """
    kept: list[np.ndarray] = []
    have = 0
    while have < count:
        batch = max(2 * (count - have), 64)
        xy = rng.uniform(-1.0, 1.0, size=(batch, 3, 2))
        z = xy[..., 0] + 1j * xy[..., 1]
        u, v = z[:, 1] - z[:, 0], z[:, 2] - z[:, 0]
        a, b, c = np.abs(u), np.abs(v), np.abs(u - v)
        per = a + b + c
        sides = np.stack([a, b, c])
        ok = (0.5 * np.abs(cross(u, v)) >= min_shape * per**2) & (
            sides.max(axis=0) <= max_ratio * sides.min(axis=0))
        kept.append(z[ok])
        have += int(ok.sum())
    z = np.concatenate(kept)[:count]
    return Triple(z[:, 0], z[:, 1], z[:, 2])


@dataclass(frozen=True)
class Line:
    """Unoriented line: direction angle in [0, pi) and signed offset from the origin.

    The offset is measured along the unit normal ``(-sin angle, cos angle)``.
    """

    angle: float
    offset: float

    def __post_init__(self):
        if not (math.isfinite(self.angle) and math.isfinite(self.offset)):
            raise ParameterError("line parameters must be finite")
        turns = math.floor(self.angle / math.pi)
        a = self.angle - turns * math.pi
        if a >= math.pi:
            a -= math.pi
            turns += 1
        elif a < 0:
            a = 0.0
        off = self.offset
        # Reversing the direction flips the normal, hence the offset sign.
        if turns % 2:
            off = -off
        object.__setattr__(self, "angle", a)
        object.__setattr__(self, "offset", off)

    @classmethod
    def through(cls, point: PointLike, direction_angle: float) -> "Line":
        p = as_point(point)
        off = -math.sin(direction_angle) * p.real + math.cos(direction_angle) * p.imag
        return cls(direction_angle, off)

    @property
    def normal(self) -> complex:
        return complex(-math.sin(self.angle), math.cos(self.angle))

    def distance(self, points):
        """Unsigned distance from complex point(s) to the line."""
        z = np.asarray(points, dtype=complex)
        n = self.normal
        return np.abs(n.real * z.real + n.imag * z.imag - self.offset)
