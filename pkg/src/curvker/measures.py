"""Finite weighted point measures: truncated triple energies, densities and beta numbers.

The O(m^3) energy sums run in compiled loops over ordered index triples.  The
outer index is cut into fixed blocks; each block is summed with Kahan
compensation and the block sums are combined, again compensated, in block
order.  The result is therefore bit-identical for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numba
import numpy as np

from .errors import MeasureError, ParameterError
from .geometry import COLLINEAR_TOL, Line, PointLike, as_point, as_points
from .parallel import ordered_map

#: Outer indices per block of the energy sums.
BLOCK_ROWS = 8


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms; coincident points are allowed and contribute nothing to energies."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = as_points(self.points)
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.shape != w.shape:
            raise MeasureError("points/weights length mismatch")
        if not np.all(np.isfinite(w)):
            raise MeasureError("weights must be finite")
        neg = np.flatnonzero(w < 0)
        if neg.size:
            raise MeasureError(f"negative weight at index {int(neg[0])}")
        if not w.sum() > 0:
            raise MeasureError("total mass must be positive")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points, mass: float = 1.0) -> "DiscreteMeasure":
        pts = as_points(points)
        return cls(pts, np.full(len(pts), mass / len(pts)))

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return (np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights))

    @property
    def mass(self) -> float:
        return float(math.fsum(self.weights))

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.points.real, self.points.imag])

    def distances(self) -> np.ndarray:
        z = self.points
        return np.abs(z[:, None] - z[None, :])

    @property
    def diameter(self) -> float:
        return float(self.distances().max()) if len(self) > 1 else 0.0


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not (math.isfinite(eps) and eps >= 0):
        raise ParameterError("eps must be a finite nonnegative real")
    return eps


@numba.njit(nogil=True, cache=True)
def _block_sum(x, y, w, dist, kmat, eps, use_perm, row_start, row_stop):
    m = x.shape[0]
    s = 0.0
    comp = 0.0
    for i in range(row_start, row_stop):
        for j in range(m):
            dij = dist[i, j]
            if j == i or dij == 0.0 or dij < eps:
                continue
            for k in range(m):
                dik = dist[i, k]
                djk = dist[j, k]
                if k == i or k == j or dik == 0.0 or djk == 0.0 or dik < eps or djk < eps:
                    continue
                cr = (x[j] - x[i]) * (y[k] - y[i]) - (y[j] - y[i]) * (x[k] - x[i])
                per = dij + dik + djk
                if 0.5 * abs(cr) < COLLINEAR_TOL * per * per:
                    continue
                if use_perm:
                    val = kmat[i, j] * kmat[i, k] + kmat[j, i] * kmat[j, k] + kmat[k, i] * kmat[k, j]
                else:
                    c = 2.0 * abs(cr) / (dij * dik * djk)
                    val = c * c
                val = val * (w[i] * w[j] * w[k])
                yk = val - comp
                t = s + yk
                comp = (t - s) - yk
                s = t
    return s


def kahan_sum(values) -> float:
    s = 0.0
    comp = 0.0
    for v in values:
        yk = v - comp
        t = s + yk
        comp = (t - s) - yk
        s = t
    return s


def _triple_energy(mu: DiscreteMeasure, eps: float, kmat, threads: Optional[int]) -> float:
    m = len(mu)
    if m < 3:
        return 0.0
    x = np.ascontiguousarray(mu.points.real)
    y = np.ascontiguousarray(mu.points.imag)
    w = np.ascontiguousarray(mu.weights)
    dist = mu.distances()
    use_perm = kmat is not None
    if kmat is None:
        kmat = np.zeros((1, 1))
    blocks = [(r, min(r + BLOCK_ROWS, m)) for r in range(0, m, BLOCK_ROWS)]

    def work(block):
        return _block_sum(x, y, w, dist, kmat, eps, use_perm, block[0], block[1])

    return kahan_sum(ordered_map(work, blocks, threads))


def curvature_energy(mu: DiscreteMeasure, eps: float = 0.0, *,
                     threads: Optional[int] = None) -> float:
    """Sum of ``c^2 w_i w_j w_k`` over ordered triples whose pairwise distances are all >= eps."""
    return _triple_energy(mu, _check_eps(eps), None, threads)


def pair_kernel_matrix(mu: DiscreteMeasure, kernel) -> np.ndarray:
    """``kernel(z_i - z_j)``, with 0 on the diagonal and at coincident pairs."""
    dz = mu.points[:, None] - mu.points[None, :]
    nonzero = dz != 0
    out = np.zeros(dz.shape)
    out[nonzero] = np.asarray(kernel(dz[nonzero]), dtype=float)
    return out


def perm_energy(mu: DiscreteMeasure, kernel, eps: float = 0.0, *,
                threads: Optional[int] = None) -> float:
    """Sum of ``perm3(kernel) w_i w_j w_k`` over the same ordered, truncated triples.

    ``kernel`` is a :class:`KernelParams` or any odd kernel callable on complex arrays.
    """
    return _triple_energy(mu, _check_eps(eps), pair_kernel_matrix(mu, kernel), threads)


class MVResidual(NamedTuple):
    lhs: float
    rhs_curvature: float
    residual: float


def cauchy_sums(mu: DiscreteMeasure, eps: float) -> np.ndarray:
    """``sum_{|zeta - z| > eps} w_zeta / (zeta - z)`` at every atom ``z``."""
    z = mu.points
    diff = z[None, :] - z[:, None]
    far = np.abs(diff) > eps
    recip = np.zeros_like(diff)
    recip[far] = 1.0 / diff[far]
    return recip @ mu.weights


def mv_residual(mu: DiscreteMeasure, eps: float, *, threads: Optional[int] = None) -> MVResidual:
    """Truncated Cauchy-transform energy against one sixth of the curvature energy."""
    eps = _check_eps(eps)
    if eps == 0:
        raise ParameterError("eps must be positive")
    lhs = float(np.dot(mu.weights, np.abs(cauchy_sums(mu, eps)) ** 2))
    rhs = curvature_energy(mu, eps, threads=threads) / 6.0
    return MVResidual(lhs, rhs, lhs - rhs)


def ball_mass(mu: DiscreteMeasure, center: PointLike, r: float) -> float:
    """Mass of the open ball ``|z - center| < r``."""
    inside = np.abs(mu.points - as_point(center)) < r
    return float(math.fsum(mu.weights[inside]))


def density(mu: DiscreteMeasure, x: PointLike, r: float) -> float:
    """``mu(B(x, r)) / r`` for the open ball."""
    if not (r > 0 and math.isfinite(r)):
        raise ParameterError("r must be a positive finite real")
    return ball_mass(mu, x, r) / r


def growth_constant(mu: DiscreteMeasure, radii_per_point: int = 8) -> float:
    """Largest ``mu(B(p, r)) / (2r)`` over atoms p and a log-spaced radius grid.

    Radii run from the least positive pair distance to the diameter.  The
    normalisation by the ball diameter gives arclength on a line the value 1.
    This is a lower estimate of the supremum over all radii.
    """
    if radii_per_point < 1:
        raise ParameterError("radii_per_point must be >= 1")
    dist = mu.distances()
    positive = dist[dist > 0]
    if positive.size == 0:
        raise MeasureError("no positive pairwise distance")
    radii = np.geomspace(positive.min(), positive.max(), radii_per_point)
    best = 0.0
    for r in radii:
        masses = (dist < r) @ mu.weights
        best = max(best, float(masses.max()) / (2.0 * float(r)))
    return best


@dataclass(frozen=True)
class BetaResult:
    beta1: float
    beta2: float
    line: Line


def best_line(points: np.ndarray, weights: np.ndarray) -> Line:
    """Weighted total-least-squares line: through the centroid along the top principal axis."""
    total = weights.sum()
    center = np.dot(weights, points) / total
    d = points - center
    scatter = np.array([[np.dot(weights, d.real * d.real), np.dot(weights, d.real * d.imag)],
                        [np.dot(weights, d.real * d.imag), np.dot(weights, d.imag * d.imag)]])
    _, vecs = np.linalg.eigh(scatter)
    axis = vecs[:, -1]
    return Line.through(complex(center), math.atan2(axis[1], axis[0]))


def beta_numbers(mu: DiscreteMeasure, x: PointLike, r: float, k: float = 2.0,
                 line: Optional[Line] = None) -> BetaResult:
    """L1 and L2 beta numbers of the window ``B(x, k r)`` relative to a line.

    Without ``line`` the L2-optimal line of the window is fitted first.
    """
    if not (r > 0 and math.isfinite(r)):
        raise ParameterError("r must be a positive finite real")
    if not (k >= 1 and math.isfinite(k)):
        raise ParameterError("k must be a finite real >= 1")
    inside = np.abs(mu.points - as_point(x)) < k * r
    pts, w = mu.points[inside], mu.weights[inside]
    if not w.sum() > 0:
        raise MeasureError("no mass in window")
    if line is None:
        line = best_line(pts, w)
    d = line.distance(pts) / r
    beta1 = float(np.dot(w, d)) / r
    beta2 = math.sqrt(float(np.dot(w, d * d)) / r)
    return BetaResult(beta1, beta2, line)
