"""Sign exploration for the K_t permutation over triangle shape space.

The permutation is translation invariant and homogeneous of degree -2, so
its sign depends only on the shape and orientation of a triple.  Triples are
parameterised as ``(0, e^{i alpha}, r e^{i beta})``; the quantity minimised is
``perimeter**2 * perm3(K_t)``, which is invariant under dilations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ParameterError
from .geometry import Triple, perimeter
from .kernels import KernelParams
from .parallel import ordered_map
from .permutations import (
    decompose_quadratic,
    decompose_quadratic_exact,
    perm3,
    quadratic_roots,
)
from .thresholds import excluded_interval

#: Guaranteed cells may dip this far below zero through rounding alone.
GUARANTEED_TOL = 1e-10
#: A Guaranteed cell whose minimum falls below this falsifies the build.
VIOLATION_TOL = 1e-8
#: A value this negative is accepted as a genuine sign change.
WITNESS_TOL = 1e-10

#: Rows of alpha handled by one chunk of the grid pass.  Fixed so that the
#: reduction order, and hence the result, does not depend on the worker count.
CHUNK_ROWS = 4

REFINE_ROUNDS = 3
REFINE_FACTOR = 4
REFINE_HALF_WIDTH = 4  # 9 points per axis


@dataclass(frozen=True)
class ShapeGrid:
    """Discretisation of shape space: alpha in [0, pi], beta in [0, 2 pi), r log-spaced."""

    alpha_steps: int = 180
    beta_steps: int = 360
    r_steps: int = 33
    r_max: float = 20.0

    def __post_init__(self):
        for name in ("alpha_steps", "beta_steps", "r_steps"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 8:
                raise ParameterError(f"{name} must be an integer >= 8, got {value!r}")
        if not (math.isfinite(self.r_max) and self.r_max >= 1):
            raise ParameterError(f"r_max must be a finite real >= 1, got {self.r_max!r}")

    @property
    def alphas(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.alpha_steps)

    @property
    def betas(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.beta_steps) / self.beta_steps

    @property
    def log_radii(self) -> np.ndarray:
        span = math.log(self.r_max)
        return np.linspace(-span, span, self.r_steps)

    @property
    def steps(self) -> tuple[float, float, float]:
        """Spacing of the (alpha, beta, log r) axes."""
        span = 2.0 * math.log(self.r_max)
        return (math.pi / (self.alpha_steps - 1), 2.0 * math.pi / self.beta_steps,
                span / (self.r_steps - 1) if span else 0.0)

    @property
    def size(self) -> int:
        return self.alpha_steps * self.beta_steps * self.r_steps


COARSE_GRID = ShapeGrid(36, 72, 13, 20.0)


class Shape(NamedTuple):
    alpha: float
    beta: float
    log_r: float

    def triple(self) -> Triple:
        return Triple(0j, complex(math.cos(self.alpha), math.sin(self.alpha)),
                      math.exp(self.log_r) * complex(math.cos(self.beta), math.sin(self.beta)))


def shape_of(tri: Triple) -> Shape:
    """Shape coordinates of a triple, using negation and dilation invariance."""
    u, v = (complex(w) for w in tri.to_origin())
    if u == 0 or v == 0 or u == v:
        raise ParameterError("triple has coincident points")
    angle = math.atan2(u.imag, u.real)
    if angle < 0:
        # (0, -u, -v) has the same permutation value.
        u, v = -u, -v
        angle = math.atan2(u.imag, u.real)
    v = v / abs(u)
    return Shape(angle, math.atan2(v.imag, v.real) % (2.0 * math.pi), math.log(abs(v)))


def normalized_perm(p: KernelParams, tri: Triple):
    """``perimeter**2 * perm3(K_t)``, evaluated in extended precision."""
    return perimeter(tri) ** 2 * np.asarray(perm3(p, tri))


def _shape_points(alpha, beta, log_r):
    u = np.exp(1j * np.asarray(alpha, dtype=float))
    v = np.exp(np.asarray(log_r, dtype=float) + 1j * np.asarray(beta, dtype=float))
    return u, v


def _normalized_values(n: int, N: int, ts: np.ndarray, u, v, extended: bool) -> np.ndarray:
    """Normalised values for every t (first axis) and shape; coincident shapes give +inf."""
    u, v = np.broadcast_arrays(u, v)
    bad = u == v
    v_safe = np.where(bad, -u, v)
    c0, c1, c2 = (np.asarray(c, dtype=float)
                  for c in decompose_quadratic(n, N, u, v_safe, extended=extended))
    per2 = (np.abs(u) + np.abs(v_safe) + np.abs(u - v_safe)) ** 2
    ts = np.asarray(ts, dtype=float).reshape((-1,) + (1,) * u.ndim)
    values = per2 * (c0 + ts * (c1 + ts * c2))
    return np.where(bad, np.inf, values)


def _chunk_minima(n, N, ts, grid: ShapeGrid, rows: range):
    a, b, lr = np.meshgrid(grid.alphas[rows.start:rows.stop], grid.betas, grid.log_radii,
                           indexing="ij")
    u, v = _shape_points(a, b, lr)
    values = _normalized_values(n, N, ts, u, v, extended=False).reshape(len(ts), -1)
    idx = np.argmin(values, axis=1)
    offset = rows.start * grid.beta_steps * grid.r_steps
    return values[np.arange(len(ts)), idx], idx + offset


def grid_minima(n: int, N: int, ts: Sequence[float], grid: ShapeGrid,
                threads: Optional[int] = None) -> list[tuple[float, Shape]]:
    """Grid minimum of the normalised value for each t, with its shape.

    Ties resolve to the first shape in (alpha, beta, r) order for any worker count.
    """
    KernelParams(n, N)
    ts = np.asarray(list(ts), dtype=float)
    chunks = [range(i, min(i + CHUNK_ROWS, grid.alpha_steps))
              for i in range(0, grid.alpha_steps, CHUNK_ROWS)]
    results = ordered_map(lambda rows: _chunk_minima(n, N, ts, grid, rows), chunks, threads)
    best_val = np.full(len(ts), np.inf)
    best_idx = np.zeros(len(ts), dtype=np.int64)
    for vals, idx in results:
        better = vals < best_val
        best_val = np.where(better, vals, best_val)
        best_idx = np.where(better, idx, best_idx)
    out = []
    shape3 = (grid.alpha_steps, grid.beta_steps, grid.r_steps)
    for val, flat in zip(best_val, best_idx):
        i, j, k = np.unravel_index(int(flat), shape3)
        out.append((float(val), Shape(float(grid.alphas[i]), float(grid.betas[j]),
                                      float(grid.log_radii[k]))))
    return out


def refine(p: KernelParams, start: Shape, grid: ShapeGrid,
           value: Optional[float] = None) -> tuple[float, Shape]:
    """Local grid refinement around ``start``: 9x9x9 points, step shrinking 4x per round.

    The best point seen is always kept, so the result never exceeds ``value``.
    """
    span = math.log(grid.r_max)
    best = start
    best_val = (float(normalized_perm(p, start.triple())) if value is None else value)
    steps = np.array(grid.steps)
    offsets = np.arange(-REFINE_HALF_WIDTH, REFINE_HALF_WIDTH + 1)
    for _ in range(REFINE_ROUNDS):
        steps = steps / REFINE_FACTOR
        da, db, dr = np.meshgrid(offsets * steps[0], offsets * steps[1], offsets * steps[2],
                                 indexing="ij")
        a = best.alpha + da.ravel()
        b = best.beta + db.ravel()
        lr = np.clip(best.log_r + dr.ravel(), -span, span)
        u, v = _shape_points(a, b, lr)
        vals = _normalized_values(p.n, p.N, [p.t], u, v, extended=True)[0]
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best = Shape(float(a[i]), float(b[i]), float(lr[i]))
    return best_val, best


def min_over_shapes(p: KernelParams, grid: ShapeGrid = ShapeGrid(), *, refine_passes: bool = True,
                    seeds: Iterable[Triple] = (), threads: Optional[int] = None
                    ) -> tuple[float, Triple]:
    """Minimum of ``perimeter**2 * perm3(K_t)`` over the grid, plus a witness triple.

    ``seeds`` are extra starting triples (any position or scale) that compete
    with the grid argmin before refinement.
    """
    val, shape = grid_minima(p.n, p.N, [p.t], grid, threads)[0]
    return _finish_search(p, grid, val, shape, seeds, refine_passes)


def _finish_search(p, grid, val, shape, seeds, refine_passes):
    starts = [(val, shape)]
    for tri in seeds:
        s = shape_of(tri)
        starts.append((float(normalized_perm(p, s.triple())), s))
    best_val, best = min(starts, key=lambda item: item[0])
    if refine_passes:
        for v0, s0 in starts:
            rv, rs = refine(p, s0, grid, v0)
            if rv < best_val:
                best_val, best = rv, rs
    return best_val, best.triple()


class Theory(str, enum.Enum):
    GUARANTEED = "Guaranteed"
    KNOWN_NEGATIVE = "KnownNegative"
    CONJECTURED_NEGATIVE = "ConjecturedNegative"
    UNKNOWN = "Unknown"


#: ``max_{q >= e} (2 ln q - 1) / q``, the slope of the conjectured positive-t region.
POSITIVE_T_SLOPE = 2.0 * math.exp(-1.5)


def classify_region(n: int, N: int, t: float) -> Theory:
    interval = excluded_interval(n, N)
    ratio = N / n
    if not interval.contains(t):
        return Theory.GUARANTEED
    if -ratio < t < 0:
        return Theory.KNOWN_NEGATIVE
    if 0 < t < POSITIVE_T_SLOPE * ratio:
        return Theory.CONJECTURED_NEGATIVE
    return Theory.UNKNOWN


@dataclass
class RegionCell:
    N: int
    t: float
    theory: Theory
    empirical_min: float
    witness: Optional[Triple] = None
    #: Label before an empirical upgrade (equal to ``theory`` when none happened).
    predicted: Optional[Theory] = None
    violations: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.predicted is None:
            self.predicted = self.theory


# ---------------------------------------------------------------------------
# Negative-t family: isosceles triples with apex at the origin


class Example1(NamedTuple):
    triple: Triple
    d1: float
    d2: float
    d3: float
    t1: float
    t2: float


def _one_minus_pow(s_log: float, k: int) -> float:
    """``1 - s**k`` from ``log s`` without cancellation."""
    return -math.expm1(k * s_log)


def example1(a: float, n: int, N: int) -> Example1:
    """Triple ``(0, (-a, 1), (a, 1))`` whose K_t permutation has two negative roots."""
    KernelParams(n, N)
    a = float(a)
    if a == 0 or not math.isfinite(a):
        raise ParameterError("a must be a nonzero finite real")
    a2 = a * a
    # s = a^2 / (a^2 + 1); every d-formula is a power of (a^2+1) times a polynomial in s.
    s_log = -math.log1p(1.0 / a2)
    t1 = -_one_minus_pow(s_log, N) / _one_minus_pow(s_log, n)
    t2 = -math.exp((N - n) * s_log)
    try:
        scale = (a2 + 1.0) ** n
    except OverflowError:
        scale = math.inf
    d3 = scale * _one_minus_pow(s_log, n)
    d1 = scale * _one_minus_pow(s_log, N)
    d2 = scale * (math.exp((N - n) * s_log) - math.exp(N * s_log))
    tri = Triple(0j, complex(-a, 1.0), complex(a, 1.0))
    return Example1(tri, d1, d2, d3, t1, t2)


EXAMPLE1_SWEEP = np.logspace(-4, 4, 801)


def example1_witness(p: KernelParams, a_values: np.ndarray = EXAMPLE1_SWEEP) -> Optional[Triple]:
    """The negative-family triple most negative at ``p.t`` over an a-sweep, or None."""
    a = np.asarray(a_values, dtype=float)
    u, v = -a + 1j, a + 1j
    vals = _normalized_values(p.n, p.N, [p.t], u, v, extended=True)[0]
    i = int(np.argmin(vals))
    if not vals[i] < -WITNESS_TOL:
        return None
    return Triple(0j, complex(u[i]), complex(v[i]))


# ---------------------------------------------------------------------------
# Positive-t family: a thin triangle whose apex recedes with r


class Example2(NamedTuple):
    cN: float
    bN: float
    t1Lim: float
    t2Lim: float
    t1Asym: float
    t2Asym: float
    triple: Triple


def example2_delta(n: int, N: int, q: float) -> float:
    return math.sqrt(math.log(q) / (N - n))


def example2_triple(n: int, N: int, q: float, r: float) -> Triple:
    d = example2_delta(n, N, q)
    return Triple(0j, -r * complex(1.0, d), complex(r - 1.0, r * d))


def example2(n: int, N: int, q: float, r: float) -> Example2:
    """Limit polynomial, its roots and their large-N asymptotics for the thin positive-family triple."""
    KernelParams(n, N)
    q, r = float(q), float(r)
    if not q >= math.e:
        raise ParameterError(f"q must be >= e, got {q}")
    if not (r > 0 and math.isfinite(r)):
        raise ParameterError("r must be a positive finite real")
    d2 = math.log(q) / (N - n)
    lower = (2 * n - 1) * d2 + 1
    c = N / (n * (1 + d2) ** (2 * (N - n))) * ((2 * N - 1) * d2 + 1) / lower
    b = -(((2 * (N - n) ** 2 + N - 4 * n * N + n) * d2 - (n + N))
          / (n * (1 + d2) ** (N - n) * lower))
    roots = quadratic_roots(c, b, 1.0)
    if roots is None or roots[0] == roots[1]:
        raise ParameterError("N too small for this q")
    lq = 2 * math.log(q)
    t1_asym = (lq + 1) / (q * (lq - 1))
    t2_asym = (lq - 1) * N / (q * n)
    return Example2(c, b, roots[0], roots[1], t1_asym, t2_asym, example2_triple(n, N, q, r))


def example2_finite_roots(n: int, N: int, q: float, r: float) -> Optional[tuple[float, float]]:
    """Roots of the exact K_t quadratic at the finite-r positive-family triple."""
    u, v = example2_triple(n, N, q, r).to_origin()
    c0, c1, c2 = decompose_quadratic_exact(n, N, u, v)
    if c2 == 0:
        return None
    return quadratic_roots(float(c0 / c2), float(c1 / c2), 1.0)


def positive_t_slope_peak() -> tuple[float, float]:
    """``argmax`` and ``max`` of ``(2 ln q - 1) / q`` over ``q >= e``."""
    res = minimize_scalar(lambda q: -(2 * math.log(q) - 1) / q, bounds=(math.e, 50.0),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.x), float(-res.fun)


EXAMPLE2_Q = np.geomspace(math.e, 1e3, 120)
EXAMPLE2_R = (1e2, 1e3)


def example2_witness(p: KernelParams, q_values=EXAMPLE2_Q, r_values=EXAMPLE2_R
                     ) -> Optional[Triple]:
    """The most negative positive-family triple at ``p.t`` over a (q, r) sweep, or None."""
    best, best_val = None, -WITNESS_TOL
    for r in r_values:
        tris = [example2_triple(p.n, p.N, q, r) for q in q_values]
        u = np.array([complex(t.z2) for t in tris])
        v = np.array([complex(t.z3) for t in tris])
        vals = _normalized_values(p.n, p.N, [p.t], u, v, extended=True)[0]
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best, best_val = tris[i], float(vals[i])
    return best


# ---------------------------------------------------------------------------
# Region scan over (N, t)


def t_lattice(t_min: float, t_max: float, t_step: float) -> np.ndarray:
    if not (t_step > 0 and math.isfinite(t_step)):
        raise ParameterError("t step must be positive")
    if not (math.isfinite(t_min) and math.isfinite(t_max)) or t_max < t_min:
        raise ParameterError("need finite t_min <= t_max")
    count = int(math.floor((t_max - t_min) / t_step + 1e-9)) + 1
    return t_min + t_step * np.arange(count)


def scan_figure(n: int, N_min: int, N_max: int, t_min: float, t_max: float, t_step: float,
                grid: ShapeGrid = ShapeGrid(), *, refine_passes: bool = True,
                threads: Optional[int] = None) -> list[RegionCell]:
    """One RegionCell per (N, t) lattice point, ordered by N then t.

    Cells whose minimum contradicts their label carry messages in ``violations``.
    """
    if not 1 <= n < N_min <= N_max:
        raise ParameterError("need 1 <= n < N_min <= N_max")
    ts = t_lattice(t_min, t_max, t_step)
    cells = []
    for N in range(N_min, N_max + 1):
        minima = grid_minima(n, N, ts, grid, threads)
        for t, (val, shape) in zip(ts, minima):
            cells.append(_scan_cell(KernelParams(n, N, float(t)), grid, val, shape,
                                    refine_passes))
    return cells


def _scan_cell(p, grid, val, shape, refine_passes) -> RegionCell:
    theory = classify_region(p.n, p.N, p.t)
    seeds = []
    if theory is Theory.KNOWN_NEGATIVE:
        seeds.append(example1_witness(p))
    elif theory is Theory.CONJECTURED_NEGATIVE:
        seeds.append(example2_witness(p))
    seeds = [s for s in seeds if s is not None]
    value, tri = _finish_search(p, grid, val, shape, seeds, refine_passes)
    cell = RegionCell(p.N, p.t, theory, value)
    if value < -WITNESS_TOL:
        cell.witness = tri
    if theory is Theory.GUARANTEED:
        if value < -VIOLATION_TOL:
            cell.violations.append(f"Guaranteed cell has negative minimum {value:.3e}")
    elif cell.witness is not None:
        cell.theory = Theory.KNOWN_NEGATIVE
    elif theory is Theory.KNOWN_NEGATIVE:
        cell.violations.append("KnownNegative cell without a negative witness")
    return cell
