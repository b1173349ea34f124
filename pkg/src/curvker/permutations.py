"""Three-point algebra of kernel permutations.

Most functions take the origin form of a triple: the edge vectors ``u, v``
of ``(0, u, v)``.  Permutations are translation invariant, so any triple
``(z1, z2, z3)`` maps to ``u = z2 - z1``, ``v = z3 - z1``.

Shape coordinates used throughout::

    lambda1 = Re u / |u|,  lambda2 = Re v / |v|,  lambda3 = Re(u-v) / |u-v|
    cap_lambda = lambda1 * lambda2 * lambda3
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import NamedTuple

import numpy as np

from .errors import DegenerateTripleError, InconsistencyError, ParameterError
from .geometry import (
    COLLINEAR_TOL,
    Triple,
    collinear_mask,
    cross,
    require_distinct,
    scalar_or_array,
)
from .kernels import KernelParams, check_order, kappa_coord

#: Minimum separation of squared shape coordinates for the curvature form of tau2.
LAMBDA_GAP = 1e-8


def _zero_if_collinear(value, mask):
    return scalar_or_array(np.where(mask, 0.0, value))


def _ext(z) -> np.ndarray:
    # Pointwise algebra runs in extended precision: the permutation sums cancel
    # down to O(c^2) while the individual terms stay O(1 / side^2).
    return np.asarray(z, dtype=np.clongdouble)


def perm3(kernel, tri: Triple):
    """Symmetrised sum ``K(z1-z2)K(z1-z3) + K(z2-z1)K(z2-z3) + K(z3-z1)K(z3-z2)``.

    ``kernel`` is any odd real kernel accepting complex scalars or arrays.
    Degenerate-collinear triples give exactly 0.
    """
    require_distinct(tri)
    z1, z2, z3 = (_ext(z) for z in tri)
    value = (kernel(z1 - z2) * kernel(z1 - z3)
             + kernel(z2 - z1) * kernel(z2 - z3)
             + kernel(z3 - z1) * kernel(z3 - z2))
    return _zero_if_collinear(value, collinear_mask(tri))


def perm_origin(kernel, u, v):
    """``K(u)K(v) + K(u)K(u-v) + K(v)K(v-u)``, the permutation of ``(0, u, v)``."""
    tri = Triple.origin(u, v)
    require_distinct(tri)
    u, v = _ext(tri.z2), _ext(tri.z3)
    value = kernel(u) * kernel(v) + kernel(u) * kernel(u - v) + kernel(v) * kernel(v - u)
    return _zero_if_collinear(value, collinear_mask(tri))


def melnikov_rhs(tri: Triple):
    """Six-term sum over permutations ``s`` of ``1 / ((z_s2 - z_s1) * conj(z_s3 - z_s1))``.

    The sum is real; an imaginary residue above 1e-12 of the term magnitudes
    raises :class:`InconsistencyError`.
    """
    require_distinct(tri)
    z = [_ext(w) for w in tri]
    total = np.zeros(np.broadcast(*z).shape, dtype=np.clongdouble)
    magnitude = np.zeros(total.shape, dtype=np.longdouble)
    for a, b, c in itertools.permutations(range(3)):
        term = 1.0 / ((z[b] - z[a]) * np.conj(z[c] - z[a]))
        total = total + term
        magnitude = magnitude + np.abs(term)
    if np.any(np.abs(total.imag) > 1e-12 * magnitude):
        raise InconsistencyError("Melnikov sum has a non-negligible imaginary part")
    return _zero_if_collinear(total.real, collinear_mask(tri))


class LambdaTuple(NamedTuple):
    lambda1: float
    lambda2: float
    lambda3: float
    cap_lambda: float


class EdgeShape:
    """Unit ratios and lengths of the three edges of ``(0, u, v)``."""

    def __init__(self, u, v, extended: bool = True):
        if extended:
            u, v = _ext(u), _ext(v)
        else:
            u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
        w = u - v
        self.u, self.v, self.w = u, v, w
        self.r = (np.abs(u), np.abs(v), np.abs(w))
        if any(np.any(r == 0) for r in self.r):
            raise DegenerateTripleError("u, v and u - v must be nonzero")
        self.lam = (u.real / self.r[0], v.real / self.r[1], w.real / self.r[2])
        self.mu = (u.imag / self.r[0], v.imag / self.r[1], w.imag / self.r[2])
        perimeter = self.r[0] + self.r[1] + self.r[2]
        self.collinear = 0.5 * np.abs(cross(u, v)) < COLLINEAR_TOL * perimeter**2

    def kappas(self, m: int):
        """``kappa_m`` at ``u``, ``v`` and ``u - v``."""
        e = 2 * m - 1
        return tuple(lam**e / r for lam, r in zip(self.lam, self.r))

    def perm_kappa(self, m: int):
        k1, k2, k3 = self.kappas(m)
        return k1 * k2 + k1 * k3 - k2 * k3


def lambdas(u, v) -> LambdaTuple:
    s = EdgeShape(u, v)
    l1, l2, l3 = (scalar_or_array(x) for x in s.lam)
    return LambdaTuple(l1, l2, l3, scalar_or_array(s.lam[0] * s.lam[1] * s.lam[2]))


class Quadratic(NamedTuple):
    """``c0 + c1 * t + c2 * t**2``: constant, cross and leading coefficients."""

    c0: float
    c1: float
    c2: float

    def __call__(self, t):
        return self.c0 + t * (self.c1 + t * self.c2)

    def roots(self):
        """Real roots in increasing order, or None (scalar coefficients only)."""
        return quadratic_roots(self.c0, self.c1, self.c2)


def quadratic_roots(c0, c1, c2):
    """Real roots of ``c0 + c1 t + c2 t^2`` (cancellation-free form), or None."""
    if c2 == 0:
        return None
    disc = c1 * c1 - 4 * c0 * c2
    if disc < 0:
        return None
    q = -0.5 * (c1 + np.copysign(np.sqrt(disc), c1))
    if q == 0:
        return (0.0, 0.0)
    r1, r2 = float(q / c2), float(c0 / q)
    return (min(r1, r2), max(r1, r2))


def _check_pair(n: int, N: int) -> None:
    KernelParams(n, N)


def decompose_quadratic(n: int, N: int, u, v, *, extended: bool = True) -> Quadratic:
    """Coefficients of ``t -> perm_origin(K_t, u, v)`` with ``K_t = kappa_N + t kappa_n``.

    ``c0`` is the permutation of kappa_N, ``c2`` that of kappa_n and ``c1`` the
    cross term mixing the two.  ``extended=False`` trades the extended
    precision evaluation for plain float64 speed.
    """
    _check_pair(n, N)
    s = EdgeShape(u, v, extended)
    k1, k2, k3 = s.kappas(n)
    K1, K2, K3 = s.kappas(N)
    c0 = K1 * K2 + K1 * K3 - K2 * K3
    c2 = k1 * k2 + k1 * k3 - k2 * k3
    c1 = K1 * (k2 + k3) + K2 * (k1 - k3) + K3 * (k1 - k2)
    return Quadratic(*(_zero_if_collinear(c, s.collinear) for c in (c0, c1, c2)))


def _kappa_exact(m: int, x: Fraction, y: Fraction) -> Fraction:
    return x ** (2 * m - 1) / (x * x + y * y) ** m


def decompose_quadratic_exact(n: int, N: int, u: complex, v: complex) -> Quadratic:
    """Same coefficients in exact rational arithmetic (inputs taken as exact binary values)."""
    _check_pair(n, N)
    u, v = complex(u), complex(v)
    pts = [(Fraction(w.real), Fraction(w.imag)) for w in (u, v, u - v)]
    if any(x == 0 and y == 0 for x, y in pts):
        raise DegenerateTripleError("u, v and u - v must be nonzero")
    ux, uy = pts[0]
    vx, vy = pts[1]
    # u - v recomputed exactly rather than from the rounded complex difference
    pts[2] = (ux - vx, uy - vy)
    k = [_kappa_exact(n, x, y) for x, y in pts]
    K = [_kappa_exact(N, x, y) for x, y in pts]
    c0 = K[0] * K[1] + K[0] * K[2] - K[1] * K[2]
    c2 = k[0] * k[1] + k[0] * k[2] - k[1] * k[2]
    c1 = K[0] * (k[1] + k[2]) + K[1] * (k[0] - k[2]) + K[2] * (k[0] - k[1])
    return Quadratic(c0, c1, c2)


def perm_kappa_from_lambdas(n: int, u, v):
    """Permutation of kappa_n written in shape coordinates and edge lengths."""
    check_order(n)
    s = EdgeShape(u, v)
    l1, l2, l3 = s.lam
    a, b, c = s.r
    e = 2 * n - 1
    value = (l1 * l2) ** e / (a * b) + (l1 * l3) ** e / (a * c) - (l2 * l3) ** e / (b * c)
    return _zero_if_collinear(value, s.collinear)


def cross_term_from_lambdas(n: int, N: int, u, v):
    """The linear coefficient ``c1`` written in shape coordinates and edge lengths."""
    _check_pair(n, N)
    s = EdgeShape(u, v)
    l1, l2, l3 = s.lam
    a, b, c = s.r
    e, E = 2 * n - 1, 2 * N - 1
    value = (l1**E / a * (l2**e / b + l3**e / c)
             + l2**E / b * (l1**e / a - l3**e / c)
             + l3**E / c * (l1**e / a - l2**e / b))
    return _zero_if_collinear(value, s.collinear)


class TauPair(NamedTuple):
    tau1: float
    tau2: float


def tau_pair(n: int, N: int, u, v) -> TauPair:
    """Split of the cross term as ``c1 = tau1 * perm(kappa_n) - tau2``.

    ``tau1`` is the sum of ``lambda_j^(2(N-n))``.  ``tau2`` is evaluated with
    the powers of ``cap_lambda`` distributed over the factors, so no negative
    exponent appears when ``N > 2n``.  It vanishes identically for ``N = 2n``
    and is returned as an exact zero there.
    """
    _check_pair(n, N)
    s = EdgeShape(u, v)
    l1, l2, l3 = s.lam
    a, b, c = s.r
    d = 2 * (N - n)
    tau1 = l1**d + l2**d + l3**d
    if N == 2 * n:
        tau2 = np.zeros(np.shape(tau1))
    else:
        e = 2 * n - 1
        tau2 = ((l1 * l2) ** e * l3**d / (a * b)
                + (l1 * l3) ** e * l2**d / (a * c)
                - (l2 * l3) ** e * l1**d / (b * c))
        tau2 = np.where(s.collinear, 0.0, tau2)
    return TauPair(scalar_or_array(tau1), scalar_or_array(tau2))


def h_basis(m: int, u, v) -> np.ndarray:
    """Nonnegative basis values ``h_1 .. h_m`` with
    ``perm(kappa_m) = sum_k C(m, k) cap_lambda^(2(m-k)) h_k``.

    Returned with the basis index along the first axis.
    """
    m = check_order(m)
    s = EdgeShape(u, v)
    l1, l2, l3 = s.lam
    m1, m2, m3 = s.mu
    a, b, c = s.r
    out = []
    for k in range(1, m + 1):
        e, f = 2 * k - 1, 2 * k
        h = ((l1 * l2) ** e * m3**f / (a * b)
             + (l1 * l3) ** e * m2**f / (a * c)
             - (l2 * l3) ** e * m1**f / (b * c))
        out.append(np.where(s.collinear, 0.0, h))
    return np.array(out)


def lambda_gap(u, v):
    """Smallest pairwise distance between the squared shape coordinates."""
    s = EdgeShape(u, v)
    sq = [x * x for x in s.lam]
    gap = np.minimum(np.minimum(np.abs(sq[0] - sq[1]), np.abs(sq[0] - sq[2])),
                     np.abs(sq[1] - sq[2]))
    return scalar_or_array(gap)


def _edge_angles(s: EdgeShape):
    # Angle of each edge measured from the vertical axis: sin = lambda, cos = mu.
    return tuple(np.arctan2(lam, mu) for lam, mu in zip(s.lam, s.mu))


def _geometric_block(x2, y2, m: int):
    """``(x2^m - y2^m) / (x2 - y2)`` as the division-free sum of ``x2^(m-1-j) y2^j``."""
    return sum(x2 ** (m - 1 - j) * y2**j for j in range(m))


def tau2_curvature_form(n: int, N: int, u, v):
    """tau2 for ``N > 2n`` expressed through the Menger curvature of ``(0, u, v)``.

    With edge angles ``alpha_j`` (``sin alpha_j = lambda_j``), ``m = N - 2n`` and
    ``A1, A2`` the geometric blocks in ``lambda_3^2`` and ``lambda_1^2`` (resp.
    ``lambda_2^2``)::

        V    = sin(a3 + a1) lambda1 A1 - sin(a3 + a2) lambda2 A2
        tau2 = c^2 / 4 * cap_lambda^(2n-1) * V / sin(a1 - a2)

    Angles are taken over the full circle, which makes this single
    expression valid for every orientation of the triangle.
    """
    _check_pair(n, N)
    if N <= 2 * n:
        raise ParameterError("the curvature form of tau2 needs N > 2n")
    s = EdgeShape(u, v)
    if np.any(lambda_gap(u, v) <= LAMBDA_GAP):
        raise DegenerateTripleError("squared shape coordinates are not pairwise distinct")
    m = N - 2 * n
    l1, l2, l3 = s.lam
    a1, a2, a3 = _edge_angles(s)
    sq1, sq2, sq3 = l1 * l1, l2 * l2, l3 * l3
    big_v = (np.sin(a3 + a1) * l1 * _geometric_block(sq3, sq1, m)
             - np.sin(a3 + a2) * l2 * _geometric_block(sq3, sq2, m))
    a, b, c = s.r
    curv_sq = 4 * cross(s.u, s.v) ** 2 / (a * b * c) ** 2
    cap = l1 * l2 * l3
    return scalar_or_array(0.25 * curv_sq * cap ** (2 * n - 1) * big_v / np.sin(a1 - a2))


def b_vk(v: int, k: int, a1, a2, a3):
    """``sin(a3+a1) sin((2v+1-2k) a1) - sin(a3+a2) sin((2v+1-2k) a2)``."""
    r = 2 * v + 1 - 2 * k
    return np.sin(a3 + a1) * np.sin(r * a1) - np.sin(a3 + a2) * np.sin(r * a2)


def v_from_b_terms(m: int, a1, a2, a3):
    """The function ``V`` of the curvature form, expanded through ``b_vk``.

    Uses ``sin^(2v+1) x = 4^-v sum_k (-1)^(v-k) C(2v+1, k) sin((2v+1-2k) x)``.
    """
    l3sq = np.sin(a3) ** 2
    total = 0.0
    for v in range(m):
        inner = sum((-1) ** (v - k) * comb(2 * v + 1, k) * b_vk(v, k, a1, a2, a3)
                    for k in range(v + 1))
        total = total + l3sq ** (m - 1 - v) * inner / 4**v
    return total


def v_direct(m: int, a1, a2, a3):
    """``V`` from its definition with geometric blocks in ``sin^2`` of the angles."""
    s1, s2, s3 = np.sin(a1), np.sin(a2), np.sin(a3)
    return (np.sin(a3 + a1) * s1 * _geometric_block(s3 * s3, s1 * s1, m)
            - np.sin(a3 + a2) * s2 * _geometric_block(s3 * s3, s2 * s2, m))


def _check_sigma_order(m) -> int:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or not 1 <= m <= 30:
        raise ParameterError("sigma is defined here for integers 1 <= m <= 30")
    return int(m)


def sigma(m: int) -> Fraction:
    """``sum_{v<m} 4^-v sum_{k<=v} C(2v+1, k) (2v-2k+1)``, exactly."""
    m = _check_sigma_order(m)
    return sum((Fraction(sum(comb(2 * v + 1, k) * (2 * v - 2 * k + 1) for k in range(v + 1)),
                         4**v) for v in range(m)), Fraction(0))


def sigma_closed(m: int) -> Fraction:
    """Closed form ``(4m^2 - 1) / (3 * 4^(m-1)) * C(2m-2, m-1)``."""
    m = _check_sigma_order(m)
    return Fraction((4 * m * m - 1) * comb(2 * m - 2, m - 1), 3 * 4 ** (m - 1))


def vector_perm(n: int, N: int, t: float, x1, x2, x3):
    """Sum over coordinates ``j`` of the permutation of ``kappa_N^j + t kappa_n^j`` in R^d.

    Points have shape ``(d,)`` or ``(m, d)``.
    """
    p = KernelParams(n, N, t)
    x1, x2, x3 = (np.asarray(x, dtype=np.longdouble) for x in (x1, x2, x3))
    a, b, c = x2 - x1, x3 - x1, x3 - x2
    la, lb, lc = (np.hypot.reduce(e, axis=-1) for e in (a, b, c))
    if np.any(la == 0) or np.any(lb == 0) or np.any(lc == 0):
        raise DegenerateTripleError("triple has coincident points")
    gram = np.einsum("...i,...i", a, a) * np.einsum("...i,...i", b, b) \
        - np.einsum("...i,...i", a, b) ** 2
    area = 0.5 * np.sqrt(np.maximum(gram, 0.0))
    collinear = area < COLLINEAR_TOL * (la + lb + lc) ** 2

    def kern(j, w):
        return kappa_coord(p.N, j, w) + p.t * kappa_coord(p.n, j, w)

    total = 0.0
    for j in range(1, x1.shape[-1] + 1):
        total = total + (kern(j, x1 - x2) * kern(j, x1 - x3)
                         + kern(j, x2 - x1) * kern(j, x2 - x3)
                         + kern(j, x3 - x1) * kern(j, x3 - x2))
    return _zero_if_collinear(total, collinear)
