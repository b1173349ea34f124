"""Admissible values of t for which the K_t permutation keeps its sign.

For ``n < N`` the permutation of ``K_t = kappa_N + t kappa_n`` is nonnegative
for every triple whenever t lies outside an excluded open interval; outside
its closure it is even bounded below by a positive multiple of the
permutation of kappa_n.  This module computes the interval, the surrogate
polynomials that prove the bound and the constants used at the endpoints.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple, Optional

import numpy as np

from .errors import ParameterError
from .kernels import check_order
from .permutations import EdgeShape
from .geometry import scalar_or_array


class Branch(str, enum.Enum):
    N_LE_2N = "NleTwoN"
    N_GE_2N = "NgeTwoN"


class ExcludedInterval(NamedTuple):
    left: float
    right: float
    branch: Branch

    def contains(self, t: float) -> bool:
        """True for t strictly inside the open interval."""
        return self.left < t < self.right


def _check_pair(n: int, N: int) -> float:
    check_order(n)
    check_order(N)
    if not N > n:
        raise ParameterError(f"need N > n, got n={n}, N={N}")
    return N / n


def rho(n: int, N: int) -> float:
    """``(N/n - 2) * sqrt(N - 2n)`` for ``N >= 2n``."""
    ratio = _check_pair(n, N)
    if N < 2 * n:
        raise ParameterError("rho is defined only for N >= 2n")
    return (ratio - 2.0) * math.sqrt(N - 2 * n)


def _nz(x: float) -> float:
    return 0.0 if x == 0 else x


def interval_branch(n: int, N: int, branch: Branch) -> ExcludedInterval:
    """Evaluate one branch formula; each is valid on its own side of ``N = 2n``."""
    ratio = _check_pair(n, N)
    branch = Branch(branch)
    if branch is Branch.N_LE_2N:
        if N > 2 * n:
            raise ParameterError("this branch needs N <= 2n")
        left = -0.5 * (3.0 + math.sqrt(9.0 - 4.0 * ratio))
        right = 2.0 - ratio
    else:
        r = rho(n, N)
        left = -0.5 * (3.0 + r + math.sqrt((3.0 + r) ** 2 - 4.0 * ratio))
        right = r
    return ExcludedInterval(_nz(left), _nz(right), branch)


def excluded_interval(n: int, N: int) -> ExcludedInterval:
    """Open interval of t where nonnegativity is not guaranteed."""
    _check_pair(n, N)
    branch = Branch.N_LE_2N if N <= 2 * n else Branch.N_GE_2N
    return interval_branch(n, N, branch)


class Surrogate(str, enum.Enum):
    F_SMALL = "f"   # t >= 0, N <= 2n
    F_LARGE = "F"   # t <= 0, N <= 2n
    G_SMALL = "g"   # t >= 0, N > 2n
    G_LARGE = "G"   # t <= 0, N > 2n


def surrogate_kind(n: int, N: int, t: float) -> Surrogate:
    _check_pair(n, N)
    if N <= 2 * n:
        return Surrogate.F_SMALL if t >= 0 else Surrogate.F_LARGE
    return Surrogate.G_SMALL if t >= 0 else Surrogate.G_LARGE


def _shift(kind: Surrogate, n: int, N: int) -> float:
    if kind is Surrogate.F_SMALL:
        return 2.0 - N / n
    if kind is Surrogate.F_LARGE:
        return 0.0
    r = rho(n, N)
    return r if kind is Surrogate.G_SMALL else -r


def surrogate_value(kind: Surrogate, n: int, N: int, t: float, xi1, xi2, xi3):
    """``(N/n) xi1 xi2 xi3 + (xi1 + xi2 + xi3 - s) t + t^2`` for the given surrogate."""
    _check_pair(n, N)
    s = _shift(Surrogate(kind), n, N)
    return (N / n) * xi1 * xi2 * xi3 + (xi1 + xi2 + xi3 - s) * t + t * t


def surrogate(n: int, N: int, t: float, xi1, xi2, xi3):
    """Surrogate selected by the sign of t and by ``N <= 2n``; xi values lie in [0, 1].

    The permutation of K_t dominates ``surrogate * perm(kappa_n)`` when the
    xi are the even powers ``lambda_j^(2(N-n))`` of the shape coordinates.
    """
    if excluded_interval(n, N).contains(t):
        raise ParameterError(f"t={t} lies inside the excluded interval; no surrogate applies")
    for xi in (xi1, xi2, xi3):
        if np.any(np.asarray(xi) < 0) or np.any(np.asarray(xi) > 1):
            raise ParameterError("xi values must lie in [0, 1]")
    return surrogate_value(surrogate_kind(n, N, t), n, N, t, xi1, xi2, xi3)


def lower_bound_constant(n: int, N: int, t: float) -> Optional[float]:
    """Positive C with ``perm(K_t) >= C perm(kappa_n)``, or None on the closed interval."""
    interval = excluded_interval(n, N)
    kind = surrogate_kind(n, N, t)
    if t > interval.right:
        return float(surrogate_value(kind, n, N, t, 0.0, 0.0, 0.0))
    if t < interval.left:
        return float(surrogate_value(kind, n, N, t, 1.0, 1.0, 1.0))
    return None


class EndpointConstants(NamedTuple):
    c1: float
    c2: float
    eps0: float


def endpoint_constants(alpha0: float, tau: float, n: int, N: int) -> EndpointConstants:
    """``C1 = sin(alpha0/3)^(2(N-n))`` and ``C2 = 2/3 sin^4(alpha0 / (3 + pi tau^2))``."""
    _check_pair(n, N)
    if not 0 < alpha0 < math.pi / 2:
        raise ParameterError("alpha0 must lie in (0, pi/2)")
    if not tau >= 1:
        raise ParameterError("tau must be >= 1")
    c1 = math.sin(alpha0 / 3.0) ** (2 * (N - n))
    eps0 = alpha0 / (3.0 + math.pi * tau * tau)
    return EndpointConstants(c1, (2.0 / 3.0) * math.sin(eps0) ** 4, eps0)


def upsilon(n: int, N: int, u, v):
    """``2 + cap_lambda^(2(N-n)) - sum_j lambda_j^(2(N-n))``."""
    _check_pair(n, N)
    s = EdgeShape(u, v)
    d = 2 * (N - n)
    l1, l2, l3 = s.lam
    return scalar_or_array(2 + (l1 * l2 * l3) ** d - (l1**d + l2**d + l3**d))


def xi_values(n: int, N: int, u, v):
    """The surrogate arguments ``lambda_j^(2(N-n))`` of the triple ``(0, u, v)``."""
    _check_pair(n, N)
    s = EdgeShape(u, v)
    d = 2 * (N - n)
    return tuple(scalar_or_array(lam**d) for lam in s.lam)
