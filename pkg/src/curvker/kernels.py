"""The coordinate kernels kappa_n, the two-parameter family K_t and their R^d analogues.

Every kernel is evaluated through the unit ratio ``Re z / |z|`` raised to an
odd power and divided by ``|z|``; raw coordinate powers would overflow or
underflow long before the order cap is reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import KernelSingularityError, ParameterError
from .geometry import scalar_or_array

MAX_ORDER = 64


def check_order(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ParameterError(f"kernel order must be an integer, got {n!r}")
    if not 1 <= n <= MAX_ORDER:
        raise ParameterError(f"kernel order must lie in [1, {MAX_ORDER}], got {n}")
    return int(n)


def _as_complex(z) -> np.ndarray:
    """Complex array, keeping extended precision when the input already has it."""
    z = np.asarray(z)
    return z if z.dtype == np.clongdouble else z.astype(complex)


def _finish(x):
    # Extended-precision callers get extended precision back.
    return x if x.dtype == np.longdouble else scalar_or_array(x)


def _unit_ratio(z):
    z = _as_complex(z)
    r = np.abs(z)
    if np.any(r == 0):
        raise KernelSingularityError("kernel evaluated at the origin")
    return z.real / r, r


def kappa(n: int, z):
    """``(Re z)^(2n-1) / |z|^(2n)``."""
    n = check_order(n)
    lam, r = _unit_ratio(z)
    return _finish(lam ** (2 * n - 1) / r)


@dataclass(frozen=True)
class KernelParams:
    """Orders ``n < N`` and coefficient ``t`` of ``K_t = kappa_N + t * kappa_n``.

    Instances are callable and can be handed to :func:`curvker.permutations.perm3`.
    """

    n: int
    N: int
    t: float = 0.0

    def __post_init__(self):
        check_order(self.n)
        check_order(self.N)
        if not self.N > self.n:
            raise ParameterError(f"need N > n, got n={self.n}, N={self.N}")
        t = float(self.t)
        if not math.isfinite(t):
            raise ParameterError("t must be finite")
        object.__setattr__(self, "t", t)

    def __call__(self, z):
        return kernel_kt(self, z)

    def with_t(self, t: float) -> "KernelParams":
        return KernelParams(self.n, self.N, t)


def kernel_kt(p: KernelParams, z):
    lam, r = _unit_ratio(z)
    value = lam ** (2 * p.N - 1) / r + p.t * (lam ** (2 * p.n - 1) / r)
    return _finish(value)


def kappa_kernel(n: int):
    """``kappa_n`` as a one-argument callable."""
    check_order(n)
    return partial(kappa, n)


def kappa_coord(n: int, j: int, x):
    """``x_j^(2n-1) / |x|^(2n)`` for points of R^d (1-based ``j``).

    ``x`` has shape ``(d,)`` or ``(m, d)``.
    """
    n = check_order(n)
    x = np.asarray(x)
    if x.dtype != np.longdouble:
        x = x.astype(float)
    d = x.shape[-1]
    if not 1 <= j <= d:
        raise ParameterError(f"coordinate index {j} out of range 1..{d}")
    norm = np.hypot.reduce(x, axis=-1)
    if np.any(norm == 0):
        raise KernelSingularityError("kernel evaluated at the origin")
    lam = x[..., j - 1] / norm
    return _finish(lam ** (2 * n - 1) / norm)
