"""Independent reference evaluations in exact rational or arbitrary-precision arithmetic."""

from fractions import Fraction
from itertools import permutations

import mpmath

mpmath.mp.dps = 50


def kappa_q(n, x, y):
    x, y = Fraction(x), Fraction(y)
    return x ** (2 * n - 1) / (x * x + y * y) ** n


def kt_q(n, N, t, x, y):
    return kappa_q(N, x, y) + Fraction(t) * kappa_q(n, x, y)


def perm_q(kernel, pts):
    """Symmetrised three-point sum on exact rational points ``(x, y)``."""
    (x1, y1), (x2, y2), (x3, y3) = [(Fraction(x), Fraction(y)) for x, y in pts]

    def k(ax, ay, bx, by):
        return kernel(ax - bx, ay - by)

    return (k(x1, y1, x2, y2) * k(x1, y1, x3, y3)
            + k(x2, y2, x1, y1) * k(x2, y2, x3, y3)
            + k(x3, y3, x1, y1) * k(x3, y3, x2, y2))


def curvature_sq_q(pts):
    """c^2 = 16 area^2 / (a^2 b^2 c^2), exact for rational points."""
    (x1, y1), (x2, y2), (x3, y3) = [(Fraction(x), Fraction(y)) for x, y in pts]
    cr = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
    a2 = (x2 - x1) ** 2 + (y2 - y1) ** 2
    b2 = (x3 - x1) ** 2 + (y3 - y1) ** 2
    c2 = (x3 - x2) ** 2 + (y3 - y2) ** 2
    return 4 * cr * cr / (a2 * b2 * c2)


def kappa_mp(n, z):
    z = mpmath.mpc(z)
    return z.real ** (2 * n - 1) / abs(z) ** (2 * n)


def perm_mp(kernel, tri):
    z1, z2, z3 = (mpmath.mpc(complex(z)) for z in tri)
    return (kernel(z1 - z2) * kernel(z1 - z3) + kernel(z2 - z1) * kernel(z2 - z3)
            + kernel(z3 - z1) * kernel(z3 - z2))


def melnikov_mp(tri):
    z = [mpmath.mpc(complex(w)) for w in tri]
    total = mpmath.mpc(0)
    for a, b, c in permutations(range(3)):
        total += 1 / ((z[b] - z[a]) * mpmath.conj(z[c] - z[a]))
    return total
