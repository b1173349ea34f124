import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvker.errors import KernelSingularityError, ParameterError
from curvker.kernels import KernelParams, kappa, kappa_coord, kappa_kernel, kernel_kt

from .oracles import kappa_mp, kappa_q, kt_q
from .strategies import point

nonzero = point.filter(lambda z: abs(z) > 1e-6)
orders = st.integers(1, 64)


def test_kappa_examples():
    assert kappa(1, 1 + 0j) == 1
    assert kappa(2, 1 - 1j) == pytest.approx(float(kappa_q(2, 1, -1)), rel=1e-15)
    assert float(kappa_q(2, 1, -1)) == 0.25
    assert kappa(1, 1j) == 0


def test_kernel_examples():
    assert kernel_kt(KernelParams(1, 2, -1), 1 + 0j) == 0
    assert KernelParams(1, 2, 0)(1 - 1j) == pytest.approx(0.25, rel=1e-15)
    assert KernelParams(1, 2, 2)(1 + 1j) == pytest.approx(float(kt_q(1, 2, 2, 1, 1)), rel=1e-15)
    assert float(kt_q(1, 2, 2, 1, 1)) == 1.25


def test_coordinate_kernel_examples():
    assert kappa_coord(1, 2, [1.0, 1.0, 1.0]) == pytest.approx(1 / 3, rel=1e-15)
    for n in (1, 5, 30):
        assert kappa_coord(n, 2, [1.0, 0.0, 0.0]) == 0


def test_errors():
    with pytest.raises(KernelSingularityError):
        kappa(1, 0j)
    with pytest.raises(KernelSingularityError):
        kappa_coord(1, 1, [0.0, 0.0])
    with pytest.raises(ParameterError):
        kappa_coord(1, 3, [1.0, 0.0])
    for bad in (0, 65, 1.5, True):
        with pytest.raises(ParameterError):
            kappa(bad, 1j + 1)
    with pytest.raises(ParameterError):
        KernelParams(2, 2)
    with pytest.raises(ParameterError):
        KernelParams(1, 2, math.inf)


def test_large_order_no_overflow():
    # raw powers of 1e200 would overflow long before order 64
    z = np.array([1e200 + 1e199j, 1e-200 + 3e-201j])
    values = kappa(64, z)
    assert np.all(np.isfinite(values))
    for zi, vi in zip(z, values):
        assert vi == pytest.approx(float(kappa_mp(64, zi)), rel=1e-12)


def test_vectorised_matches_scalar(rng):
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    batch = KernelParams(2, 5, -1.5)(z)
    assert batch.shape == (50,)
    for zi, bi in zip(z, batch):
        # vectorised |z| may differ from the scalar one in the last bit
        assert bi == pytest.approx(KernelParams(2, 5, -1.5)(complex(zi)), rel=1e-14)


@given(orders, nonzero)
def test_kappa_matches_high_precision(n, z):
    assert kappa(n, z) == pytest.approx(float(kappa_mp(n, z)), rel=1e-12, abs=1e-300)


@given(orders, orders, st.floats(-10, 10), nonzero)
def test_oddness(n, N, t, z):
    if N <= n:
        n, N = N, n + 1 if N == n else n
    if N > 64:
        return
    p = KernelParams(n, N, t)
    assert p(-z) == pytest.approx(-p(z), rel=1e-15, abs=1e-15 / abs(z))


@given(st.integers(1, 10), st.integers(1, 10), st.floats(-10, 10), nonzero, st.floats(1e-3, 1e3))
def test_homogeneity(n, extra, t, z, s):
    p = KernelParams(n, n + extra, t)
    # cancellation between the two terms is bounded by the natural scale 1/|z|
    scale = (1 + abs(t)) / abs(z) / s
    assert abs(p(s * z) - p(z) / s) <= 1e-12 * max(abs(p(z) / s), scale)


@given(orders, nonzero)
def test_bound_and_conjugation(n, z):
    assert abs(kappa(n, z)) <= 1 / abs(z) * (1 + 1e-15)
    assert kappa(n, z.conjugate()) == kappa(n, z)


@given(orders, nonzero)
def test_planar_coordinate_kernel_agrees(n, z):
    # the 2n-1 power amplifies the last-bit difference between hypot and abs
    expected = kappa(n, z)
    assert kappa_coord(n, 1, [z.real, z.imag]) == pytest.approx(expected, rel=4 * n * 2.3e-16,
                                                                 abs=1e-300)
    assert kappa_kernel(n)(z) == kappa(n, z)
