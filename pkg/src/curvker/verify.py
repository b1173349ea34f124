"""Randomised identity and inequality checks across the whole library.

Each check draws its own samples from a seeded generator and reports how many
of them failed.  The same suite backs the ``verify`` command and the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from . import datasets, measures
from .geometry import (
    Triple,
    angle_predicates,
    line_angles,
    menger_curvature,
    natural_scale,
    sample_triples,
)
from .kernels import KernelParams, kappa, kappa_kernel, kernel_kt
from .permutations import (
    LAMBDA_GAP,
    b_vk,
    cross_term_from_lambdas,
    decompose_quadratic,
    lambda_gap,
    lambdas,
    melnikov_rhs,
    perm3,
    perm_kappa_from_lambdas,
    sigma,
    sigma_closed,
    tau2_curvature_form,
    tau_pair,
)
from .search import example1
from .thresholds import (
    Branch,
    endpoint_constants,
    excluded_interval,
    interval_branch,
    lower_bound_constant,
    surrogate_value,
    Surrogate,
    upsilon,
)


@dataclass
class CheckResult:
    name: str
    total: int
    failures: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.total > 0


def close_mask(actual, expected, rel: float, scale=0.0):
    """True where ``|actual - expected| > rel * max(|expected|, scale)``."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    bound = rel * np.maximum(np.abs(expected), scale)
    return np.abs(actual - expected) > bound


def _count(mask) -> int:
    return int(np.count_nonzero(mask))


def pairs_up_to(n_max: int, N_max: int):
    return [(n, N) for n in range(1, n_max + 1) for N in range(n + 1, N_max + 1)]


DECOMPOSITION_PAIRS = [(1, 2), (2, 4), (3, 6), (1, 3), (3, 7), (2, 7)]
T_SWEEP = np.linspace(-5.0, 5.0, 11)


# geometry ------------------------------------------------------------------


def check_curvature_invariance(rng, samples):
    tri = sample_triples(samples, rng)
    c = menger_curvature(tri)
    per = np.abs(tri.z1 - tri.z2) + np.abs(tri.z1 - tri.z3) + np.abs(tri.z2 - tri.z3)
    floor = 1.0 / per
    rot = np.exp(1j * rng.uniform(0, 2 * math.pi, samples))
    shift = rng.uniform(-5, 5, samples) + 1j * rng.uniform(-5, 5, samples)
    s = np.exp(rng.uniform(-3, 3, samples))
    moved = Triple(*(z * rot + shift for z in tri))
    bad = close_mask(menger_curvature(moved), c, 1e-10, floor)
    bad |= close_mask(menger_curvature(tri.conjugate()), c, 1e-10, floor)
    bad |= close_mask(menger_curvature(tri.scaled(s)) * s, c, 1e-10, floor)
    return samples, _count(bad), ""


def circumradius(tri: Triple):
    """Circumradius from the circumcentre solved as a 2x2 linear system."""
    z1, z2, z3 = (np.asarray(z, dtype=complex) for z in tri)
    b, c = z2 - z1, z3 - z1
    a11, a12, a21, a22 = b.real, b.imag, c.real, c.imag
    r1, r2 = np.abs(b) ** 2 / 2, np.abs(c) ** 2 / 2
    det = a11 * a22 - a12 * a21
    cx = (r1 * a22 - a12 * r2) / det
    cy = (a11 * r2 - a21 * r1) / det
    return np.hypot(cx, cy)


def check_curvature_circumradius(rng, samples):
    tri = sample_triples(samples, rng, min_shape=1e-3)
    bad = close_mask(menger_curvature(tri), 1.0 / circumradius(tri), 1e-9)
    return samples, _count(bad), ""


def check_angle_complement(rng, samples):
    d = rng.normal(size=samples) + 1j * rng.normal(size=samples)
    tv, th = line_angles(d)
    return samples, _count(np.abs(tv + th - math.pi / 2) > 1e-12), ""


def check_delta1_reformulation(rng, samples):
    from .geometry import triangle_stats

    tri = sample_triples(samples, rng)
    alpha0 = rng.uniform(0.05, 1.5, samples)
    st = triangle_stats(tri)
    sum_v, sum_h = sum(st.theta_v), sum(st.theta_h)
    pred = angle_predicates(tri, 0.7, 2.0).delta1
    alt = sum_h <= 1.5 * math.pi - 0.7
    clear = np.abs(sum_v - 0.7) > 1e-12
    bad = (pred != alt) & clear
    # random thresholds as well, through the angle sums directly
    bad2 = ((sum_v >= alpha0) != (sum_h <= 1.5 * math.pi - alpha0)) & (np.abs(sum_v - alpha0) > 1e-12)
    return 2 * samples, _count(bad) + _count(bad2), ""


# kernels -------------------------------------------------------------------


def check_kernel_symmetries(rng, samples):
    z = (rng.normal(size=samples) + 1j * rng.normal(size=samples)) * np.exp(rng.uniform(-4, 4, samples))
    s = np.exp(rng.uniform(-3, 3, samples))
    failures = 0
    total = 0
    for n, N in ((1, 2), (3, 7), (10, 40), (20, 64)):
        p = KernelParams(n, N, float(rng.uniform(-5, 5)))
        k = np.asarray(kernel_kt(p, z))
        floor = 1.0 / np.abs(z)
        failures += _count(close_mask(-np.asarray(kernel_kt(p, -z)), k, 1e-15, floor))
        failures += _count(close_mask(np.asarray(kernel_kt(p, s * z)) * s, k, 1e-12, floor))
        for m in (n, N):
            km = np.asarray(kappa(m, z))
            failures += _count(np.abs(km) > 1.0 / np.abs(z) * (1 + 1e-15))
            failures += _count(np.asarray(kappa(m, np.conj(z))) != km)
        total += 6 * samples
    return total, failures, ""


# permutations ----------------------------------------------------------------


def check_perm_invariances(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    p = KernelParams(2, 5, float(rng.uniform(-3, 3)))
    base = np.asarray(perm3(p, tri))
    shift = rng.uniform(-3, 3, samples) + 1j * rng.uniform(-3, 3, samples)
    s = np.exp(rng.uniform(-2, 2, samples))
    bad = close_mask(perm3(p, tri.translated(shift)), base, 1e-11, scale)
    bad |= close_mask(np.asarray(perm3(p, tri.scaled(s))) * s * s, base, 1e-11, scale)
    bad |= close_mask(perm3(p, tri.conjugate()), base, 1e-11, scale)
    bad |= close_mask(perm3(p, tri.scaled(-1.0)), base, 1e-11, scale)
    return samples, _count(bad), ""


def check_melnikov(rng, samples):
    tri = sample_triples(samples, rng)
    c = np.asarray(menger_curvature(tri))
    return samples, _count(close_mask(melnikov_rhs(tri), c * c, 1e-9)), ""


def check_quarter(rng, samples):
    tri = sample_triples(samples, rng)
    c = np.asarray(menger_curvature(tri))
    return samples, _count(close_mask(perm3(kappa_kernel(1), tri), c * c / 4, 1e-9)), ""


def check_kappa_nonnegative(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    fails = 0
    for n in range(1, 11):
        fails += _count(np.asarray(perm3(kappa_kernel(n), tri)) < -1e-12 * scale)
    line = Triple(np.zeros(samples, complex), rng.normal(size=samples) * (1 + 2j),
                  rng.normal(size=samples) * (1 + 2j))
    line = Triple(line.z1, np.where(line.z2 == line.z3, 1 + 2j, line.z2), line.z3)
    for n in (1, 5):
        fails += _count(np.asarray(perm3(kappa_kernel(n), line)) != 0)
    return 12 * samples, fails, ""


def check_comparison(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    u, v = tri.to_origin()
    cap = np.asarray(lambdas(u, v).cap_lambda)
    fails = 0
    pairs = pairs_up_to(7, 8)
    perms = {m: np.asarray(perm3(kappa_kernel(m), tri)) for m in range(1, 9)}
    for n, N in pairs:
        lhs = (N / n) * cap ** (2 * (N - n)) * perms[n]
        fails += _count(lhs > perms[N] + 1e-12 * scale)
    return len(pairs) * samples, fails, ""


def check_lambda_forms(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    u, v = tri.to_origin()
    fails = 0
    for n, N in DECOMPOSITION_PAIRS:
        direct = perm3(kappa_kernel(n), tri)
        fails += _count(close_mask(perm_kappa_from_lambdas(n, u, v), direct, 1e-10, scale))
        c1 = decompose_quadratic(n, N, u, v).c1
        fails += _count(close_mask(cross_term_from_lambdas(n, N, u, v), c1, 1e-10, scale))
    return 2 * len(DECOMPOSITION_PAIRS) * samples, fails, ""


def check_decomposition(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    u, v = tri.to_origin()
    fails = 0
    for n, N in DECOMPOSITION_PAIRS:
        q = decompose_quadratic(n, N, u, v)
        for t in T_SWEEP:
            fails += _count(close_mask(q(t), perm3(KernelParams(n, N, t), tri), 1e-10, scale))
    return len(DECOMPOSITION_PAIRS) * len(T_SWEEP) * samples, fails, ""


def check_tau_split(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    u, v = tri.to_origin()
    fails = 0
    for n, N in DECOMPOSITION_PAIRS:
        q = decompose_quadratic(n, N, u, v)
        tau1, tau2 = tau_pair(n, N, u, v)
        fails += _count(close_mask(tau1 * q.c2 - tau2, q.c1, 1e-10, scale))
        if N == 2 * n:
            fails += _count(np.asarray(tau2) != 0)
    return len(DECOMPOSITION_PAIRS) * samples, fails, ""


def tau2_pairs():
    return [(n, N) for n in range(1, 4) for N in range(2 * n + 1, 13)]


def check_tau2_bound(rng, samples):
    from .thresholds import rho

    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    u, v = tri.to_origin()
    fails = 0
    pairs = tau2_pairs()
    for n, N in pairs:
        tau2 = np.asarray(tau_pair(n, N, u, v).tau2)
        pk = np.asarray(decompose_quadratic(n, N, u, v).c2)
        fails += _count(np.abs(tau2) > rho(n, N) * pk + 1e-12 * scale)
    return len(pairs) * samples, fails, ""


def check_tau2_curvature_form(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    u, v = tri.to_origin()
    ok = np.asarray(lambda_gap(u, v)) > LAMBDA_GAP
    u, v, scale = u[ok], v[ok], scale[ok]
    fails = 0
    pairs = tau2_pairs()
    for n, N in pairs:
        direct = tau_pair(n, N, u, v).tau2
        fails += _count(close_mask(tau2_curvature_form(n, N, u, v), direct, 1e-9, 1e-9 * scale))
    return len(pairs) * int(ok.sum()), fails, f"{int(ok.sum())} of {samples} triples in domain"


def check_b_bound(rng, samples):
    a1, a2, a3 = (rng.uniform(-math.pi, math.pi, samples) for _ in range(3))
    fails = 0
    total = 0
    for v in range(6):
        for k in range(v + 1):
            b = b_vk(v, k, a1, a2, a3)
            fails += _count(np.abs(b) > (2 * v - 2 * k + 1) * np.abs(np.sin(a1 - a2)) + 1e-12)
            total += samples
    return total, fails, ""


def check_sigma(rng, samples):
    # sigma(m) <= m^(3/2) compared exactly through squares
    fails = sum(1 for m in range(1, 21)
                if sigma(m) != sigma_closed(m) or sigma(m) ** 2 > Fraction(m) ** 3)
    return 20, fails, ""


# thresholds ------------------------------------------------------------------


def check_branch_agreement(rng, samples):
    fails = 0
    for n in range(1, 33):
        a = interval_branch(n, 2 * n, Branch.N_LE_2N)
        b = interval_branch(n, 2 * n, Branch.N_GE_2N)
        fails += int((a.left, a.right) != (b.left, b.right) or (a.left, a.right) != (-2.0, 0.0))
    return 32, fails, ""


def _threshold_pairs():
    return pairs_up_to(4, 10)


def check_endpoint_positivity(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    u, v = tri.to_origin()
    fails = total = 0
    for n, N in _threshold_pairs():
        q = decompose_quadratic(n, N, u, v)
        iv = excluded_interval(n, N)
        for t in (iv.left, iv.right):
            fails += _count(np.asarray(q(t)) < -1e-12 * scale)
            total += samples
    return total, fails, ""


def check_lower_bound(rng, samples):
    tri = sample_triples(samples, rng)
    scale = np.asarray(natural_scale(tri))
    u, v = tri.to_origin()
    fails = total = 0
    for n, N in _threshold_pairs():
        q = decompose_quadratic(n, N, u, v)
        iv = excluded_interval(n, N)
        for t in (iv.left - 3, iv.left - 0.5, iv.left - 1e-3, iv.right + 1e-3, iv.right + 0.5,
                  iv.right + 3):
            c = lower_bound_constant(n, N, t)
            if c is None or c <= 0:
                fails += samples
            else:
                fails += _count(np.asarray(q(t)) < c * np.asarray(q.c2) - 1e-12 * scale)
            total += samples
    return total, fails, ""


ENDPOINT_ALPHA0 = math.pi / 3
ENDPOINT_TAU = 4.0


def check_endpoint_curvature_ratio(rng, samples):
    """At each endpoint, perm3(K_t) / c^2 stays above a positive constant on filtered triples."""
    tri = sample_triples(samples, rng)
    pred = angle_predicates(tri, ENDPOINT_ALPHA0, ENDPOINT_TAU)
    c = np.asarray(menger_curvature(tri))
    u, v = tri.to_origin()
    worst = math.inf
    fails = total = 0
    for n, N in _threshold_pairs():
        q = decompose_quadratic(n, N, u, v)
        iv = excluded_interval(n, N)
        for t, keep in ((iv.right, pred.in_otau & pred.delta1),
                        (iv.left, pred.in_otau & pred.delta1 & pred.delta2)):
            if not keep.any():
                continue
            ratio = np.asarray(q(t))[keep] / c[keep] ** 2
            worst = min(worst, float(ratio.min()))
            fails += _count(ratio <= 0)
            total += int(keep.sum())
    return total, fails, f"infimum of perm/c^2 over filtered samples: {worst:.3e}"


def check_surrogate_monotone(rng, samples):
    grid = np.linspace(0, 1, 6)
    x1, x2, x3 = np.meshgrid(grid, grid, grid, indexing="ij")
    fails = total = 0
    for n, N in _threshold_pairs():
        ratio = N / n
        small = Surrogate.F_SMALL if N <= 2 * n else Surrogate.G_SMALL
        for t in (0.0, 0.5, 2.0):
            f = surrogate_value(small, n, N, t, x1, x2, x3)
            for ax in range(3):
                fails += _count(np.diff(f, axis=ax) < -1e-12)
            total += 3
        if N <= 2 * n:
            for t in (-ratio, -ratio - 1, -ratio - 5):
                f = surrogate_value(Surrogate.F_LARGE, n, N, t, x1, x2, x3)
                for ax in range(3):
                    fails += _count(np.diff(f, axis=ax) > 1e-12)
                total += 3
    return total, fails, ""


def check_upsilon(rng, samples):
    tri = sample_triples(samples, rng)
    u, v = tri.to_origin()
    pred = angle_predicates(tri, ENDPOINT_ALPHA0, ENDPOINT_TAU)
    keep = pred.delta2 & pred.in_otau
    fails = total = 0
    for n, N in _threshold_pairs():
        ups = np.asarray(upsilon(n, N, u, v))
        c2 = endpoint_constants(ENDPOINT_ALPHA0, ENDPOINT_TAU, n, N).c2
        fails += _count(ups < -1e-12) + _count(ups[keep] < c2)
        total += samples
    return total, fails, ""


# search ----------------------------------------------------------------------


def check_symmetric_positivity(rng, samples):
    """``(0, (a, 1), (a, -1))`` has a positive K_t permutation away from one t per a."""
    fails = total = 0
    for n, N in ((1, 2), (2, 5), (3, 7), (1, 6)):
        a = np.exp(rng.uniform(-2, 2, samples))
        t = rng.uniform(-8, 8, samples)
        keep = np.abs((a * a / (1 + a * a)) ** (N - n) + t) > 1e-6
        q = decompose_quadratic(n, N, a[keep] + 1j, a[keep] - 1j)
        fails += _count(~(np.asarray(q(t[keep])) > 0))
        total += int(keep.sum())
    return total, fails, ""


def check_negative_family_roots(rng, samples):
    fails = total = 0
    for n, N in ((1, 2), (2, 4), (3, 6), (1, 3), (3, 7)):
        for a in (0.1, 0.5, 1.0, 2.0, 10.0):
            ex = example1(a, n, N)
            q = decompose_quadratic(n, N, *ex.triple.to_origin())
            roots = q.roots()
            total += 1
            if roots is None or close_mask(roots, (ex.t1, ex.t2), 1e-9).any():
                fails += 1
    return total, fails, ""


# measures and datasets -------------------------------------------------------


def _cloud(rng, count):
    return measures.DiscreteMeasure(rng.uniform(size=(count, 2)), rng.uniform(0.5, 1.5, count))


def brute_energy_unordered(mu, value_fn, eps=0.0) -> float:
    """Six times the sum over unordered triples, each value from ``value_fn(triple)``."""
    z, w = mu.points, mu.weights
    m = len(z)
    dist = np.abs(z[:, None] - z[None, :])
    total = []
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                d = (dist[i, j], dist[i, k], dist[j, k])
                if min(d) == 0 or min(d) < eps:
                    continue
                total.append(float(value_fn(Triple(z[i], z[j], z[k]))) * w[i] * w[j] * w[k])
    return 6.0 * math.fsum(total)


def check_energy_oracle(rng, samples):
    fails = total = 0
    for _ in range(max(2, samples // 5000)):
        mu = _cloud(rng, int(rng.integers(3, 13)))
        eps = float(rng.choice([0.0, 0.1, 0.3]))
        ref = brute_energy_unordered(mu, lambda t: menger_curvature(t) ** 2, eps)
        fails += int(close_mask(measures.curvature_energy(mu, eps), ref, 1e-12, 1e-300))
        p = KernelParams(1, 3, float(rng.uniform(-4, 2)))
        ref = brute_energy_unordered(mu, lambda t: perm3(p, t), eps)
        got = measures.perm_energy(mu, p, eps)
        scale = float(mu.mass**3 / mu.diameter**2)
        fails += int(close_mask(got, ref, 1e-12, 1e-9 * scale))
        total += 2
    return total, fails, ""


def check_energy_properties(rng, samples):
    fails = total = 0
    for _ in range(max(2, samples // 5000)):
        mu = _cloud(rng, 30)
        base = measures.curvature_energy(mu)
        quarter = measures.perm_energy(mu, kappa_kernel(1))
        fails += int(close_mask(quarter, base / 4, 1e-9))
        energies = [measures.curvature_energy(mu, e) for e in (0.0, 0.05, 0.1, 0.2, 0.4)]
        fails += int(any(b > a for a, b in zip(energies, energies[1:])))
        s = float(np.exp(rng.uniform(-2, 2)))
        scaled = measures.DiscreteMeasure(mu.points * s, mu.weights)
        fails += int(close_mask(measures.curvature_energy(scaled) * s * s, base, 1e-10))
        n, N = 1, 3
        iv = excluded_interval(n, N)
        for t in (iv.left - 1, iv.right + 1):
            c = lower_bound_constant(n, N, t)
            lhs = measures.perm_energy(mu, KernelParams(n, N, t))
            rhs = c * measures.perm_energy(mu, kappa_kernel(n))
            tol = 1e-9 * abs(rhs) + 1e-12 * mu.mass**3 / mu.diameter**2
            fails += int(lhs < rhs - tol)
        total += 5
    return total, fails, ""


def check_beta_optimality(rng, samples):
    from .geometry import Line

    fails = total = 0
    for _ in range(max(4, samples // 2000)):
        mu = _cloud(rng, 40)
        res = measures.beta_numbers(mu, 0.5 + 0.5j, 0.5, 2.0)
        for da, do in ((1e-3, 0), (-1e-3, 0), (0, 1e-3), (0, -1e-3)):
            other = Line(res.line.angle + da, res.line.offset + do)
            b2 = measures.beta_numbers(mu, 0.5 + 0.5j, 0.5, 2.0, other).beta2
            fails += int(b2 < res.beta2)
            total += 1
    return total, fails, ""


def check_datasets(rng, samples):
    fails = total = 0
    for k in range(0, 7):
        mu = datasets.cantor4(k)
        fails += int(math.fsum(mu.weights) != 1.0)
        roundtrip = datasets.parse_json(datasets.to_json(mu)).measure
        fails += int(roundtrip != mu)
        total += 2
    for slope in (0.0, 0.5, 2.0):
        mu = datasets.lipschitz_graph(slope, 120, int(rng.integers(2**31)))
        x, y = mu.points.real, mu.points.imag
        dx = x[:, None] - x[None, :]
        off = dx != 0
        lip = np.max(np.abs(y[:, None] - y[None, :])[off] / np.abs(dx[off]))
        fails += int(lip > slope + 1e-12)
        fails += int(measures.growth_constant(mu) > 2 * math.sqrt(1 + slope * slope))
        total += 2
    return total, fails, ""


CHECKS: dict[str, Callable] = {
    "geometry.curvature_invariance": check_curvature_invariance,
    "geometry.curvature_circumradius": check_curvature_circumradius,
    "geometry.angle_complement": check_angle_complement,
    "geometry.delta1_reformulation": check_delta1_reformulation,
    "kernels.symmetries": check_kernel_symmetries,
    "permutations.invariances": check_perm_invariances,
    "permutations.melnikov": check_melnikov,
    "permutations.quarter": check_quarter,
    "permutations.kappa_nonnegative": check_kappa_nonnegative,
    "permutations.comparison": check_comparison,
    "permutations.lambda_forms": check_lambda_forms,
    "permutations.decomposition": check_decomposition,
    "permutations.tau_split": check_tau_split,
    "permutations.tau2_bound": check_tau2_bound,
    "permutations.tau2_curvature_form": check_tau2_curvature_form,
    "permutations.b_bound": check_b_bound,
    "permutations.sigma": check_sigma,
    "thresholds.branch_agreement": check_branch_agreement,
    "thresholds.endpoint_positivity": check_endpoint_positivity,
    "thresholds.lower_bound": check_lower_bound,
    "thresholds.endpoint_curvature_ratio": check_endpoint_curvature_ratio,
    "thresholds.surrogate_monotone": check_surrogate_monotone,
    "thresholds.upsilon": check_upsilon,
    "search.symmetric_positivity": check_symmetric_positivity,
    "search.negative_family_roots": check_negative_family_roots,
    "measures.energy_oracle": check_energy_oracle,
    "measures.energy_properties": check_energy_properties,
    "measures.beta_optimality": check_beta_optimality,
    "datasets.generators": check_datasets,
}


def run_checks(samples: int = 10_000, seed: int = 0,
               only: Optional[Iterable[str]] = None) -> list[CheckResult]:
    """Run the named checks (all by default), each with its own seeded generator."""
    names = list(CHECKS) if only is None else list(only)
    results = []
    order = list(CHECKS)
    for name in names:
        if name not in CHECKS:
            raise KeyError(name)
        rng = np.random.default_rng([seed, order.index(name)])
        total, failures, detail = CHECKS[name](rng, samples)
        results.append(CheckResult(name, total, failures, detail))
    return results
