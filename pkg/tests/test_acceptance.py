"""End-to-end acceptance criteria, each at its stated tolerance.

Every test records a one-line verdict; the terminal summary prints them as
``PASS``/``FAIL`` lines (see ``conftest.py``).  Run just these with
``pytest tests/test_acceptance.py``.
"""

import csv
import io
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from curvker import cli, datasets
from curvker.geometry import Triple, menger_curvature, natural_scale, sample_triples
from curvker.kernels import KernelParams, kappa_kernel
from curvker.measures import (
    DiscreteMeasure,
    beta_numbers,
    curvature_energy,
    growth_constant,
    mv_residual,
    pair_kernel_matrix,
    perm_energy,
)
from curvker.permutations import (
    LAMBDA_GAP,
    decompose_quadratic,
    lambda_gap,
    lambdas,
    melnikov_rhs,
    perm3,
    sigma,
    tau2_curvature_form,
    tau_pair,
)
from curvker.search import (
    GUARANTEED_TOL,
    example1,
    example1_witness,
    example2,
    example2_finite_roots,
    min_over_shapes,
    normalized_perm,
    positive_t_slope_peak,
)
from curvker.thresholds import excluded_interval, rho

from .oracles import curvature_sq_q, kt_q, perm_q
from .test_measures import ordered_oracle, unordered_oracle

TRIPLES = 100_000


@pytest.fixture
def verdict(record_property):
    def record(label, ok, detail=""):
        record_property("criterion", label)
        record_property("detail", detail)
        return ok

    return record


def relative_failures(actual, expected, rel, scale=0.0):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    return int(np.count_nonzero(np.abs(actual - expected)
                                > rel * np.maximum(np.abs(expected), scale)))


@pytest.fixture(scope="module")
def big_sample():
    return sample_triples(TRIPLES, np.random.default_rng(2024))


def test_criterion_01_melnikov_identity(verdict, big_sample):
    start = time.perf_counter()
    c = np.asarray(menger_curvature(big_sample))
    fails = relative_failures(melnikov_rhs(big_sample), c * c, 1e-9)
    elapsed = time.perf_counter() - start
    assert verdict("1 Melnikov six-term sum equals c^2",
                   fails == 0 and elapsed < 5,
                   f"{fails} failures in {TRIPLES}, {elapsed:.2f} s")


def test_criterion_02_quarter_identity(verdict, big_sample):
    c = np.asarray(menger_curvature(big_sample))
    fails = relative_failures(perm3(kappa_kernel(1), big_sample), c * c / 4, 1e-9)
    assert verdict("2 perm(kappa_1) = c^2/4", fails == 0, f"{fails} failures in {TRIPLES}")


QUAD_PAIRS = [(1, 2), (2, 4), (3, 6), (1, 3), (3, 7), (2, 7)]
T_VALUES = np.linspace(-5, 5, 11)


@pytest.fixture(scope="module")
def quad_sample():
    return sample_triples(10_000, np.random.default_rng(7))


def test_criterion_03_quadratic_in_t(verdict, quad_sample):
    tri = quad_sample
    u, v = tri.to_origin()
    scale = np.asarray(natural_scale(tri))
    fails = 0
    for n, N in QUAD_PAIRS:
        q = decompose_quadratic(n, N, u, v)
        for t in T_VALUES:
            direct = perm3(KernelParams(n, N, t), tri)
            fails += relative_failures(q(t), direct, 1e-10, (1 + abs(t)) ** 2 * scale)
    total = len(QUAD_PAIRS) * len(T_VALUES) * len(u)
    assert verdict("3 quadratic decomposition reproduces perm(K_t)", fails == 0,
                   f"{fails} failures in {total}")


def test_criterion_04_cross_term_split(verdict, quad_sample):
    tri = quad_sample
    u, v = tri.to_origin()
    scale = np.asarray(natural_scale(tri))
    fails = nonzero = 0
    for n, N in QUAD_PAIRS:
        q = decompose_quadratic(n, N, u, v)
        tau1, tau2 = tau_pair(n, N, u, v)
        fails += relative_failures(tau1 * q.c2 - tau2, q.c1, 1e-10, scale)
        if N == 2 * n:
            nonzero += int(np.count_nonzero(tau2))
    assert verdict("4 cross term = tau1 perm(kappa_n) - tau2", fails == 0 and nonzero == 0,
                   f"{fails} split failures, {nonzero} nonzero tau2 at N = 2n")


def test_criterion_05_comparison_inequality(verdict, big_sample):
    tri = big_sample
    u, v = tri.to_origin()
    cap = np.asarray(lambdas(u, v).cap_lambda)
    scale = np.asarray(natural_scale(tri))
    perms = {m: np.asarray(perm3(kappa_kernel(m), tri)) for m in range(1, 9)}
    fails = 0
    for n in range(1, 8):
        for N in range(n + 1, 9):
            lhs = N / n * cap ** (2 * (N - n)) * perms[n]
            fails += int(np.count_nonzero(lhs > perms[N] + 1e-12 * scale))
    assert verdict("5 (N/n) cap^(2(N-n)) perm(kappa_n) <= perm(kappa_N)", fails == 0,
                   f"{fails} violations over 28 pairs x {TRIPLES}")


def test_criterion_06_tau2_bound(verdict, big_sample):
    tri = big_sample
    u, v = tri.to_origin()
    scale = np.asarray(natural_scale(tri))
    inside = np.asarray(lambda_gap(u, v)) > LAMBDA_GAP
    bound_fails = form_fails = 0
    for n in range(1, 4):
        for N in range(2 * n + 1, 13):
            tau2 = np.asarray(tau_pair(n, N, u, v).tau2)
            pk = np.asarray(perm3(kappa_kernel(n), tri))
            bound_fails += int(np.count_nonzero(np.abs(tau2) > rho(n, N) * pk + 1e-12 * scale))
            form = tau2_curvature_form(n, N, u[inside], v[inside])
            form_fails += relative_failures(form, tau2[inside], 1e-9, scale[inside])
    assert verdict("6 |tau2| <= rho perm(kappa_n); curvature form of tau2",
                   bound_fails == 0 and form_fails == 0,
                   f"{bound_fails} bound violations, {form_fails} form mismatches "
                   f"({int(inside.sum())} triples in the form's domain)")


def test_criterion_07_sigma(verdict):
    bad = []
    for m in range(1, 21):
        closed = Fraction((4 * m * m - 1) * math.comb(2 * m - 2, m - 1), 3 * 4 ** (m - 1))
        if sigma(m) != closed or sigma(m) ** 2 > m**3:
            bad.append(m)
    assert verdict("7 sigma double sum = closed form, sigma(m) <= m^1.5", not bad,
                   f"bad m: {bad}")


def _exterior_ts(n, N):
    iv = excluded_interval(n, N)
    return [iv.left, iv.right, iv.left - 0.1, iv.left - 1, iv.left - 5,
            iv.right + 0.1, iv.right + 1, iv.right + 5]


def test_criterion_08_nonnegativity_outside_interval(verdict):
    start = time.perf_counter()
    worst = (math.inf, None)
    for n in range(1, 5):
        for N in range(n + 1, 11):
            for t in _exterior_ts(n, N):
                value, _ = min_over_shapes(KernelParams(n, N, t))
                worst = min(worst, (value, (n, N, t)), key=lambda x: x[0])
    elapsed = time.perf_counter() - start
    assert verdict("8 min over shapes >= -1e-10 outside the excluded interval",
                   worst[0] >= -1e-10 and elapsed < 600,
                   f"worst {worst[0]:.3e} at (n, N, t) = {worst[1]}, {elapsed:.0f} s")


def test_criterion_09_sharpness_at_twice_n(verdict):
    missing = []
    for t in (-1.9, -1.5, -1.0, -0.5, -0.1):
        p = KernelParams(1, 2, t)
        tri = example1_witness(p)
        if tri is None or not perm3(p, tri) < 0:
            missing.append(t)
    endpoint_min = min(min_over_shapes(KernelParams(1, 2, t))[0] for t in (-2.0, 0.0))
    assert verdict("9 negative witnesses inside (-2, 0), none at -2 and 0",
                   not missing and endpoint_min >= -GUARANTEED_TOL,
                   f"missing witnesses at {missing}, endpoint minimum {endpoint_min:.3e}")


def test_criterion_10_negative_family(verdict):
    ex = example1(1.0, 1, 2)
    unit_ok = abs(ex.t1 + 1.5) <= 1.5e-12 and abs(ex.t2 + 0.5) <= 0.5e-12
    roots = np.array([example1(a, 1, 2)[4:] for a in np.logspace(-4, 4, 801)])
    # every (t1, t2) contains -1, so the union is (min t1, max t2)
    connected = bool(np.all((roots[:, 0] < -1) & (roots[:, 1] > -1)))
    delta = 0.01
    covers = roots[:, 0].min() < -2 + delta and roots[:, 1].max() > -delta
    assert verdict("10 roots (-3/2, -1/2) at a = 1; union covers (-2+d, -d)",
                   unit_ok and connected and covers,
                   f"roots {ex.t1!r}, {ex.t2!r}; envelope ({roots[:, 0].min():.5f}, "
                   f"{roots[:, 1].max():.5f})")


Q_PEAK = math.exp(1.5)


def _finite_root_errors():
    lim = example2(1, 50, Q_PEAK, 1e3)
    errs = []
    for r in (1e3, 1e4, 1e5):
        t1, t2 = example2_finite_roots(1, 50, Q_PEAK, r)
        errs.append((abs(t1 - lim.t1Lim), abs(t2 - lim.t2Lim)))
    return errs


def test_criterion_11_positive_family_limits(verdict):
    qs = np.geomspace(math.e, 1e3, 2001)
    ratios = [example2(1, 50, q, 1e3).t2Asym * q / ((2 * math.log(q) - 1) * 50) for q in qs[1:]]
    sup_ok = abs(max(ratios) - 1) <= 1e-6
    _, peak = positive_t_slope_peak()
    peak_ok = abs(peak - 2 * math.exp(-1.5)) <= 1e-9
    errs = _finite_root_errors()
    decreasing = all(b[0] < a[0] and b[1] < a[1] for a, b in zip(errs, errs[1:]))
    assert verdict("11a finite-r roots approach the limit roots; q-sweep sup and peak",
                   sup_ok and peak_ok and decreasing,
                   f"sup ratio {max(ratios)!r}, peak {peak!r}, errors {errs}")


@pytest.mark.xfail(strict=True, reason="convergence is first order in 1/r: the error "
                   "ratio per decade tends to 10 from below (9.99..), never reaching 10")
def test_criterion_11_tenfold_per_decade(verdict):
    errs = _finite_root_errors()
    factors = [(a[0] / b[0], a[1] / b[1]) for a, b in zip(errs, errs[1:])]
    assert verdict("11b error shrinks >= 10x per decade of r",
                   all(f >= 10 for pair in factors for f in pair),
                   "factors " + ", ".join(f"{a:.4f}/{b:.4f}" for a, b in factors))


def _random_small_measures(rng, count):
    for _ in range(count):
        m = int(rng.integers(1, 13))
        pts = rng.integers(-8, 9, size=(m, 2)) / 4
        if m > 3 and rng.random() < 0.3:
            pts[1] = pts[0]
        w = rng.integers(0, 5, size=m) / 2
        if w.sum() == 0:
            w[0] = 1.0
        yield pts, w


def test_criterion_12_energy_oracles(verdict):
    rng = np.random.default_rng(12)
    exact_fail = rel_fail = total = 0
    for pts, w in _random_small_measures(rng, 120):
        mu = DiscreteMeasure(pts, w)
        eps = float(rng.choice([0.0, 0.25, 0.5]))
        t = Fraction(int(rng.integers(-12, 9)), 4)
        p = KernelParams(1, 2, float(t))
        ce, pe = curvature_energy(mu, eps), perm_energy(mu, p, eps)
        exact_fail += ce != ordered_oracle(mu, eps)
        exact_fail += pe != ordered_oracle(mu, eps, pair_kernel_matrix(mu, p))
        ref = float(unordered_oracle(pts.tolist(), w.tolist(), curvature_sq_q, eps))
        rel_fail += abs(ce - ref) > 1e-12 * abs(ref)

        def kern(x, y):
            return kt_q(1, 2, t, x, y)

        ref = float(unordered_oracle(pts.tolist(), w.tolist(), lambda tri: perm_q(kern, tri), eps))
        mag = float(unordered_oracle(pts.tolist(), w.tolist(),
                                     lambda tri: perm_q(lambda x, y: abs(kern(x, y)), tri), eps))
        rel_fail += abs(pe - ref) > 1e-12 * max(abs(ref), mag)
        total += 2
    assert verdict("12 energies match ordered and unordered x6 oracles",
                   exact_fail == 0 and rel_fail == 0,
                   f"{exact_fail} inexact, {rel_fail} beyond 1e-12, {total} energies")


def test_criterion_13_mv_residual(verdict):
    worst_ratio, worst_bound, identity_ok = 0.0, 0.0, True
    for seed in range(5):
        mu = datasets.random_circle(50, seed)
        d = mu.distances()
        np.fill_diagonal(d, np.inf)
        eps0 = 2 * float(np.median(d.min(axis=1)))
        growth = growth_constant(mu)
        residuals = []
        for eps in np.geomspace(eps0, 10 * eps0, 5):
            res = mv_residual(mu, eps)
            identity_ok &= res.lhs == res.rhs_curvature + res.residual or math.isclose(
                res.lhs, res.rhs_curvature + res.residual, rel_tol=1e-15)
            identity_ok &= res.rhs_curvature == curvature_energy(mu, eps) / 6
            worst_bound = max(worst_bound, abs(res.residual) / (10 * growth**2 * mu.mass))
            residuals.append(abs(res.residual))
        worst_ratio = max(worst_ratio, max(residuals) / min(residuals))
    assert verdict("13 MV residual bounded across an eps-decade",
                   identity_ok and worst_bound <= 1 and worst_ratio <= 5,
                   f"max/min residual {worst_ratio:.3f}, |residual| / (10 C^2 mass) "
                   f"<= {worst_bound:.3f}")


def _top_scale_beta2(mu):
    lo = complex(mu.points.real.min(), mu.points.imag.min())
    hi = complex(mu.points.real.max(), mu.points.imag.max())
    return beta_numbers(mu, (lo + hi) / 2, mu.diameter / 2, 2.0).beta2


def test_criterion_14_geometry_discrimination(verdict):
    seg = datasets.segment(500)
    seg_energy = curvature_energy(seg)
    energies = [curvature_energy(datasets.cantor4(k)) for k in range(1, 6)]
    increasing = all(b > a for a, b in zip(energies, energies[1:]))
    seg_beta, cantor_beta = _top_scale_beta2(seg), _top_scale_beta2(datasets.cantor4(4))
    assert verdict("14 segment flat, Cantor energy grows, top-scale beta2 separates",
                   seg_energy == 0 and increasing and seg_beta <= 1e-9 and cantor_beta >= 0.05,
                   f"segment energy {seg_energy}, Cantor energies "
                   f"{[round(e, 3) for e in energies]}, beta2 {seg_beta:.1e} vs {cantor_beta:.3f}")


def test_criterion_15_energy_performance(verdict):
    mu = DiscreteMeasure(np.random.default_rng(15).uniform(size=(500, 2)),
                         np.full(500, 1 / 500))
    p = KernelParams(2, 5, -1.0)
    start = time.perf_counter()
    first = perm_energy(mu, p, threads=1)
    elapsed = time.perf_counter() - start
    outputs = {th: perm_energy(mu, p, threads=th).hex() for th in (1, 2, 8)}
    same = len(set(outputs.values())) == 1 and outputs[1] == first.hex()
    assert verdict("15 500-point perm energy < 60 s, identical for 1/2/8 threads",
                   same and elapsed < 60, f"{elapsed:.2f} s single-threaded, value {first!r}")


def test_criterion_16_figure_scan(verdict, tmp_path):
    out = io.StringIO()
    svg = tmp_path / "fig1.svg"
    start = time.perf_counter()
    code = cli.run(["scan", "--n", "3", "--Nmin", "4", "--Nmax", "12", "--tmin", "-8",
                    "--tmax", "4", "--tstep", "0.25", "--svg", str(svg)], out)
    elapsed = time.perf_counter() - start
    rows = list(csv.DictReader(io.StringIO(out.getvalue())))
    bad_guaranteed, missing_witness = [], []
    for row in rows:
        N, t = int(row["N"]), float(row["t"])
        iv = excluded_interval(3, N)
        if not iv.left < t < iv.right:
            if row["theory"] != "Guaranteed" or float(row["empiricalMin"]) < -GUARANTEED_TOL:
                bad_guaranteed.append((N, t))
        if -N / 3 < t < 0:
            coords = [float(x) for x in row["witness"].split()]
            if len(coords) != 6:
                missing_witness.append((N, t))
                continue
            tri = Triple(complex(*coords[0:2]), complex(*coords[2:4]), complex(*coords[4:6]))
            if not float(normalized_perm(KernelParams(3, N, t), tri)) < 0:
                missing_witness.append((N, t))
    ok = (code == 0 and len(rows) == 9 * 49 and not bad_guaranteed and not missing_witness
          and svg.exists() and elapsed < 900)
    assert verdict("16 n = 3 scan: Guaranteed cells nonnegative, (-N/3, 0) witnessed",
                   ok, f"exit {code}, {len(rows)} cells, {len(bad_guaranteed)} bad guaranteed, "
                       f"{len(missing_witness)} missing witnesses, {elapsed:.0f} s")
