"""Command-line entry point ``curvker``.

Results go to stdout as JSON (or CSV for ``scan``).  Exit status is 0 on
success, 1 for invalid input and 2 when a computed result contradicts a
guaranteed property.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import datasets, measures, search, thresholds
from .errors import CurvkerError, InconsistencyError
from .geometry import Line, Triple, menger_curvature
from .kernels import KernelParams
from .parallel import THREADS_ENV, resolve_threads
from .permutations import decompose_quadratic, melnikov_rhs, perm3, tau_pair
from .verify import CHECKS, run_checks

EXIT_OK, EXIT_INVALID, EXIT_INCONSISTENT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def fmt(x) -> str:
    """Shortest round-trip decimal for a float."""
    return repr(float(x))


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _emit(obj, out) -> None:
    out.write(json.dumps(obj) + "\n")


def _triple_json(tri: Optional[Triple]):
    return None if tri is None else tri.as_pairs()


def _triple_arg(values) -> Triple:
    x1, y1, x2, y2, x3, y3 = values
    return Triple.of((x1, y1), (x2, y2), (x3, y3))


def _add_pair(p, t_default: Optional[float] = 0.0, need_t: bool = True):
    p.add_argument("--n", type=int, required=True, help="lower kernel order")
    p.add_argument("--N", type=int, required=True, help="upper kernel order")
    if need_t:
        p.add_argument("--t", type=float, default=t_default, help="coefficient of kappa_n")


def _add_points(p):
    p.add_argument("--points", type=float, nargs=6, required=True,
                   metavar=("X1", "Y1", "X2", "Y2", "X3", "Y3"))


# subcommands -------------------------------------------------------------


def cmd_perm(args, out):
    tri = _triple_arg(args.points)
    p = KernelParams(args.n, args.N, args.t)
    value = perm3(p, tri)
    per = sum(abs(a - b) for a, b in ((tri.z1, tri.z2), (tri.z1, tri.z3), (tri.z2, tri.z3)))
    _emit({"perm": _num(value), "normalized": _num(per**2 * value),
           "curvature": _num(menger_curvature(tri)), "melnikov": _num(melnikov_rhs(tri))}, out)
    return EXIT_OK


def cmd_decompose(args, out):
    tri = _triple_arg(args.points)
    u, v = tri.to_origin()
    q = decompose_quadratic(args.n, args.N, u, v)
    tau1, tau2 = tau_pair(args.n, args.N, u, v)
    roots = q.roots()
    _emit({"c0": _num(q.c0), "c1": _num(q.c1), "c2": _num(q.c2),
           "roots": None if roots is None else [_num(r) for r in roots],
           "tau1": _num(tau1), "tau2": _num(tau2)}, out)
    return EXIT_OK


def cmd_threshold(args, out):
    iv = thresholds.excluded_interval(args.n, args.N)
    rho = thresholds.rho(args.n, args.N) if args.N >= 2 * args.n else None
    doc = {"left": _num(iv.left), "right": _num(iv.right), "rho": _num(rho),
           "branch": iv.branch.value}
    if args.t is not None:
        doc["t"] = _num(args.t)
        doc["lowerBound"] = _num(thresholds.lower_bound_constant(args.n, args.N, args.t))
        doc["theory"] = search.classify_region(args.n, args.N, args.t).value
    _emit(doc, out)
    return EXIT_OK


def _grid(args) -> search.ShapeGrid:
    return search.ShapeGrid(args.alpha_steps, args.beta_steps, args.r_steps, args.r_max)


def scan_csv(cells) -> str:
    buf = io.StringIO()
    buf.write("N,t,theory,empiricalMin,witness\n")
    for c in cells:
        wit = "" if c.witness is None else " ".join(fmt(x) for pair in c.witness.as_pairs()
                                                    for x in pair)
        buf.write(f"{c.N},{fmt(c.t)},{c.theory.value},{fmt(c.empirical_min)},{wit}\n")
    return buf.getvalue()


COLORS = {
    search.Theory.GUARANTEED: "#2ca02c",
    search.Theory.KNOWN_NEGATIVE: "#1f4fbf",
    search.Theory.CONJECTURED_NEGATIVE: "#9ecae1",
    search.Theory.UNKNOWN: "#ffffff",
}


def scan_svg(cells, n: int) -> str:
    """Rect grid: one column per t, one row per N (largest N on top), fixed legend."""
    ts = sorted({c.t for c in cells})
    Ns = sorted({c.N for c in cells})
    cw, ch, left, top = 14, 22, 60, 30
    width = left + cw * len(ts) + 200
    height = top + ch * len(Ns) + 60
    col = {t: i for i, t in enumerate(ts)}
    row = {N: len(Ns) - 1 - i for i, N in enumerate(Ns)}
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'font-family="sans-serif" font-size="11">',
             f'<text x="{left}" y="16">sign of the K_t permutation, n = {n}</text>']
    for c in cells:
        x, y = left + cw * col[c.t], top + ch * row[c.N]
        parts.append(f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{COLORS[c.theory]}" '
                     f'stroke="#999999" stroke-width="0.5"><title>N={c.N} t={fmt(c.t)} '
                     f'{c.theory.value} min={fmt(c.empirical_min)}</title></rect>')
        if c.witness is not None:
            parts.append(f'<circle cx="{x + cw / 2}" cy="{y + ch / 2}" r="2.5" fill="#d62728"/>')
    for N in Ns:
        parts.append(f'<text x="{left - 8}" y="{top + ch * row[N] + ch / 2 + 4}" '
                     f'text-anchor="end">{N}</text>')
    base = top + ch * len(Ns)
    for t in ts:
        if float(t).is_integer():
            parts.append(f'<text x="{left + cw * col[t] + cw / 2}" y="{base + 14}" '
                         f'text-anchor="middle">{int(t)}</text>')
    parts.append(f'<text x="{left + cw * len(ts) / 2}" y="{base + 32}" text-anchor="middle">t</text>')
    parts.append(f'<text x="{left - 40}" y="{top + ch * len(Ns) / 2}">N</text>')
    lx = left + cw * len(ts) + 20
    for i, (theory, color) in enumerate(COLORS.items()):
        y = top + 20 * i
        parts.append(f'<rect x="{lx}" y="{y}" width="12" height="12" fill="{color}" stroke="#999999"/>')
        parts.append(f'<text x="{lx + 18}" y="{y + 10}">{theory.value}</text>')
    y = top + 20 * len(COLORS)
    parts.append(f'<circle cx="{lx + 6}" cy="{y + 6}" r="2.5" fill="#d62728"/>')
    parts.append(f'<text x="{lx + 18}" y="{y + 10}">negative witness</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_scan(args, out):
    cells = search.scan_figure(args.n, args.Nmin, args.Nmax, args.tmin, args.tmax, args.tstep,
                               _grid(args), refine_passes=args.refine, threads=args.threads)
    text = scan_csv(cells)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    if args.svg:
        Path(args.svg).write_text(scan_svg(cells, args.n))
    problems = [f"N={c.N} t={fmt(c.t)}: {msg}" for c in cells for msg in c.violations]
    if problems:
        raise InconsistencyError("; ".join(problems))
    return EXIT_OK


def cmd_example1(args, out):
    ex = search.example1(args.a, args.n, args.N)
    _emit({"triple": _triple_json(ex.triple), "d1": _num(ex.d1), "d2": _num(ex.d2),
           "d3": _num(ex.d3), "t1": _num(ex.t1), "t2": _num(ex.t2)}, out)
    return EXIT_OK


def cmd_example2(args, out):
    ex = search.example2(args.n, args.N, args.q, args.r)
    finite = search.example2_finite_roots(args.n, args.N, args.q, args.r)
    _emit({"cN": _num(ex.cN), "bN": _num(ex.bN), "t1Lim": _num(ex.t1Lim), "t2Lim": _num(ex.t2Lim),
           "t1Asym": _num(ex.t1Asym), "t2Asym": _num(ex.t2Asym), "triple": _triple_json(ex.triple),
           "finiteRoots": None if finite is None else [_num(r) for r in finite]}, out)
    return EXIT_OK


def cmd_energy(args, out):
    mu = datasets.load(args.input)
    doc = {"points": len(mu), "mass": _num(mu.mass), "eps": _num(args.eps)}
    if args.kind == "curvature":
        doc["curvatureEnergy"] = _num(measures.curvature_energy(mu, args.eps, threads=args.threads))
    elif args.kind == "perm":
        p = KernelParams(args.n, args.N, args.t)
        doc["permEnergy"] = _num(measures.perm_energy(mu, p, args.eps, threads=args.threads))
    else:
        res = measures.mv_residual(mu, args.eps, threads=args.threads)
        doc.update(lhs=_num(res.lhs), rhsCurvature=_num(res.rhs_curvature),
                   residual=_num(res.residual),
                   growthConstant=_num(measures.growth_constant(mu)))
    _emit(doc, out)
    return EXIT_OK


def cmd_beta(args, out):
    mu = datasets.load(args.input)
    line = None
    if args.line is not None:
        line = Line(*args.line)
    res = measures.beta_numbers(mu, tuple(args.x), args.r, args.k, line)
    _emit({"beta1": _num(res.beta1), "beta2": _num(res.beta2),
           "line": {"angle": _num(res.line.angle), "offset": _num(res.line.offset)}}, out)
    return EXIT_OK


GEN_PARAMS = {
    "cantor4": ("k",),
    "segment": ("count",),
    "circle": ("count", "mass"),
    "lipschitz": ("slope", "count", "seed"),
    "random_circle": ("count", "seed", "mass"),
}


def cmd_gen(args, out):
    params = {name: getattr(args, name) for name in GEN_PARAMS[args.kind]}
    missing = [k for k, v in params.items() if v is None and k not in ("mass",)]
    if missing:
        raise UsageError(f"gen {args.kind}: missing --{' --'.join(missing)}")
    mf = datasets.generate(args.kind, **params)
    text = datasets.to_json(mf.measure, mf.metadata)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_verify(args, out):
    results = run_checks(args.samples, args.seed, args.only)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failed += not r.passed
        extra = f"  ({r.detail})" if r.detail else ""
        out.write(f"{status} {r.name}: {r.failures} failures in {r.total} cases{extra}\n")
    out.write(f"{len(results) - failed} passed, {failed} failed\n")
    return EXIT_OK if failed == 0 else EXIT_INCONSISTENT


# parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curvker", allow_abbrev=False,
                     description="Kernel permutations, sign thresholds and curvature energies.")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or CPU count)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, allow_abbrev=False)
        p.set_defaults(func=func)
        return p

    p = add("perm", cmd_perm, "permutation, curvature and Melnikov sum of one triple")
    _add_pair(p)
    _add_points(p)

    p = add("decompose", cmd_decompose, "quadratic coefficients of the K_t permutation in t")
    _add_pair(p, need_t=False)
    _add_points(p)

    p = add("threshold", cmd_threshold, "excluded interval of t and lower-bound constant")
    _add_pair(p, t_default=None)

    p = add("scan", cmd_scan, "classify an (N, t) grid and search for negative witnesses")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--Nmin", type=int, required=True)
    p.add_argument("--Nmax", type=int, required=True)
    p.add_argument("--tmin", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--tstep", type=float, required=True)
    default = search.ShapeGrid()
    p.add_argument("--alpha-steps", type=int, default=default.alpha_steps)
    p.add_argument("--beta-steps", type=int, default=default.beta_steps)
    p.add_argument("--r-steps", type=int, default=default.r_steps)
    p.add_argument("--r-max", type=float, default=default.r_max)
    p.add_argument("--no-refine", dest="refine", action="store_false",
                   help="skip the local refinement around each grid minimum")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--svg", help="also write an SVG heatmap here")

    p = add("example1", cmd_example1, "negative-t counterexample family")
    p.add_argument("--a", type=float, required=True)
    _add_pair(p, need_t=False)

    p = add("example2", cmd_example2, "positive-t counterexample family")
    _add_pair(p, need_t=False)
    p.add_argument("--q", type=float, default=math.exp(1.5))
    p.add_argument("--r", type=float, default=1e3)

    p = add("energy", cmd_energy, "truncated energies of a measure file")
    p.add_argument("--input", required=True, help="JSON or CSV measure file")
    p.add_argument("--kind", choices=("curvature", "perm", "mv"), default="curvature")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--t", type=float, default=0.0)

    p = add("beta", cmd_beta, "beta numbers of a measure in a window")
    p.add_argument("--input", required=True)
    p.add_argument("--x", type=float, nargs=2, required=True, metavar=("X", "Y"))
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--k", type=float, default=2.0)
    p.add_argument("--line", type=float, nargs=2, metavar=("ANGLE", "OFFSET"),
                   help="fixed line instead of the best fit")

    p = add("gen", cmd_gen, "write a generated measure as JSON")
    p.add_argument("kind", choices=sorted(GEN_PARAMS))
    p.add_argument("--k", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--slope", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--mass", type=float)
    p.add_argument("--out")

    p = add("verify", cmd_verify, "run the randomised property suite")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", nargs="+", choices=sorted(CHECKS), metavar="CHECK")
    return parser


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if args.command == "scan" or args.threads is not None:
            args.threads = resolve_threads(args.threads)
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except InconsistencyError as exc:
        print(f"curvker: inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (CurvkerError, ValueError) as exc:
        print(f"curvker: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
