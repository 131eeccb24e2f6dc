"""Compare the compiled kernels against the numpy fallback.

The package carries exactly two hot loops (see zlog.kernels): meromorphic
cloud evaluation behind every continuation/grid render, and finite-field
zero-locus enumeration behind the naive point counts.  This script times
both implementations on representative workloads, checks that they agree,
and prints a table.  Run:

    python3 benchmarks/bench_kernels.py [--repeat 5] [--grid 300]

The fallback is always available; the compiled column is skipped (with a
note) when the extension was not built.  ``ZLOG_PURE=1`` does not matter
here -- both implementations are imported directly.
"""

import argparse
import sys
import time

import numpy as np

from zlog import _kernels_py
from zlog.cloud import build_cloud
from zlog.continuation import motive_model
from zlog.counts import VarietySpec, _flatten_equations, make_field
from zlog.motive import select_truncation, spectral, supersingular_motive

try:
    from zlog import _kernels
except ImportError:  # extension not built
    _kernels = None


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cloud_workloads(grid: int):
    xs = np.linspace(-3.0, 3.0, grid)
    pts = (xs[None, :] + 1j * xs[:, None]).ravel().astype(np.complex128)

    small_data = spectral((1, 0.5))
    small = build_cloud(small_data, select_truncation(small_data).L_max)
    big_model = motive_model(supersingular_motive(4, (0, 1, 2)))
    big = build_cloud(big_model.data, big_model.trunc.L_max)

    yield (
        f"cloud_eval {len(small.mus)} terms x {pts.size} pts",
        lambda impl: impl.cloud_eval(small.coeffs, small.mus, 2, pts),
    )
    yield (
        f"cloud_eval {len(big.mus)} terms x {pts.size} pts",
        lambda impl: impl.cloud_eval(big.coeffs, big.mus, big_model.trunc.r0, pts),
    )


def _gl3_graph_spec() -> VarietySpec:
    # {(x, y) : det(x) * y = 1} in 10 affine variables
    terms = []
    for perm, sign in (
        ((0, 1, 2), 1), ((0, 2, 1), -1), ((1, 0, 2), -1),
        ((1, 2, 0), 1), ((2, 0, 1), 1), ((2, 1, 0), -1),
    ):
        ev = [0] * 10
        for i, j in enumerate(perm):
            ev[3 * i + j] = 1
        ev[9] = 1
        terms.append((sign, tuple(ev)))
    terms.append((-1, (0,) * 10))
    return VarietySpec("affine", 10, (tuple(terms),))


def _count_workloads():
    cusp_chart = VarietySpec(  # y^2 + y = x^3, the z = 1 chart of the cusp
        "affine", 2, (((1, (0, 2)), (1, (0, 1)), (-1, (3, 0))),)
    )
    for label, spec, p, k in (
        ("count 2^16 pts, 3 terms (curve chart / F_256)", cusp_chart, 2, 8),
        ("count 3^10 pts, 7 terms (GL_3 graph / F_3)", _gl3_graph_spec(), 3, 1),
    ):
        fld = make_field(p, k)
        coef, exps, offsets = _flatten_equations(spec, p)

        def run(impl, fld=fld, coef=coef, exps=exps, offsets=offsets, n=spec.n):
            return impl.count_zero_locus(
                fld.p, fld.k, fld.modulus, coef, exps, offsets, (), n
            )

        yield label, run


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="best-of repetitions")
    ap.add_argument("--grid", type=int, default=300, help="cloud grid edge length")
    args = ap.parse_args(argv)

    rows = []
    for label, run in list(_cloud_workloads(args.grid)) + list(_count_workloads()):
        ref = run(_kernels_py)
        t_py = _best_of(lambda: run(_kernels_py), args.repeat)
        if _kernels is None:
            rows.append((label, None, t_py, None))
            continue
        got = run(_kernels)
        if isinstance(ref, np.ndarray):
            scale = max(1.0, float(np.nanmax(np.abs(ref))))
            finite = np.isfinite(ref) & np.isfinite(got)
            if not np.array_equal(np.isfinite(ref), np.isfinite(got)):
                raise AssertionError(f"{label}: implementations disagree on poles")
            err = float(np.max(np.abs(ref[finite] - got[finite]))) / scale
            if err > 1e-12:
                raise AssertionError(f"{label}: implementations disagree ({err:.2e})")
        elif ref != got:
            raise AssertionError(f"{label}: counts disagree ({ref} != {got})")
        t_cy = _best_of(lambda: run(_kernels), args.repeat)
        rows.append((label, t_cy, t_py, t_py / t_cy))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'compiled':>10}  {'fallback':>10}  {'ratio':>7}")
    for label, t_cy, t_py, ratio in rows:
        cy = f"{t_cy * 1e3:8.1f}ms" if t_cy is not None else "   (none)"
        ra = f"{ratio:6.1f}x" if ratio is not None else "      -"
        print(f"{label:<{width}}  {cy:>10}  {t_py * 1e3:8.1f}ms  {ra:>7}")
    if _kernels is None:
        print("compiled extension not built; fallback timings only")
    return 0


if __name__ == "__main__":
    sys.exit(main())
