"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 2000] [--repeat 5]

Prints one row per kernel with the best wall time of each backend and the
speed-up.  Both backends receive identical inputs.
"""

import argparse
import time

import numpy as np

from ldpc_workbench import _backend
from ldpc_workbench.channels import BEC, BIAWGN, BSC, initial_llr, transmit
from ldpc_workbench.decoders import CutoffSchedule
from ldpc_workbench.density_evolution.bp import (_split, bp_initial_density, combination_table,
                                                 saturation_points)
from ldpc_workbench.factor_graph import sample_regular


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n):
    g = sample_regular(n, 3, 6, seed=1)
    vp, ve = g.var_csr
    cp, ce = g.chk_csr
    csr = (vp, ve, cp, ce, g.edge_var)
    ones = np.ones(n, dtype=np.int8)
    llr = np.ascontiguousarray(initial_llr(transmit(ones, BIAWGN(0.85), 2)).values)
    flips = np.ascontiguousarray(transmit(ones, BSC(0.04), 3).symbols)
    erased = np.ascontiguousarray(transmit(ones, BEC(0.42), 4).symbols)
    cut = CutoffSchedule.gallager_a(3).table
    w = np.array([2.0, 1.0])
    dens = bp_initial_density(BIAWGN(0.88))
    xp, xn = _split(dens)
    table = combination_table(dens.grid)
    sat = saturation_points(dens.grid)
    return {
        "bp_flood (50 it)": lambda k: k.bp_flood(*csr, llr, 50, False),
        "gallager A (50 it)": lambda k: k.hard_flood(1, *csr, flips, cut, w, 50),
        "weighted (50 it)": lambda k: k.hard_flood(2, *csr, flips, cut, w, 50),
        "erasure MP": lambda k: k.hard_flood(0, *csr, erased, cut, w, n + 1),
        "peeling": lambda k: k.peel(*csr, g.edge_chk, erased),
        "check_pair (DE)": lambda k: k.check_pair(xp, xn, xp, xn, table, sat),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="code length")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if "compiled" not in _backend.available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    py, cy = _backend.get("python"), _backend.get("compiled")
    print(f"{'kernel':<22}{'python [ms]':>14}{'compiled [ms]':>16}{'speed-up':>11}")
    for name, fn in cases(args.n).items():
        tp = best_time(lambda: fn(py), args.repeat)
        tc = best_time(lambda: fn(cy), args.repeat)
        print(f"{name:<22}{1e3 * tp:>14.2f}{1e3 * tc:>16.2f}{tp / tc:>10.1f}x")


if __name__ == "__main__":
    main()
