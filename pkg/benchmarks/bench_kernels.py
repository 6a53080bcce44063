"""Compiled vs pure-Python rank sweep on random systems.

    python3 benchmarks/bench_kernels.py [--sizes 8 16 32] [--repeat 3] [--jobs 1 4]

Each row times one full Kleene solve (until a sweep changes nothing) of
the point-wise iterator and checks both backends return the same table.
"""

import argparse
import time

import numpy as np

from wtsdist import kernels
from wtsdist.fixpoint import Policy, compile_game, iterator_for, system_leads
from wtsdist.generators import random_wts
from wtsdist.metrics import maxlead, pointwise


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_case(name, game, repeat, jobs):
    n = len(game.cells)
    h0 = np.zeros(n, dtype=np.int64)
    args = (game.p1_ptr, game.p2_ptr, game.loc, game.nxt, h0, n * len(game.values) + 1)
    tp, rp = best_time(lambda: kernels.python_sweep_max(*args), repeat)
    row = [name, str(n), str(len(game.loc)), str(rp[1]), f"{tp * 1e3:.1f}"]
    for j in jobs:
        tc, rc = best_time(lambda: kernels.compiled_sweep_max(*args, j), repeat)
        assert rc[0].tolist() == rp[0].tolist() and rc[1] == rp[1], "backends disagree"
        row += [f"{tc * 1e3:.2f}", f"{tp / tc:.0f}x"]
    return row


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--jobs", type=int, nargs="+", default=[1, 4])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if kernels.compiled_sweep_max is None:
        raise SystemExit("compiled extension not built; run `pip install -e .` first")

    head = ["case", "cells", "edges", "sweeps", "python ms"]
    for j in args.jobs:
        head += [f"cython ms (j={j})", "speedup"]
    rows = []
    for n in args.sizes:
        sys = random_wts(n, 3, 2, (0, 4), args.seed, denominator=2)
        rows.append(bench_case(f"pointwise n={n}", compile_game(iterator_for(pointwise()), sys), args.repeat, args.jobs))
    for n in args.sizes[:2]:
        sys = random_wts(n, 2, 1, (-1, 1), args.seed)
        cap = 4
        leads = system_leads(sys, cap)
        spec = iterator_for(maxlead(), cap, Policy.OVERAPPROX, leads)
        rows.append(bench_case(f"maxlead n={n}", compile_game(spec, sys, leads), args.repeat, args.jobs))

    widths = [max(len(r[i]) for r in rows + [head]) for i in range(len(head))]
    for r in [head] + rows:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))


if __name__ == "__main__":
    main()
