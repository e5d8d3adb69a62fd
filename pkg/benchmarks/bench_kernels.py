"""Compare the compiled and pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 3]

Results from both backends must agree exactly (status, rows, node count,
scan hit); only the timings differ.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from tritile import gamma3_blowup, lb0_graph
from tritile.kernels import backends
from tritile.solver import build_quotient


def cover_cases():
    cases = []
    for label, con, h, reduce in [
        ("gamma3(9) vertices", gamma3_blowup(9), 1, False),
        ("gamma3(21) twins", gamma3_blowup(21), 1, True),
        ("lb0(2,2) vertices", lb0_graph(2, 2), 2, False),
        ("lb0(3,2) twins", lb0_graph(3, 2), 3, True),
    ]:
        q = build_quotient(con.graph, h, reduce)
        cols, cnts = q.row_arrays()
        cases.append((label, (cols, cnts, q.demands, 10**8)))
    return cases


def scan_cases():
    cases = []
    for n in (12, 14, 16):
        m = np.random.default_rng(n).random((n, n)) < 0.5
        colmasks = [sum(1 << int(a) for a in np.flatnonzero(m[:, y])) for y in range(n)]
        xmin = int(0.4 * n) + 1
        cases.append((f"regularity scan {n}x{n}", (colmasks, n, n, xmin, xmin, 0, 2, 5)))
    return cases


def _time(fn, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    kern = backends()
    if "cython" not in kern:
        print("compiled backend not built; only the fallback is available")
    names = sorted(kern)
    print(f"{'case':28s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}")
    for kind, cases in (("exact_cover_search", cover_cases()), ("irregular_scan", scan_cases())):
        for label, a in cases:
            times, outs = {}, {}
            for n in names:
                times[n], outs[n] = _time(getattr(kern[n], kind), a, args.repeat)
            if len({repr(o) for o in outs.values()}) != 1:
                raise SystemExit(f"backends disagree on {label}: {outs}")
            speed = times["python"] / times["cython"] if "cython" in times else 1.0
            print(f"{label:28s}" + "".join(f"{times[n]:12.4f}" for n in names) + f"{speed:9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
