#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

The hot paths are the greedy separated-set selection over cylinder orbit
matrices and the pairwise Bowen distance matrix.  Run:

    python benchmarks/bench_kernels.py [--depth 13] [--repeats 3]

Both backends compute identical results; only the wall time differs.
"""

import argparse
import time

import numpy as np

from pressgap import kernels
from pressgap.maps import doubling, manneville_pomeau
from pressgap.orbits import CylinderTree


def timed(fn, repeats):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=13,
                    help="cylinder depth for the separated-set benchmark")
    ap.add_argument("--pairwise-n", type=int, default=1500,
                    help="pool size for the pairwise benchmark")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    cases = {}
    for system in (doubling(), manneville_pomeau(0.5)):
        tree = CylinderTree(system, args.depth)
        orbits = tree.orbit_matrix()
        order = np.arange(orbits.shape[0], dtype=np.int64)
        cases[f"greedy_separated[{system.name}, 2^{args.depth}]"] = (
            lambda o=orbits, r=order: kernels.greedy_separated(o, r, 1.0 / 32.0))
    rng = np.random.default_rng(0)
    pw = rng.random((args.pairwise_n, 10))
    cases[f"pairwise_bowen[{args.pairwise_n} pts]"] = (
        lambda: kernels.pairwise_bowen(pw))

    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    print(f"{'kernel':<44} " + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases.items():
        times = {}
        results = {}
        for backend in backends:
            kernels.set_backend(backend)
            if backend == "numba":
                fn()  # warm the JIT outside the timed region
            times[backend], results[backend] = timed(fn, args.repeats)
        if len(backends) == 2:
            same = np.array_equal(np.asarray(results["numpy"]),
                                  np.asarray(results["numba"]))
            ratio = times["numpy"] / times["numba"]
            print(f"{name:<44} " + "".join(f"{times[b]:>11.3f}s" for b in backends)
                  + f"{ratio:>9.1f}x" + ("" if same else "  MISMATCH"))
        else:
            print(f"{name:<44} {times['numpy']:>11.3f}s")


if __name__ == "__main__":
    main()
