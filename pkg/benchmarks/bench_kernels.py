#!/usr/bin/env python3
"""Times the numba kernels against the pure-numpy fallback.

Run as ``python benchmarks/bench_kernels.py``.  The same benchmarks run
on whichever backends are importable; the two backends are also checked
against each other for exact agreement, since they are required to
produce identical output for identical seeds.
"""

import time

import numpy as np

from bosonsim._kernels import numba_available, numba_kernels, numpy_kernels
from bosonsim.combinat import collision_free_array
from bosonsim.unitaries import haar_unitary


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(kernels, warm=False):
    rng = np.random.default_rng(11)
    rows = []

    a13 = rng.standard_normal((13, 13)) + 1j * rng.standard_normal((13, 13))
    rows.append(("permanent 13x13", timeit(lambda: kernels.permanent(a13))))

    u = haar_unitary(35, seed=3).matrix
    ucols = np.ascontiguousarray(u[:, (0, 2, 3)])
    outcomes = collision_free_array(35, 3)
    rows.append(
        ("6545 collision-free 3x3 permanents", timeit(lambda: kernels.outcome_permanents(ucols, outcomes)))
    )

    u7 = haar_unitary(7, seed=4).matrix
    bmat = np.ascontiguousarray(u7[:, (0, 2, 4)].T)
    nsamples = 20_000
    rows.append(
        (f"clifford sampler m=7 n=3 N={nsamples}", timeit(lambda: kernels.clifford_samples(bmat, nsamples, 99)))
    )
    return rows


def main():
    backends = [("numpy", numpy_kernels())]
    if numba_available():
        nb = numba_kernels()
        # trigger JIT compilation outside the timed region
        bench(nb, warm=True)
        backends.append(("numba", nb))
    else:
        print("numba not importable; benchmarking the numpy fallback only")

    results = {}
    for name, kern in backends:
        results[name] = bench(kern)

    width = max(len(label) for label, _ in results[backends[0][0]])
    header = f"{'kernel':<{width}}  " + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for i, (label, _) in enumerate(results[backends[0][0]]):
        line = f"{label:<{width}}  "
        times = [results[name][i][1] for name, _ in backends]
        line += "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line)

    if len(backends) == 2:
        knp, knb = backends[0][1], backends[1][1]
        rng = np.random.default_rng(5)
        a = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
        same_perm = knp.permanent(a) == knb.permanent(a)
        u7 = haar_unitary(7, seed=4).matrix
        bmat = np.ascontiguousarray(u7[:, (0, 2, 4)].T)
        same_events = np.array_equal(
            knp.clifford_samples(bmat, 2000, 123), knb.clifford_samples(bmat, 2000, 123)
        )
        print()
        print(f"cross-backend agreement: permanent={'exact' if same_perm else 'MISMATCH'}, "
              f"event streams={'exact' if same_events else 'MISMATCH'}")


if __name__ == "__main__":
    main()
