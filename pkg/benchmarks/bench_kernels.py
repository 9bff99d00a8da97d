"""Compare the compiled kernels with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat R]

Each case times one work-function advance and one WFA run on the same
inputs with both backends, checks that the results agree, and prints the
speedup.
"""

import argparse
import random
import time

import numpy as np

from wkserver import kernels

CASES = [
    # (n, k, weights, requests)
    (4, 2, (1, 8), 20000),
    (6, 3, (1, 4, 20), 2000),
    (8, 3, (1, 4, 20), 1000),
    (5, 4, (1, 3, 9, 27), 500),
]


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn()
        best = min(best, time.perf_counter() - t0)
    return best, res


def bench(repeat):
    if not kernels.compiled_available():
        print("compiled kernels are not built; only the Python backend is available")
    print(f"{'case':<24}{'kernel':<10}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for n, k, w, T in CASES:
        rng = random.Random(f"{n}:{k}:{T}")
        c0 = tuple(range(1, k + 1))
        reqs = [rng.randint(1, n) for _ in range(T)]
        label = f"n={n} k={k} T={T}"
        base = kernels.init_table(n, k, w, c0)

        def adv(force):
            return kernels.as_list(kernels.advance(kernels.as_list(base) if force else base, n, k, w, reqs,
                                                   force_python=force))

        def run(force):
            r = np.asarray([p - 1 for p in reqs], dtype=np.int64)
            out = np.zeros(T, dtype=np.int64)
            cur = sum((c - 1) * n ** (k - 1 - j) for j, c in enumerate(c0))
            vals, c, t, cost = kernels.wfa_run(kernels.as_list(base) if force else base, n, k, w, (1, 2), cur, r,
                                               0, T, k + 1, out, force_python=force)
            return kernels.as_list(vals), int(c), int(cost), out.tolist()

        for name, fn in (("advance", adv), ("wfa_run", run)):
            tp, rp = _time(lambda: fn(True), repeat)
            if kernels.compiled_available():
                tc, rc = _time(lambda: fn(False), repeat)
                if rp != rc:
                    raise SystemExit(f"backends disagree on {label} {name}")
                print(f"{label:<24}{name:<10}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")
            else:
                print(f"{label:<24}{name:<10}{tp:>12.4f}{'-':>12}{'-':>10}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    bench(ap.parse_args().repeat)


if __name__ == "__main__":
    main()
