"""Compare the numba and numpy residue filters on the full search boxes.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

from pellconcat import _kernels
from pellconcat.search import SearchConfig, brute_force


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n-max", type=int, default=64)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if _kernels.numba_available() else [])
    for eq in (1, 2):
        cfg = SearchConfig.for_equation(eq, 2, 10, args.n_max, 100)
        results = {}
        for backend in backends:
            if backend == "numba":
                t0 = time.perf_counter()
                brute_force(cfg, backend=backend)  # compile or load the cache
                print(f"eq{eq} numba warm-up {time.perf_counter() - t0:.2f}s")
            dt, sols = timed(lambda: brute_force(cfg, backend=backend), args.repeat)
            results[backend] = sols
            print(f"eq{eq} {backend:6s} best of {args.repeat}: {dt * 1000:8.1f} ms, {len(sols)} solutions")
        assert len({tuple(r) for r in map(tuple, results.values())}) == 1


if __name__ == "__main__":
    main()
