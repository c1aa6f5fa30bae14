"""Benchmark the compiled kernel backend against the pure-Python fallback.

Times the two hot primitives of the splitting solver (symmetric
eigendecomposition and the class-averaging projection) at realistic
problem sizes, then an end-to-end splitting solve.  Run as

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from tempora import moment, numerics, scenarios, sdp


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_eigh(backends):
    rng = np.random.default_rng(0)
    rows = []
    for n in (26, 64, 170):
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        times = {}
        for name in backends:
            with numerics.use_backend(name):
                times[name] = _time(lambda: numerics.sym_eig(a), 5)
        rows.append((f"eigh {n}x{n}", times))
    return rows


def bench_class_project(backends):
    rows = []
    for scenario in (scenarios.gyni(), scenarios.yu_oh()):
        problem = moment.build_problem(scenario)
        n = problem.size
        rng = np.random.default_rng(1)
        flat = rng.standard_normal(n * n)
        ids = problem.class_of.ravel().astype(np.int32)
        counts = np.asarray(problem.class_sizes, dtype=float)
        pins = np.asarray(problem.class_pins, dtype=float)
        times = {}
        for name in backends:
            with numerics.use_backend(name):
                times[name] = _time(
                    lambda: numerics.class_project(flat, ids, counts, pins), 20
                )
        rows.append((f"class_project {n}x{n}", times))
    return rows


def bench_solve(backends):
    problem = moment.build_problem(scenarios.gyni())
    times = {}
    for name in backends:
        with numerics.use_backend(name):
            times[name] = _time(
                lambda: sdp.solve_moment_admm(problem, tol=1e-6, max_iter=20000), 1
            )
    return [("admm solve 22x22", times)]


def main():
    backends = numerics.available_backends()
    print(f"backends: {', '.join(backends)}")
    rows = bench_eigh(backends) + bench_class_project(backends) + bench_solve(backends)
    width = max(len(label) for label, _ in rows)
    header = f"{'kernel':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'ratio':>10}"
    print(header)
    for label, times in rows:
        line = f"{label:<{width}}  " + "".join(
            f"{times[b] * 1e3:>10.2f}ms" for b in backends
        )
        if len(backends) > 1:
            line += f"{times['python'] / times['compiled']:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
