"""Benchmark the simplex kernel: numba-jitted loop vs the pure-numpy twin.

Solves a batch of diet-shaped LPs (floors + budget + per-item caps) on both
backends, checks they agree, and reports mean/std wall time per batch. The
numba path gets one unmeasured warm-up call for JIT compilation. Force the
numpy path at import time with PANTRY_NO_NUMBA=1.

Run:  python benchmarks/bench_simplex.py [--batches 5] [--n-lps 200]
"""

import argparse
import statistics
import time

import numpy as np

from pantryplan.lp import LpProblem, active_backend, set_backend, solve


def make_batch(n_lps: int, seed: int = 7) -> list[LpProblem]:
    rng = np.random.Generator(np.random.PCG64(seed))
    problems = []
    for _ in range(n_lps):
        n = int(rng.integers(40, 70))
        m_floor = int(rng.integers(6, 10))
        x0 = rng.uniform(1.0, 8.0, size=n)  # known feasible point
        prices = rng.uniform(0.2, 8.0, size=n)
        ge = []
        for _ in range(m_floor):
            row = rng.uniform(0.0, 4.0, size=n) * (rng.random(size=n) < 0.4)
            ge.append((row, float(row @ x0) * 0.7))
        budget_row = (prices.copy(), float(prices @ x0) * 1.5)
        le = [budget_row]
        caps = np.full(n, float(np.max(x0) * 4.0))
        problems.append(
            LpProblem(
                objective=prices,
                ge_constraints=ge,
                le_constraints=le,
                var_upper_bounds=caps,
            )
        )
    return problems


def run_backend(name: str, problems, repeats: int):
    set_backend(name)
    solve(problems[0])  # warm-up (JIT compile on the numba path)
    durations = []
    objectives = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        objs = [solve(p).objective_value for p in problems]
        durations.append(time.perf_counter() - t0)
        if objectives is None:
            objectives = objs
    return {
        "backend": name,
        "mean": statistics.mean(durations),
        "std": statistics.pstdev(durations) if len(durations) > 1 else 0.0,
        "objectives": objectives,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batches", type=int, default=5, help="timing repeats")
    parser.add_argument("--n-lps", type=int, default=200, help="LPs per batch")
    args = parser.parse_args()

    problems = make_batch(args.n_lps)
    print(f"{args.n_lps} diet-shaped LPs per batch, {args.batches} batches\n")

    set_backend(None)
    results = [run_backend("numpy", problems, args.batches)]
    try:
        results.append(run_backend("numba", problems, args.batches))
    except Exception as exc:  # numba missing or failed to compile
        print(f"[info] numba path unavailable ({exc}); numpy only")

    header = f"{'backend':10s} {'mean (s)':>10s} {'std (s)':>9s} {'LPs/s':>9s}"
    print(header)
    print("-" * len(header))
    for r in results:
        print(
            f"{r['backend']:10s} {r['mean']:10.4f} {r['std']:9.4f} "
            f"{args.n_lps / r['mean']:9.1f}"
        )

    if len(results) == 2:
        a = np.array(results[0]["objectives"])
        b = np.array(results[1]["objectives"])
        worst = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))
        print(f"\nmax relative objective disagreement: {worst:.3e}")
        if worst > 1e-9:
            print("[warn] backends disagree beyond 1e-9; investigate")
        speedup = results[0]["mean"] / results[1]["mean"]
        print(f"speedup (numpy / numba): {speedup:.2f}x")
    set_backend(None)


if __name__ == "__main__":
    main()
