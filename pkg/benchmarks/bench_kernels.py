"""Compare the compiled kernel backend against the numpy fallback.

Runs each hot kernel on realistic shapes, reports median wall time per
call for both backends plus the speedup, and cross-checks that they
produce the same numbers while it is at it. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--repeats 30]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from textdensity import kernels


def median_time(fn, args, repeats: int) -> float:
    fn(*args)  # warm up
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def make_cases(rng: np.random.Generator) -> list[tuple[str, str, tuple]]:
    x = rng.normal(size=(2000, 64))
    z = rng.normal(size=(2000, 100))
    emb = rng.normal(size=(400, 64))
    u = rng.normal(size=(64, 50))
    w = rng.normal(size=(50, 64))
    b = rng.normal(size=50)
    targets = rng.integers(0, 2, size=50).astype(np.float64)
    samples = rng.normal(size=5000)
    xs = np.linspace(-4.0, 4.0, 512)
    return [
        ("window_mean", "2000x64 w=3", (x, 3)),
        ("window_mean_backward", "2000x64 w=3", (x, 3)),
        ("column_softmax", "2000x100", (z,)),
        ("loss_and_grads", "400x64, 50 labels", (emb, u, w, b, targets, 3)),
        ("gaussian_kde_sum", "5000 pts, 512 grid", (samples, xs, 0.3)),
    ]


def max_diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(max_diff(ai, bi) for ai, bi in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=30, help="timed calls per case")
    args = parser.parse_args()

    backends = kernels.available_backends()
    print(f"backends available: {', '.join(backends)} (active: {kernels.BACKEND})")
    if len(backends) < 2:
        print("compiled backend not built; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    header = f"{'kernel':<22} {'shape':<20} {'numpy':>12} {'cython':>12} {'speedup':>9} {'max |diff|':>12}"
    print(header)
    print("-" * len(header))
    for name, shape, case_args in make_cases(rng):
        results, timings = {}, {}
        for backend_name in ("numpy", "cython"):
            fn = getattr(kernels.get_backend(backend_name), name)
            timings[backend_name] = median_time(fn, case_args, args.repeats)
            results[backend_name] = fn(*case_args)
        diff = max_diff(results["numpy"], results["cython"])
        speedup = timings["numpy"] / timings["cython"]
        print(
            f"{name:<22} {shape:<20} {timings['numpy'] * 1e6:>10.1f}us "
            f"{timings['cython'] * 1e6:>10.1f}us {speedup:>8.2f}x {diff:>12.2e}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
