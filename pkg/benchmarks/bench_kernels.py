"""Compare the numba and pure-numpy builds of the hot kernels.

Run directly:  python benchmarks/bench_kernels.py
The numpy path can also be forced for the whole package with
CYCSID_DISABLE_NUMBA=1.
"""

import time

import numpy as np

from cycsid import kernels


def bench(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    n, m, l, N = 18, 6, 12, 3000
    A = rng.normal(size=(n, n))
    A *= 0.9 / np.abs(np.linalg.eigvals(A)).max()
    B = rng.normal(size=(n, m))
    C = rng.normal(size=(l, n))
    D = np.zeros((l, m))
    u = rng.uniform(-1, 1, size=(N, m))
    x0 = np.zeros(n)

    cases = [
        ("trajectory", kernels._trajectory_numpy, kernels._trajectory_jit,
         (A, B, C, D, u, x0)),
        ("io_regressor", kernels._io_regressor_numpy, kernels._io_regressor_jit,
         (A, C, u)),
    ]

    print(f"workload: order {n}, {m} inputs, {l} outputs, {N} steps")
    if not kernels.HAS_NUMBA:
        print("numba unavailable or disabled; timing the numpy path only")
    for name, f_np, f_jit, args in cases:
        t_np = bench(f_np, *args)
        if kernels.HAS_NUMBA:
            f_jit(*args)  # trigger compilation outside the timed region
            t_jit = bench(f_jit, *args)
            print(f"{name:14s} numpy {t_np * 1e3:8.2f} ms   numba {t_jit * 1e3:8.2f} ms"
                  f"   speedup {t_np / t_jit:6.1f}x")
        else:
            print(f"{name:14s} numpy {t_np * 1e3:8.2f} ms")

    if kernels.HAS_NUMBA:
        ref_x, ref_y = kernels._trajectory_numpy(A, B, C, D, u, x0)
        jit_x, jit_y = kernels._trajectory_jit(A, B, C, D, u, x0)
        dx = np.abs(ref_x - jit_x).max()
        dy = np.abs(ref_y - jit_y).max()
        dphi = np.abs(kernels._io_regressor_numpy(A, C, u)
                      - kernels._io_regressor_jit(A, C, u)).max()
        print(f"agreement: trajectory {max(dx, dy):.3g}, io_regressor {dphi:.3g}")


if __name__ == "__main__":
    main()
