"""Benchmark the numba kernels against the pure-NumPy fallback.

Imports both kernel modules directly (ignoring ACTSUB_BACKEND) and times
them head to head on the shapes the training loop actually hits, plus one
end-to-end tracker step per backend.

Run: python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from actsub import _kernels_numba as knb
from actsub import _kernels_numpy as knp
from actsub.numerics import make_rng


def timeit(fn, *args, repeat=7, warmup=2):
    for _ in range(warmup):
        fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def row(label, numba_s, numpy_s):
    speedup = numpy_s / numba_s if numba_s > 0 else float("inf")
    print(f"{label:<38} numba {numba_s * 1e6:10.1f} us   numpy {numpy_s * 1e6:10.1f} us   x{speedup:.2f}")


def bench_matmul(rng):
    print("-- matmul --")
    for n, k, m in ((64, 64, 8), (256, 64, 64), (2048, 64, 8), (512, 512, 64)):
        a = rng.standard_normal((n, k))
        b = rng.standard_normal((k, m))
        row(f"matmul {n}x{k} @ {k}x{m}", timeit(knb.matmul, a, b), timeit(knp.matmul, a, b))


def bench_covariance(rng):
    print("-- batch covariance --")
    for n, d in ((32, 64), (256, 64), (64, 256), (2048, 128)):
        x = rng.standard_normal((n, d))
        row(f"covariance {n}x{d}", timeit(knb.covariance, x), timeit(knp.covariance, x))


def bench_qr(rng):
    print("-- thin QR (nonnegative diagonal) --")
    for d, r in ((64, 4), (64, 32), (512, 16), (1024, 32)):
        a = rng.standard_normal((d, r))
        row(f"qr {d}x{r}", timeit(knb.qr_nonneg, a), timeit(knp.qr_nonneg, a))


def bench_tracker_step(rng):
    print("-- full Oja tracker step (covariance + update + QR) --")
    from actsub.numerics import fro_norm

    def step(kern, x, u, gamma=0.1):
        c = kern.covariance(x)
        nrm = fro_norm(c)
        cu = kern.matmul(c, u)
        resid = cu - kern.matmul(u, kern.matmul(np.ascontiguousarray(u.T), cu))
        q, _ = kern.qr_nonneg(u + (gamma / nrm) * resid)
        return q

    for n, d, r in ((32, 64, 4), (256, 128, 16)):
        x = rng.standard_normal((n, d))
        u, _ = knp.qr_nonneg(rng.standard_normal((d, r)))
        row(
            f"tracker step N={n} d={d} r={r}",
            timeit(step, knb, x, u),
            timeit(step, knp, x, u),
        )


def main():
    rng = make_rng(0)
    print("compiling numba kernels (cached after first run)...")
    knb.matmul(np.ones((2, 2)), np.ones((2, 2)))
    knb.covariance(np.ones((2, 2)))
    knb.qr_nonneg(np.ones((3, 2)))
    print()
    bench_matmul(rng)
    bench_covariance(rng)
    bench_qr(rng)
    bench_tracker_step(rng)


if __name__ == "__main__":
    main()
