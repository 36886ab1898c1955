"""Time the batched complex solver: compiled kernel vs numpy fallback vs LAPACK.

Usage: python benchmarks/bench_kernels.py [--batch 2000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from mmtransducer import _pykernels

try:
    from mmtransducer import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--batch", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'modes':>5} {'dim':>4} {'cython ms':>10} {'numpy ms':>10} {'lapack ms':>10} {'speedup':>8}")
    for modes in (1, 2, 3, 5, 8):
        n = 2 * modes + 1
        a = rng.normal(size=(args.batch, n, n)) + 1j * rng.normal(size=(args.batch, n, n))
        b = rng.normal(size=(args.batch, n, 2 * modes + 3)) + 0j
        t_py = best_of(lambda: _pykernels.solve_batched(a, b), args.repeat)
        t_la = best_of(lambda: np.linalg.solve(a, b), args.repeat)
        if _ckernels is not None:
            t_c = best_of(lambda: _ckernels.solve_batched(a, b), args.repeat)
            xc, _ = _ckernels.solve_batched(a, b)
            xp, _ = _pykernels.solve_batched(a, b)
            assert np.allclose(xc, xp, rtol=1e-10, atol=1e-12)
            c_ms, speed = f"{1e3 * t_c:10.2f}", f"{t_py / t_c:7.1f}x"
        else:
            c_ms, speed = f"{'n/a':>10}", f"{'n/a':>8}"
        print(f"{modes:>5} {n:>4} {c_ms} {1e3 * t_py:10.2f} {1e3 * t_la:10.2f} {speed}")


if __name__ == "__main__":
    main()
