"""Time the Cascade kernel: compiled extension against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--bits 100000] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from cvclone import _kernels_py
from cvclone.distill import cascade_block_sizes

try:
    from cvclone import _ckernels
except ImportError:
    _ckernels = None


def _case(n: int, eps: float, seed: int):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, n, dtype=np.uint8)
    b = a ^ (rng.random(n) < eps).astype(np.uint8)
    perms = np.stack([rng.permutation(n) for _ in range(4)]).astype(np.int64)
    return a, b, perms, cascade_block_sizes(n, eps)


def _time(fn, a, b, perms, ks, repeat: int) -> tuple[float, int, np.ndarray]:
    best = math.inf
    for _ in range(repeat):
        bb = b.copy()
        t = time.perf_counter()
        leak = fn(a, bb, perms, ks)
        best = min(best, time.perf_counter() - t)
    return best, leak, bb


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'crossover':>9} {'python_s':>9} {'cython_s':>9} {'speedup':>8} {'leak/bit':>9} identical")
    for eps in (0.001, 0.02, 0.1, 0.24):
        a, b, perms, ks = _case(args.bits, eps, 1)
        tp, lp, bp = _time(_kernels_py.cascade_run, a, b, perms, ks, args.repeat)
        if _ckernels is None:
            print(f"{eps:>9} {tp:>9.4f} {'n/a':>9} {'n/a':>8} {lp / args.bits:>9.4f} n/a")
            continue
        tc, lc, bc = _time(_ckernels.cascade_run, a, b, perms, ks, args.repeat)
        same = lp == lc and np.array_equal(bp, bc)
        print(f"{eps:>9} {tp:>9.4f} {tc:>9.4f} {tp / tc:>8.1f} {lp / args.bits:>9.4f} {same}")


if __name__ == "__main__":
    main()
