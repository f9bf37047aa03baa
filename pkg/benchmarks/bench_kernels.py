"""Compare the compiled scan kernels with the numpy fallback.

    python benchmarks/bench_kernels.py --n 2000 --repeat 3
"""
import argparse
import time

import numpy as np

from bdtree import kernels
from bdtree.graph_model import HEAVY_STREAM, LIGHT_STREAM, stream_key


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n, seed=1):
    kl, kh = stream_key(seed, LIGHT_STREAM), stream_key(seed, HEAVY_STREAM)
    rng = np.random.default_rng(seed)
    frontier = rng.choice(n, size=max(1, n // 20), replace=False).astype(np.int64)
    cands = np.setdiff1d(np.arange(n, dtype=np.int64), frontier)
    return {
        "min_to_set": lambda m: m.min_uniform_to_set(kl, cands, frontier),
        "prim_uniform": lambda m: m.prim_uniform(kl, n),
        "prim_split": lambda m: m.prim_split(kl, 0.8, kh, 0.2, n),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels.compiled is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':<14}{'fallback s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, fn in cases(args.n).items():
        tf = _best(lambda: fn(kernels.fallback), args.repeat)
        if kernels.compiled is None:
            print(f"{name:<14}{tf:>12.4f}{'-':>12}{'-':>10}")
            continue
        tc = _best(lambda: fn(kernels.compiled), args.repeat)
        print(f"{name:<14}{tf:>12.4f}{tc:>12.4f}{tf / tc:>9.1f}x")


if __name__ == "__main__":
    main()
