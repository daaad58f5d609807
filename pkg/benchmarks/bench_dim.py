"""Time the lambda kernels on both backends.

    python benchmarks/bench_dim.py [--m 512] [--per-class 30] [--repeat 5] [--jobs 4]

Reports the best-of-``repeat`` wall time for the width-1 sweep, a full
DIM build (sequential and threaded) and checks that both backends give
bit-identical matrices.
"""

import argparse
import time

import numpy as np

from bandsel import _backend
from bandsel.dataset import band_spec, select_binary, synthesize
from bandsel.window_stats import build_dim, sweep_windows


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=512)
    ap.add_argument("--per-class", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()

    band = (args.m * 200 // 512, args.m * 250 // 512)
    ds = synthesize(band_spec([args.per_class] * 2, band, noise_sigma=0.2, seed=0, m=args.m))
    bd = select_binary(ds, "a2", "a3")

    backends = ["python"]
    try:
        _backend.load("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled kernel not built; timing the NumPy fallback only")

    print(f"m={args.m}, {2 * args.per_class} spectra, best of {args.repeat}")
    print(f"{'backend':<8} {'sweep w=1':>12} {'dim jobs=1':>12} {f'dim jobs={args.jobs}':>12}")
    dims = {}
    for name in backends:
        t_sweep = best_of(lambda: sweep_windows(bd, 1, backend=name), args.repeat)
        t_seq = best_of(lambda: build_dim(bd, 1, backend=name), args.repeat)
        t_par = best_of(lambda: build_dim(bd, args.jobs, backend=name), args.repeat)
        dims[name] = build_dim(bd, 1, backend=name).values
        print(f"{name:<8} {t_sweep * 1e3:>10.2f}ms {t_seq * 1e3:>10.1f}ms {t_par * 1e3:>10.1f}ms")

    if len(dims) == 2:
        same = dims["cython"].tobytes() == dims["python"].tobytes()
        diff = float(np.max(np.abs(dims["cython"] - dims["python"])))
        print(f"backends bit-identical: {same} (max abs diff {diff:.1e})")


if __name__ == "__main__":
    main()
