"""Time the compiled and pure-numpy kernel backends on RaMixNet-sized layers.

    python benchmarks/bench_kernels.py [--batch 32] [--repeat 5]
"""

import argparse
import time

import numpy as np

from ramix.nn import backend

# (length, in_channels, out_channels, kernel) for the three default encoder blocks
LAYERS = [(2201, 1, 16, 9), (1096, 16, 32, 9), (548, 32, 64, 9)]


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench(kernels, batch, repeat, rng):
    rows = []
    for L, C, M, N in LAYERS:
        x = rng.standard_normal((batch, L, C))
        w = rng.standard_normal((M, N, C))
        b = rng.standard_normal(M)
        out, cols = kernels.conv1d_forward(x, w, b)
        dout = rng.standard_normal(out.shape)
        fwd = _best(lambda: kernels.conv1d_forward(x, w, b), repeat)
        bwd = _best(lambda: kernels.conv1d_backward(dout, cols, w, True), repeat)
        pool = _best(lambda: kernels.maxpool_forward(out, 2), repeat)
        rows.append((f"conv L={L} C={C} M={M}", fwd, bwd, pool))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    names = backend.available()
    print(f"backends: {', '.join(names)}  batch={args.batch}  best of {args.repeat}")
    results = {name: bench(backend.get(name), args.batch, args.repeat, np.random.default_rng(0)) for name in names}
    print(f"{'layer':28s} {'backend':8s} {'forward ms':>11s} {'backward ms':>12s} {'pool ms':>8s}")
    for i, (label, *_) in enumerate(results[names[0]]):
        for name in names:
            _, f, b, p = results[name][i]
            print(f"{label:28s} {name:8s} {1e3 * f:11.2f} {1e3 * b:12.2f} {1e3 * p:8.2f}")
    if "cython" in results:
        tot = {n: sum(f + b + p for _, f, b, p in results[n]) for n in names}
        print(f"total speedup cython vs numpy: {tot['numpy'] / tot['cython']:.2f}x")


if __name__ == "__main__":
    main()
