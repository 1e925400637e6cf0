"""Time the compiled and pure-Python kernels side by side.

    python3 benchmarks/bench_kernels.py --size 1024 --window 31

Prints the best wall time over ``--repeat`` runs for each operation and
backend, the speedup of the last backend over the first, and flags any
output mismatch between backends.
"""

import argparse
import time

import numpy as np

from inscribe import _backend
from inscribe.binarize import local_stats
from inscribe.morphology import StructuringElement, dilate, erode, label_map
from inscribe.raster import BinaryRaster, GrayRaster


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1024)
    ap.add_argument("--window", type=int, default=31)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    gray = GrayRaster(rng.integers(0, 256, size=(args.size, args.size)).astype(np.uint8))
    bits = BinaryRaster((rng.random((args.size, args.size)) < 0.45).astype(np.uint8))
    se = StructuringElement.box(3)

    ops = {
        "local_stats integral": lambda k: local_stats(gray, args.window, route="integral", kernels=k).std,
        "local_stats naive": lambda k: local_stats(gray, args.window, route="naive", kernels=k).std,
        "erode 3x3": lambda k: erode(bits, se, kernels=k).data,
        "dilate 3x3": lambda k: dilate(bits, se, kernels=k).data,
        "label 8-conn": lambda k: label_map(bits, 8, kernels=k)[0],
    }
    backends = _backend.available()
    print(f"size {args.size}x{args.size}, window {args.window}, default backend: {_backend.name}")
    print(f"{'operation':<24}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    times = {}
    for op, fn in ops.items():
        row, outs = [], []
        for name, k in backends.items():
            # the naive route is slow in pure Python; one run is plenty
            rep = 1 if op.endswith("naive") else args.repeat
            t, out = best_of(lambda: fn(k), rep)
            times[op, name] = t
            row.append(t)
            outs.append(out)
        same = all(np.array_equal(outs[0], o) for o in outs[1:])
        ratio = f"{row[0] / row[-1]:.1f}x" if len(row) > 1 else "-"
        print(f"{op:<24}" + "".join(f"{t:>11.4f}s" for t in row) + f"{ratio:>10}" + ("" if same else "  MISMATCH"))

    for name in backends:
        speedup = times["local_stats naive", name] / times["local_stats integral", name]
        print(f"{name}: integral vs naive local_stats speedup {speedup:.1f}x")


if __name__ == "__main__":
    main()
