"""Compare the compiled and numpy kernel backends on representative workloads.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--threads N]

Each workload is timed on every available backend; outputs are checked to be
bit-identical before timings are reported.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from truncmax import kernels, operators
from truncmax.grid import GridFunction, GridSpec, extremal_fm
from truncmax.operators import apply_operator
from truncmax.params import TruncationParams


def workloads():
    e = math.e
    fm1 = extremal_fm(64, GridSpec.centered(1, 1 / 512, e + 1 / 64 + 1 / 256))
    box = GridSpec.centered(2, 1 / 128, 4.0)
    fm2 = extremal_fm(32, box)
    rng = np.random.default_rng(0)
    noise = GridSpec.centered(2, 1 / 16, 4.0)
    dense = GridFunction(noise, rng.random(noise.shape))
    vol = GridSpec.centered(3, 1 / 8, 2.5)
    dense3 = GridFunction(vol, rng.random(vol.shape) * (rng.random(vol.shape) < 0.3))
    return [
        ("scalar n=1 f_64, 128 radii", fm1, TruncationParams.scalar(1.0, e, 1), 128),
        ("strong f_32, 32 radii/axis", fm2, TruncationParams.strong((1.0, 1.0), (e, e)), 32),
        ("general (2,) f_32, 64 radii", fm2, TruncationParams.general((2,), (1.0,), (e,)), 64),
        ("scalar n=2 dense, 16 radii", dense, TruncationParams.scalar(0.5, 1.5, 2), 16),
        ("general (2,1) sparse, 6 radii", dense3, TruncationParams.general((2, 1), (0.5, 0.5), (1.0, 1.0)), 6),
    ]


def time_once(f, p, radii):
    t0 = time.perf_counter()
    out = apply_operator(f, p, radii)
    return time.perf_counter() - t0, out.values


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args(argv)
    if args.threads:
        operators.set_num_threads(args.threads)
    names = sorted(kernels.available_backends())
    print(f"backends: {', '.join(names)}; threads: {operators.get_num_threads()}")
    print(f"{'workload':50s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}")
    for label, f, p, radii in workloads():
        label = f"{label} [{'x'.join(map(str, f.spec.cells))}]"
        best, ref = {}, None
        for name in names:
            previous = kernels.use_backend(name)
            try:
                times = []
                for _ in range(args.repeat):
                    dt, values = time_once(f, p, radii)
                    times.append(dt)
            finally:
                kernels.backend = previous
            if ref is None:
                ref = values
            elif not np.array_equal(ref, values):
                raise SystemExit(f"backends disagree on {label!r}")
            best[name] = min(times)
        row = f"{label:50s}" + "".join(f"{best[n]:11.3f}s" for n in names)
        if len(names) == 2:
            row += f"{best['numpy'] / best['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
