"""Time and peak memory of RCook detection as the pixel count grows.

Reports the median of several runs per size and the traced peak against the
size of one float64 RFF design, ``8 n (2D + 1)`` bytes.
"""
import argparse
import statistics
import time
import tracemalloc

import numpy as np

from rcook.pipeline import DetectorConfig, Method, detect
from rcook.raster import PixelMatrix


def inputs(n, d, seed=7):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    Y = np.tanh(X) + 0.1 * rng.standard_normal((n, d))
    return PixelMatrix(X, n, 1), PixelMatrix(Y, n, 1), np.arange(0, n, 2)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[50_000, 100_000, 200_000, 400_000])
    parser.add_argument("--D", type=int, default=100)
    parser.add_argument("--bands", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    cfg = DetectorConfig(Method.RCOOK, lam=1e-3, sigma=2.0, D=args.D, seed=0)

    print(f"{'n':>9}{'median s':>10}{'peak MB':>10}{'design MB':>11}{'ratio':>7}")
    for n in args.sizes:
        X, Y, train = inputs(n, args.bands)
        detect(X, Y, cfg, train)
        runs = []
        for _ in range(args.repeats):
            start = time.perf_counter()
            detect(X, Y, cfg, train)
            runs.append(time.perf_counter() - start)
        tracemalloc.start()
        detect(X, Y, cfg, train)
        peak = tracemalloc.get_traced_memory()[1]
        tracemalloc.stop()
        design = 8 * n * (2 * args.D + 1)
        print(f"{n:>9}{statistics.median(runs):>10.3f}{peak / 1e6:>10.1f}{design / 1e6:>11.1f}"
              f"{peak / design:>7.2f}")


if __name__ == "__main__":
    main()
