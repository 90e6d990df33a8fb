"""Compare the compiled kernels with the pure-Python fallback.

Run ``python benchmarks/bench_kernels.py [--repeat N]``; prints one line per
kernel with the best wall time of each backend and the speed-up.
"""
import argparse
import timeit

import numpy as np

from blenderlab import _pykernels, kernels
from blenderlab.examples import polynomial_example

F0 = polynomial_example()[0]
COEFFS = np.ascontiguousarray(F0.pb[0], dtype=float)
BUMPS = np.ascontiguousarray(np.asarray(F0.pb[1], dtype=float).reshape(-1, 3))
TABLE = np.array([[0.0016, 0.96, 0.0, 0.0, 0.0], [0.0384, 0.96, 0.0, 0.0, 0.0], list(COEFFS) + [0.0] * (5 - len(COEFFS))])
DEGREES = np.array([1, 1, len(COEFFS) - 1], dtype=np.int64)
RNG = np.random.default_rng(0)
WORD = RNG.integers(0, 3, 200).astype(np.int64)
GRID = np.linspace(0.0, 1.0, 2001)
SERIES = list(RNG.uniform(-1, 1, 9)), [0.0, 1.2] + list(RNG.uniform(-1, 1, 7))

CASES = {
    "pb_taylor x1000": lambda k: [k.pb_taylor(COEFFS, BUMPS, x) for x in GRID[:1000]],
    "pb_invert x200": lambda k: [k.pb_invert(COEFFS, BUMPS, y, 0.0, 1.0, 0.5) for y in GRID[100:1900:9]],
    "forward_orbit n=20000": lambda k: k.forward_orbit(COEFFS, BUMPS, 0.3, 20000),
    "backward_orbit n=2000": lambda k: k.backward_orbit(COEFFS, BUMPS, 0.3, 2000, 0.1, 0.5),
    "word_orbit |w|=200, 2001 pts": lambda k: k.word_orbit(TABLE, DEGREES, WORD, GRID),
    "series_compose order 8 x200": lambda k: [k.series_compose(*SERIES) for _ in range(200)],
}


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    ck = kernels.compiled_kernels
    print(f"{'kernel':32s} {'python [s]':>12s} {'compiled [s]':>13s} {'speed-up':>9s}")
    for name, case in CASES.items():
        tp = best(lambda: case(_pykernels), args.repeat)
        if ck is None:
            print(f"{name:32s} {tp:12.4f} {'n/a':>13s} {'n/a':>9s}")
            continue
        tc = best(lambda: case(ck), args.repeat)
        print(f"{name:32s} {tp:12.4f} {tc:13.5f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
