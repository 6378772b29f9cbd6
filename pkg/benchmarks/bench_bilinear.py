"""Compiled vs pure-Python triangle quadrature on the normal-form operator.

    python3 benchmarks/bench_bilinear.py --n 255 --r-max 24 --repeat 3
"""

import argparse
import time

import numpy as np

from zakharov_lab import _bilinear_py
from zakharov_lab.grid import make_grid
from zakharov_lab.normal_form import KERNEL, Denominator, FrequencyRegion, bilinear


def _best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=255)
    p.add_argument("--r-max", type=float, default=24.0)
    p.add_argument("--beta", type=float, default=5.0)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    grid = make_grid(args.n, args.r_max)
    r = grid.r
    f = grid.field(np.exp(-0.5 * r**2) * (np.sin(12.0 * r) + np.sin(3.0 * r)) / r)
    g = grid.field(np.exp(-(r / 6.0) ** 2))
    region = FrequencyRegion.of("XL", "LL", beta=args.beta)

    def run(kernel):
        return bilinear(f, g, region, Denominator.SCHRODINGER_PLUS, 1.0, kernel=kernel)

    rows = []
    if KERNEL == "compiled":
        from zakharov_lab._bilinear import triangle_quadrature as compiled
        rows.append(("compiled", *_best_of(lambda: run(compiled), args.repeat)))
    else:
        print("compiled kernel unavailable, timing the Python kernel only")
    rows.append(("python", *_best_of(lambda: run(_bilinear_py.triangle_quadrature),
                                     args.repeat)))

    print(f"grid n={args.n} r_max={args.r_max} beta={args.beta}")
    for name, secs, _ in rows:
        print(f"{name:>9}: {secs * 1e3:9.1f} ms")
    if len(rows) == 2:
        a, b = rows[0][2].values, rows[1][2].values
        diff = np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)
        print(f"  speedup: {rows[1][1] / rows[0][1]:9.1f}x   max relative difference {diff:.2e}")


if __name__ == "__main__":
    main()
