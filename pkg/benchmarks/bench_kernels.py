"""Compare the compiled and NumPy OU kernels.

    python3 benchmarks/bench_kernels.py [--trajectories 512] [--steps 1000 4000] [--repeat 5]

Both backends consume the same normal deviates; the script checks that the
outputs are bit-identical before reporting timings.
"""

import argparse
import math
import sys
import timeit

import numpy as np

from nvbath import kernels


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trajectories", type=int, default=512, help="rows per block (the simulator uses 512)")
    p.add_argument("--steps", type=int, nargs="+", default=[1000, 4000, 16000])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    py = kernels.get_backend("python")
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1

    a, s, sigma, dt = math.exp(-0.01), 0.1, 1.0, 1e-9
    print(f"{'kernel':<14}{'steps':>8}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}  identical")
    for n in args.steps:
        xi = np.random.default_rng(args.seed).standard_normal((args.trajectories, n + 1))
        idx = np.unique(np.linspace(0, n, 9).astype(np.intp))
        cases = {
            "ou_paths": (lambda m: m.ou_paths(xi, a, s, sigma)),
            "ou_integrals": (lambda m: m.ou_integrals(xi, a, s, sigma, dt, idx)),
        }
        for name, call in cases.items():
            same = np.array_equal(call(py), call(cy))
            t_py = bench(lambda: call(py), args.repeat)
            t_cy = bench(lambda: call(cy), args.repeat)
            print(f"{name:<14}{n:>8}{1e3 * t_py:>14.2f}{1e3 * t_cy:>14.2f}{t_py / t_cy:>10.1f}  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
