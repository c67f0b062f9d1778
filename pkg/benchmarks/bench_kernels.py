"""Time the numba kernels against their pure-numpy fallbacks.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported in one process; the environment flag only selects
the default dispatch, so no restart is needed to compare them.
"""
import argparse
import timeit

import numpy as np

from fockfisher import kernels


def dh_inputs(n_radial=200, n_angular=1024, seed=0):
    rng = np.random.default_rng(seed)
    r = np.sort(rng.uniform(0.0, 8.0, n_radial))
    w = rng.uniform(0.0, 0.1, n_radial)
    a = rng.uniform(0.0, 1.0, n_radial)
    c = a * rng.uniform(-1.0, 1.0, n_radial)
    return (r, w, a, c, 6.0, 0.37, n_angular, 1e-14)


def laguerre_inputs(n_points=400):
    degrees = np.arange(0, 15, dtype=np.int64)
    alphas = np.tile(np.array([0, 2, 4, 6, 8], dtype=np.int64), 3)
    x = np.linspace(0.0, 60.0, n_points)
    return (degrees, alphas, x)


def best_time(fn, args, repeat):
    fn(*args)  # compile / warm up
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions, best is reported")
    args = parser.parse_args(argv)

    cases = [
        ("dh_fisher_sum 200x1024", kernels.dh_fisher_sum_numba, kernels.dh_fisher_sum_numpy, dh_inputs()),
        ("dh_fisher_sum 400x2048", kernels.dh_fisher_sum_numba, kernels.dh_fisher_sum_numpy, dh_inputs(400, 2048)),
        ("laguerre_table 15x400", kernels.laguerre_table_numba, kernels.laguerre_table_numpy, laguerre_inputs()),
    ]
    print(f"{'kernel':<26}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, fast, slow, inputs in cases:
        t_fast = best_time(fast, inputs, args.repeat)
        t_slow = best_time(slow, inputs, args.repeat)
        print(f"{name:<26}{1e3 * t_fast:>12.3f}{1e3 * t_slow:>12.3f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
