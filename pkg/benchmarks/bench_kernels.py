"""Time the numba and numpy kernel paths on the same workloads.

    python3 benchmarks/bench_kernels.py [--seeds 256] [--iters 2000] [--repeat 3]

Each workload runs once per backend to warm up (numba compiles or loads its
cache), then ``--repeat`` timed runs; the best time is reported.
"""
import argparse
import time

import numpy as np

from eulab import kernels
from eulab.acceptance import default_perturbed, example_profile
from eulab.dynamics import MAX_PERIODS, TRANSVERSALITY_FLOOR
from eulab.kam import DEFAULT_OPTIONS
from eulab.steady import ChartField


def _best(fn, repeat):
    fn()
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return min(ts)


def workloads(seeds, iters):
    _, pi = default_perturbed()
    bd = pi.descriptor()
    rng = np.random.default_rng(0)
    th = rng.uniform(0, 2 * np.pi, seeds)
    rr = rng.uniform(0.25, 0.42, seeds)
    ys = np.zeros(seeds)
    opts = DEFAULT_OPTIONS.kernel_opts()
    fd = ChartField(example_profile(), mode=1).descriptor(1)
    m = max(seeds // 8, 1)
    ode_args = (fd, 1, 1, 0.0, th[:m], rr[:m], 1e-10, TRANSVERSALITY_FLOOR, 1e-6, 1 - 1e-6, MAX_PERIODS)
    return {
        f"map orbits ({seeds} x {iters})": lambda b: kernels.map_orbits(bd, th, rr, iters, pi.a, pi.b, backend=b),
        f"map stats ({seeds} x {iters})": lambda b: kernels.map_stats(bd, th, rr, iters, pi.a, pi.b, ys, opts,
                                                                      backend=b),
        f"ode returns ({m} seeds)": lambda b: kernels.ode_returns(*ode_args, backend=b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=256)
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'workload':<32}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, fn in workloads(args.seeds, args.iters).items():
        tn = _best(lambda: fn("numba"), args.repeat)
        tp = _best(lambda: fn("numpy"), args.repeat)
        print(f"{name:<32}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}")


if __name__ == "__main__":
    main()
