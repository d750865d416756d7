"""Compare the numba and numpy paths of the hot kernels at desk scale.

    python3 benchmarks/bench_kernels.py [--n 4320] [--r 100] [--m 100] [--repeat 3]

Run with SHAPECORR_DISABLE_NUMBA=1 to time the numpy path alone.
"""

import argparse
import time
import warnings

import numpy as np

warnings.filterwarnings("ignore", message="The TBB threading layer")

from shapecorr import _accel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4320, help="vertices")
    ap.add_argument("--r", type=int, default=100, help="eigenpairs")
    ap.add_argument("--m", type=int, default=100, help="time steps")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    V = rng.normal(size=(args.n, args.r))
    G = rng.normal(size=(args.r, args.m + 1))
    weights = V * V
    tau = 0.01

    backends = [False, True] if _accel.HAVE_NUMBA else [False]
    if _accel.HAVE_NUMBA:  # compile outside the timed region
        small = _accel.project(weights[:8], G, use_numba=True)
        _accel.nearest_l1(small, small, tau, use_numba=True)

    print(f"N={args.n} r={args.r} M={args.m} workers={args.workers}")
    print(f"{'kernel':<12}{'backend':<8}{'seconds':>10}")
    results = {}
    for use_numba in backends:
        name = "numba" if use_numba else "numpy"
        t, samples = best_of(lambda: _accel.project(weights, G, use_numba=use_numba, workers=args.workers),
                             args.repeat)
        results[("project", name)] = samples
        print(f"{'project':<12}{name:<8}{t:>10.4f}")
        t, nn = best_of(lambda: _accel.nearest_l1(samples, samples, tau, workers=args.workers,
                                                  use_numba=use_numba), args.repeat)
        results[("match", name)] = nn
        print(f"{'nearest_l1':<12}{name:<8}{t:>10.4f}")

    if len(backends) == 2:
        same_p = results[("project", "numba")].tobytes() == results[("project", "numpy")].tobytes()
        a, b = results[("match", "numba")], results[("match", "numpy")]
        same_m = all(np.array_equal(x, y) for x, y in zip(a, b))
        print(f"bit-identical: project={same_p} nearest_l1={same_m}")


if __name__ == "__main__":
    main()
