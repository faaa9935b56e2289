"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--trials 4096] [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from covertgeo.kernels import _fallback

try:
    from covertgeo.kernels import _core
except ImportError:
    _core = None


def ppp_inputs(trials, lam=1e-3, radius=323.3, seed=1):
    rng = np.random.default_rng(seed)
    counts = rng.poisson(lam * math.pi * radius ** 2, trials).astype(np.int64)
    n = int(counts.sum())
    r = radius * np.sqrt(rng.random(n))
    th = 2 * math.pi * rng.random(n)
    gains = rng.standard_exponential(n)
    return r * np.cos(th), r * np.sin(th), gains, counts


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=4096)
    ap.add_argument("--betas", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    x, y, g, counts = ppp_inputs(args.trials)
    rng = np.random.default_rng(1)
    sq = rng.poisson(1e-3 * 4 * 323.0 ** 2, args.trials).astype(np.int64)
    u, v = rng.random((2, int(sq.sum())))
    g2 = rng.standard_exponential(u.size)
    betas = np.logspace(-8, 4, args.betas)
    cases = {
        "shot_noise_sums alpha=4, unit gains":
            lambda m: m.shot_noise_sums(x, y, None, None, counts, (2.0, 0.0), (-5.0, 0.0), 0.1, 4.0),
        "shot_noise_sums alpha=4, Rayleigh":
            lambda m: m.shot_noise_sums(x, y, g, g, counts, (2.0, 0.0), (-5.0, 0.0), 0.1, 4.0),
        "shot_noise_sums alpha=3.5, Rayleigh":
            lambda m: m.shot_noise_sums(x, y, g, g, counts, (2.0, 0.0), (-5.0, 0.0), 0.1, 3.5),
        "disk_shot_noise_sums alpha=4, Rayleigh":
            lambda m: m.disk_shot_noise_sums(u, v, g2, g2, sq, 323.0, (2.0, 0.0), (-5.0, 0.0), 0.1, 4.0),
        "threshold_offsets":
            lambda m: m.threshold_offsets(betas),
    }
    print(f"{int(counts.sum())} interferers over {args.trials} trials; {args.betas} thresholds")
    print(f"{'kernel':40s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, call in cases.items():
        t_py = best(lambda: call(_fallback), args.repeat)
        if _core is None:
            print(f"{name:40s} {1e3 * t_py:11.2f} {'n/a':>12s}")
            continue
        t_c = best(lambda: call(_core), args.repeat)
        print(f"{name:40s} {1e3 * t_py:11.2f} {1e3 * t_c:12.2f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
