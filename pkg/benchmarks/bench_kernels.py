"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --n 20000 --d 5
"""
import argparse
import math
import time

import numpy as np

from expconcave import kernels
from expconcave.data import LemmaOneSource
from expconcave.losses import compute_constants
from expconcave.ons import OnsConfig


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--d", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    data = LemmaOneSource.default(args.d, 0.2).sample(args.n)
    X, y = data.X, data.y
    loss = compute_constants("logistic", 1.0)
    cfg = OnsConfig.defaults(loss, args.d, theta=0.19)

    backends = {"python": kernels.get_backend("python")}
    try:
        backends["cython"] = kernels.get_backend("cython")
    except ImportError:
        print("compiled extension not available; timing the fallback only")

    jobs = {
        "ons_run": lambda be: be.ons_run(X, y, 1, 1.0, cfg.eta1, cfg.smoothing_a),
        "ogd_run": lambda be: be.ogd_run(X, y, 1, 1.0, 2.0 / loss.lipschitz_G),
        "rank_one_sequence": lambda be: be.rank_one_sequence(
            np.eye(args.d), np.eye(args.d), 0.0, X),
    }
    print(f"{'kernel':<20}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for job, fn in jobs.items():
        secs = {name: best_of(lambda: fn(be), args.repeat) for name, be in backends.items()}
        speed = secs["python"] / secs["cython"] if "cython" in secs else math.nan
        print(f"{job:<20}" + "".join(f"{s:>11.4f}s" for s in secs.values()) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
