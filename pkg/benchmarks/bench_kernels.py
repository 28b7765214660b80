"""Time each hot kernel under numba and under the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 50]

numba timings exclude compilation (one warm-up call per kernel).
"""
import argparse
import timeit

import numpy as np

from panelcurve import _kernels


def cases(rng):
    y144 = rng.normal(size=144).cumsum()
    y2000 = rng.normal(size=2000).cumsum()
    sizes = np.full(41, 144)
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    values = rng.normal(size=(starts[-1], 6))
    theta = rng.uniform(0, 1, 41)
    e = rng.normal(size=5000)
    return {
        "hp_trend (T=144)": ("hp_trend", (y144, 1600.0)),
        "hp_trend (T=2000)": ("hp_trend", (y2000, 1600.0)),
        "group_means (41x144, 6 cols)": ("group_means", (values, starts)),
        "quasi_demean (41x144, 6 cols)": ("quasi_demean", (values, starts, theta)),
        "autocov (T=5000, 6 lags)": ("autocov", (e, 6)),
        "adf_sic_path (T=144, 13 lags)": ("adf_sic_path", (y144, 13)),
        "adf_design (T=144, lag 4)": ("adf_design", (y144, 4, 5)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    if _kernels.NUMBA is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<32}{'numpy us':>12}{'numba us':>12}{'speedup':>10}")
    for label, (name, call_args) in cases(rng).items():
        row = []
        for impl in (_kernels.NUMPY, _kernels.NUMBA):
            fn = impl[name]
            fn(*call_args)
            best = min(timeit.repeat(lambda: fn(*call_args), number=args.repeat, repeat=5))
            row.append(best / args.repeat * 1e6)
        print(f"{label:<32}{row[0]:>12.1f}{row[1]:>12.1f}{row[0] / row[1]:>9.1f}x")


if __name__ == "__main__":
    main()
