"""Simulate Dickey-Fuller t-statistic quantiles (intercept case).

Used once to fill the 0.25 and 0.50 rows of the built-in table in
``panelcurve.unitroot``; the remaining probability points come from
Fuller's published table and are printed here only as a cross-check.

    python3 scripts/simulate_df_quantiles.py --reps 200000
"""
import argparse

import numpy as np

PROBS = (0.01, 0.025, 0.05, 0.10, 0.25, 0.50, 0.90, 0.95, 0.975, 0.99)


def df_tstats(n, reps, rng):
    chunk = max(500, 4_000_000 // n)
    out = []
    left = reps
    while left > 0:
        m = min(chunk, left)
        e = rng.standard_normal((m, n + 1))
        y = np.cumsum(e, axis=1)
        dy = np.diff(y, axis=1)
        ylag = y[:, :-1]
        # demean for the intercept
        ylc = ylag - ylag.mean(axis=1, keepdims=True)
        dyc = dy - dy.mean(axis=1, keepdims=True)
        sxx = np.einsum("ij,ij->i", ylc, ylc)
        gamma = np.einsum("ij,ij->i", ylc, dyc) / sxx
        resid = dyc - gamma[:, None] * ylc
        s2 = np.einsum("ij,ij->i", resid, resid) / (n - 2)
        out.append(gamma / np.sqrt(s2 / sxx))
        left -= m
    return np.concatenate(out)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=20190016)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    for n in (25, 50, 100, 250, 500, 5000):
        t = df_tstats(n, args.reps, rng)
        q = np.quantile(t, PROBS)
        print(n, " ".join(f"{v:7.3f}" for v in q))


if __name__ == "__main__":
    main()
