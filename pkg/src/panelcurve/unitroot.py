"""ADF and Phillips-Perron unit-root tests (intercept case)."""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from . import _kernels
from .errors import DomainError, LengthError
from .panel import contiguous_span

# Finite-sample quantiles of the Dickey-Fuller t statistic with intercept.
# Rows follow Fuller's published table; the 0.25 and 0.50 columns were
# simulated (scripts/simulate_df_quantiles.py, 200k replications per size).
DF_PROBS = (0.01, 0.025, 0.05, 0.10, 0.25, 0.50, 0.90, 0.95, 0.975, 0.99)
DF_SIZES = (25, 50, 100, 250, 500, math.inf)
DF_QUANTILES = np.array([
    [-3.75, -3.33, -3.00, -2.63, -2.09, -1.53, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -2.09, -1.55, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -2.09, -1.56, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -2.09, -1.56, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -2.09, -1.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -2.09, -1.56, -0.44, -0.07, 0.23, 0.60],
])
P_FLOOR, P_CEIL = 0.0001, 0.9999
_INV_SIZES = np.array([1.0 / s for s in DF_SIZES])
_PROBITS = norm.ppf(DF_PROBS)


@dataclass(frozen=True)
class UnitRootResult:
    kind: str                 # "ADF" or "PP"
    statistic: float
    pvalue: float
    nobs: int
    lag: Optional[int] = None
    bandwidth: Optional[int] = None
    case: str = "intercept"

    @property
    def order(self):
        return self.lag if self.kind == "ADF" else self.bandwidth


def _check_case(case):
    if case != "intercept":
        raise ValueError(f"only the intercept case is implemented, got {case!r}")


def df_quantiles(n):
    """Quantile row for sample size ``n``, linear in ``1/n`` between table rows."""
    inv = 1.0 / max(float(n), DF_SIZES[0])
    # _INV_SIZES is decreasing; np.interp needs increasing abscissae
    return np.array([
        np.interp(inv, _INV_SIZES[::-1], DF_QUANTILES[::-1, j]) for j in range(len(DF_PROBS))
    ])


def df_pvalue(statistic, n, case="intercept"):
    """Left-tail Dickey-Fuller probability of ``statistic`` at sample size ``n``.

    Monotone cubic interpolation on the probit scale between tabulated
    quantiles, linear probit extrapolation beyond them, clamped to
    ``[0.0001, 0.9999]``.
    """
    _check_case(case)
    if not np.isfinite(statistic):
        raise ValueError("statistic must be finite")
    q = df_quantiles(n)
    if q[0] <= statistic <= q[-1]:
        z = float(PchipInterpolator(q, _PROBITS)(statistic))
    elif statistic < q[0]:
        slope = (_PROBITS[1] - _PROBITS[0]) / (q[1] - q[0])
        z = _PROBITS[0] + slope * (statistic - q[0])
    else:
        slope = (_PROBITS[-1] - _PROBITS[-2]) / (q[-1] - q[-2])
        z = _PROBITS[-1] + slope * (statistic - q[-1])
    return float(min(max(norm.cdf(z), P_FLOOR), P_CEIL))


def sic(rss, n, k):
    """Schwarz criterion ``ln(rss/n) + k ln(n) / n``."""
    if rss <= 0:
        raise DomainError(f"SIC needs rss > 0, got {rss!r}")
    if n <= k:
        raise DomainError(f"SIC needs n > k (n={n}, k={k})")
    return math.log(rss / n) + k * math.log(n) / n


def _ols_t(X, z, col):
    beta, *_ = np.linalg.lstsq(X, z, rcond=None)
    resid = z - X @ beta
    n, k = X.shape
    s2 = float(resid @ resid) / (n - k)
    r = np.linalg.qr(X, mode="r")
    rinv = np.linalg.inv(r)
    var = s2 * float(rinv[col] @ rinv[col])
    se = math.sqrt(var)
    return float(beta[col]), se, float(beta[col]) / se, resid, s2


def _span(series):
    y = np.asarray(series, dtype=np.float64)
    a, b = contiguous_span(y)
    return y[a:b]


def adf_test(series, max_lag=13, case="intercept"):
    """Augmented Dickey-Fuller test with SIC lag selection.

    Every lag 0..max_lag is scored on the common sample trimmed for the
    largest lag; the chosen lag is then refit on its longest sample.  When
    the series is too short to give every candidate positive residual
    degrees of freedom, the search is capped at ``(T - 4) // 2``.
    """
    _check_case(case)
    y = _span(series)
    T = y.shape[0]
    if T < max_lag + 3:
        raise LengthError(f"ADF with max_lag={max_lag} needs >= {max_lag + 3} observations, got {T}")
    pmax = min(max_lag, (T - 4) // 2)
    if pmax < 0:
        raise LengthError(f"ADF needs >= 4 observations, got {T}")
    scores = _kernels.adf_sic_path(y, pmax)
    lag = int(np.argmin(scores))
    X, z = _kernels.adf_design(y, lag, lag + 1)
    _, _, tstat, _, _ = _ols_t(X, z, 1)
    nobs = T - 1 - lag
    return UnitRootResult("ADF", tstat, df_pvalue(tstat, nobs), nobs, lag=lag)


def nw_bandwidth(T):
    """Newey-West automatic Bartlett bandwidth ``floor(4 (T/100)^(2/9))``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return int(math.floor(4.0 * (T / 100.0) ** (2.0 / 9.0)))


def bartlett_weights(B):
    j = np.arange(B + 1)
    return 1.0 - j / (B + 1.0)


def bartlett_lrv(residuals, B):
    """Long-run variance ``g0 + 2 sum_j (1 - j/(B+1)) g_j`` with 1/N autocovariances."""
    e = np.asarray(residuals, dtype=np.float64)
    if B < 0 or B >= e.shape[0]:
        raise DomainError(f"bandwidth {B} must be in [0, {e.shape[0] - 1}]")
    g = _kernels.autocov(e, B)
    w = bartlett_weights(B)
    return float(g[0] + 2.0 * np.dot(w[1:], g[1:]))


def pp_test(series, bandwidth=None, case="intercept"):
    """Phillips-Perron Z_t test on ``dy_t = a + g y_{t-1} + e_t``."""
    _check_case(case)
    y = _span(series)
    T = y.shape[0]
    if T < 10:
        raise LengthError(f"PP test needs >= 10 observations, got {T}")
    X, z = _kernels.adf_design(y, 0, 1)
    N = X.shape[0]
    _, se, tstat, resid, s2 = _ols_t(X, z, 1)
    B = nw_bandwidth(N) if bandwidth is None else int(bandwidth)
    g0 = float(resid @ resid) / N
    lrv = bartlett_lrv(resid, B)
    if lrv <= 0:
        raise DomainError("non-positive long-run variance")
    zt = math.sqrt(g0 / lrv) * tstat - (lrv - g0) * N * se / (2.0 * math.sqrt(lrv) * math.sqrt(s2))
    return UnitRootResult("PP", zt, df_pvalue(zt, N), N, bandwidth=B)
