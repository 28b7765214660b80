"""Hot numeric kernels.

Each kernel exists twice: a loop form compiled with ``numba.njit`` and a
pure numpy/scipy form.  The numba path is used when numba imports and the
environment variable ``PANELCURVE_DISABLE_NUMBA`` is unset (or ``0``).
Both paths are importable directly through :data:`NUMBA` and :data:`NUMPY`
so tests and ``benchmarks/bench_kernels.py`` can compare them.
"""
import os

import numpy as np
from scipy.linalg import solveh_banded

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_disabled = os.environ.get("PANELCURVE_DISABLE_NUMBA", "").strip() not in ("", "0")
USE_NUMBA = numba is not None and not _disabled
BACKEND = "numba" if USE_NUMBA else "numpy"


def _jit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------------------
# HP filter.  The trend solves (I + lam D'D) tau = y; we compute the cycle
# c = y - tau = D' (D D' + I/lam)^-1 D y instead, which is exact (zero) for
# affine inputs and keeps the error proportional to the size of D y.


def hp_bands(n, lam):
    """Upper bands of ``D D' + I / lam`` (order ``n - 2``): diag, first and second off-diagonals."""
    m = n - 2
    d0 = np.full(m, 6.0 + 1.0 / lam)
    d1 = np.full(max(m - 1, 0), -4.0)
    d2 = np.full(max(m - 2, 0), 1.0)
    return d0, d1, d2


def _second_diff(y):
    n = y.shape[0]
    w = np.empty(n - 2)
    for i in range(n - 2):
        w[i] = y[i] - 2.0 * y[i + 1] + y[i + 2]
    return w


def _second_diff_adjoint(v, n):
    # D' v for the (n-2) x n second-difference matrix
    c = np.zeros(n)
    for i in range(v.shape[0]):
        c[i] += v[i]
        c[i + 1] -= 2.0 * v[i]
        c[i + 2] += v[i]
    return c


def _pentadiag_ldl_solve(d0, d1, d2, y):
    # Symmetric positive definite pentadiagonal LDL' solve, no pivoting.
    n = y.shape[0]
    D = np.empty(n)
    L1 = np.zeros(n)
    L2 = np.zeros(n)
    for i in range(n):
        if i >= 2:
            L2[i] = d2[i - 2] / D[i - 2]
        if i >= 1:
            acc = d1[i - 1]
            if i >= 2:
                acc -= L2[i] * D[i - 2] * L1[i - 1]
            L1[i] = acc / D[i - 1]
        piv = d0[i]
        if i >= 1:
            piv -= L1[i] * L1[i] * D[i - 1]
        if i >= 2:
            piv -= L2[i] * L2[i] * D[i - 2]
        D[i] = piv
    z = np.empty(n)
    for i in range(n):
        v = y[i]
        if i >= 1:
            v -= L1[i] * z[i - 1]
        if i >= 2:
            v -= L2[i] * z[i - 2]
        z[i] = v
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        v = z[i] / D[i]
        if i + 1 < n:
            v -= L1[i + 1] * x[i + 1]
        if i + 2 < n:
            v -= L2[i + 2] * x[i + 2]
        x[i] = v
    return x


def _hp_trend_numpy(y, lam):
    n = y.shape[0]
    d0, d1, d2 = hp_bands(n, lam)
    ab = np.zeros((3, n - 2))
    ab[0, 2:] = d2
    ab[1, 1:] = d1
    ab[2, :] = d0
    w = y[2:] - 2.0 * y[1:-1] + y[:-2]
    v = solveh_banded(ab, w)
    c = np.zeros(n)
    c[:-2] += v
    c[1:-1] -= 2.0 * v
    c[2:] += v
    return y - c


# ---------------------------------------------------------------------------
# Grouped (quasi-)demeaning over contiguous row blocks


def _group_means_loop(values, starts):
    g = starts.shape[0] - 1
    k = values.shape[1]
    out = np.zeros((g, k))
    for j in range(g):
        a, b = starts[j], starts[j + 1]
        for r in range(a, b):
            for c in range(k):
                out[j, c] += values[r, c]
        for c in range(k):
            out[j, c] /= b - a
    return out


def _group_means_numpy(values, starts):
    sizes = np.diff(starts)
    return np.add.reduceat(values, starts[:-1], axis=0) / sizes[:, None]


def _quasi_demean_numpy(values, starts, theta):
    means = _group_means_numpy(values, starts)
    sizes = np.diff(starts)
    return values - np.repeat(theta[:, None] * means, sizes, axis=0)


# ---------------------------------------------------------------------------
# Autocovariances, 1/N convention, no demeaning


def _autocov_loop(e, maxlag):
    n = e.shape[0]
    out = np.zeros(maxlag + 1)
    for j in range(maxlag + 1):
        s = 0.0
        for t in range(j, n):
            s += e[t] * e[t - j]
        out[j] = s / n
    return out


def _autocov_numpy(e, maxlag):
    n = e.shape[0]
    return np.array([e[j:] @ e[: n - j] for j in range(maxlag + 1)]) / n


# ---------------------------------------------------------------------------
# ADF lag search: SIC for every lag 0..max_lag on the common trimmed sample


def _adf_design(y, lag, start):
    # Rows t = start .. T-1 of dy_t = a + g*y_{t-1} + sum_i phi_i*dy_{t-i}
    T = y.shape[0]
    n = T - start
    X = np.empty((n, lag + 2))
    z = np.empty(n)
    for r in range(n):
        t = start + r
        z[r] = y[t] - y[t - 1]
        X[r, 0] = 1.0
        X[r, 1] = y[t - 1]
        for i in range(1, lag + 1):
            X[r, 1 + i] = y[t - i] - y[t - i - 1]
    return X, z


def _adf_design_numpy(y, lag, start):
    dy = np.diff(y)
    t = np.arange(start, y.shape[0])
    cols = [np.ones(t.size), y[t - 1]] + [dy[t - 1 - i] for i in range(1, lag + 1)]
    return np.column_stack(cols), dy[t - 1]


def _adf_sic_path_numpy(y, max_lag):
    start = max_lag + 1
    n = y.shape[0] - start
    out = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        X, z = _adf_design_numpy(y, lag, start)
        beta, *_ = np.linalg.lstsq(X, z, rcond=None)
        rss = float(np.sum((z - X @ beta) ** 2))
        out[lag] = np.log(rss / n) + (lag + 2) * np.log(n) / n
    return out


NUMPY = {
    "hp_trend": _hp_trend_numpy,
    "group_means": _group_means_numpy,
    "quasi_demean": _quasi_demean_numpy,
    "autocov": _autocov_numpy,
    "adf_sic_path": _adf_sic_path_numpy,
    "adf_design": _adf_design_numpy,
}

if numba is not None:
    _ldl_nb = _jit(_pentadiag_ldl_solve)
    _bands_nb = _jit(hp_bands)
    _adf_design_nb = _jit(_adf_design)

    _d2_nb = _jit(_second_diff)
    _d2t_nb = _jit(_second_diff_adjoint)

    def _hp_trend_src(y, lam):
        n = y.shape[0]
        d0, d1, d2 = _bands_nb(n, lam)
        v = _ldl_nb(d0, d1, d2, _d2_nb(y))
        return y - _d2t_nb(v, n)

    def _adf_sic_src(y, max_lag):
        start = max_lag + 1
        n = y.shape[0] - start
        out = np.empty(max_lag + 1)
        for lag in range(max_lag + 1):
            X, z = _adf_design_nb(y, lag, start)
            beta = np.linalg.lstsq(X, z, -1.0)[0]
            resid = z - X @ beta
            rss = resid @ resid
            out[lag] = np.log(rss / n) + (lag + 2) * np.log(n) / n
        return out

    _group_means_nb = _jit(_group_means_loop)

    def _quasi_demean_src(values, starts, theta):
        means = _group_means_nb(values, starts)
        out = values.copy()
        for j in range(starts.shape[0] - 1):
            for r in range(starts[j], starts[j + 1]):
                for c in range(values.shape[1]):
                    out[r, c] -= theta[j] * means[j, c]
        return out

    NUMBA = {
        "hp_trend": _jit(_hp_trend_src),
        "group_means": _group_means_nb,
        "quasi_demean": _jit(_quasi_demean_src),
        "autocov": _jit(_autocov_loop),
        "adf_sic_path": _jit(_adf_sic_src),
        "adf_design": _adf_design_nb,
    }
else:  # pragma: no cover
    NUMBA = None

_active = NUMBA if USE_NUMBA else NUMPY


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def hp_trend(y, lam):
    return _active["hp_trend"](_f64(y), float(lam))


def group_means(values, starts):
    return _active["group_means"](_f64(values), _i64(starts))


def quasi_demean(values, starts, theta):
    return _active["quasi_demean"](_f64(values), _i64(starts), _f64(theta))


def autocov(e, maxlag):
    return _active["autocov"](_f64(e), int(maxlag))


def adf_sic_path(y, max_lag):
    return _active["adf_sic_path"](_f64(y), int(max_lag))


def adf_design(y, lag, start):
    return _active["adf_design"](_f64(y), int(lag), int(start))
