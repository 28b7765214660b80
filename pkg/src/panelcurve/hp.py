"""Hodrick-Prescott trend extraction and the unemployment gap."""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, LengthError
from .panel import contiguous_span, log_shift


def ravn_uhlig_lambda(periods_per_year, x, base=1600.0):
    """Smoothing parameter ``(periods_per_year / 4) ** x * base``.

    Quarterly data gives 1600 for any exponent.
    """
    if periods_per_year < 1:
        raise ValueError("periods_per_year must be >= 1")
    if x <= 0:
        raise ValueError("exponent must be > 0")
    return (periods_per_year / 4.0) ** x * base


@dataclass(frozen=True)
class SmoothingRule:
    periods_per_year: int = 4
    exponent: float = 2.0
    base: float = 1600.0

    @property
    def lam(self):
        return ravn_uhlig_lambda(self.periods_per_year, self.exponent, self.base)


@dataclass(frozen=True)
class HPResult:
    trend: np.ndarray
    cycle: np.ndarray
    lam: float


def hp_filter(series, lam):
    """Split ``series`` into trend and cycle.

    The trend solves ``(I + lam * D'D) tau = y`` (D = second differences,
    natural boundary rows) with a banded LDL' factorization.  Leading and
    trailing holes are carried through as holes; an interior hole raises
    DomainError.
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("hp_filter expects a 1-D series")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam!r}")
    a, b = contiguous_span(y)
    if b - a < 4:
        raise LengthError(f"HP filter needs at least 4 observations, span has {b - a}")
    trend = np.full(y.shape, np.nan)
    trend[a:b] = _kernels.hp_trend(y[a:b], lam)
    return HPResult(trend=trend, cycle=y - trend, lam=float(lam))


def hp_trend_panel(grid, lam):
    """Row-wise HP trend of an entity x period grid.

    Rows that are entirely holes stay holes; any other row must have a
    contiguous span of at least 4 values.
    """
    g = np.asarray(grid, dtype=np.float64)
    out = np.full(g.shape, np.nan)
    for i, row in enumerate(g):
        if np.isnan(row).all():
            continue
        try:
            out[i] = hp_filter(row, lam).trend
        except (LengthError, DomainError) as exc:
            raise type(exc)(f"row {i}: {exc}") from exc
    return out


def unemployment_gap(u, lam, c):
    """Log-shifted unemployment minus its HP trend (the log NAIRU).

    Works on a single series or row-wise on an entity x period grid.
    """
    arr = np.asarray(u, dtype=np.float64)
    logu = log_shift(arr, c)
    if arr.ndim == 1:
        return logu - hp_filter(logu, lam).trend
    return logu - hp_trend_panel(logu, lam)
