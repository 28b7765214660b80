"""Synthetic panels with known Phillips-curve parameters.

The inflation equation is

    pi_it = b0 + w_i + b1*pe_it + b2*gap_it + b3*pe_it*D_it + b4*gap_it*D_it + s_it*e_it

where ``pe`` is lagged inflation (backward) or the expected-inflation
series (forward), ``gap`` is computed from the simulated unemployment with
exactly the transform the analysis pipeline applies, and ``s_it`` is
``sigma_e`` scaled by ``recession_noise_scale`` in recession quarters.
CPI levels are written so that the default log shift (``c = 1``) inverts
them, which makes noiseless panels exactly recoverable.
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .hp import unemployment_gap
from .panel import PanelDataset, format_quarter, quarter_ordinal, shift_constant

COUNTRY_CODES = (
    "AG", "AU", "BD", "BG", "BR", "CH", "CL", "CN", "CZ", "DK", "ES", "FN", "FR", "GR",
    "HN", "ID", "IN", "IR", "IT", "JP", "KO", "MX", "MY", "NL", "NW", "OE", "PH", "PO",
    "PT", "RM", "RS", "SA", "SD", "SP", "SW", "TH", "TK", "TW", "UK", "US", "VE",
)


@dataclass(frozen=True)
class SimConfig:
    n_entities: int = 41
    n_periods: int = 145
    beta: tuple = (0.0035, 0.48, -0.07, 0.36, -0.07)
    sigma_u: float = 0.004
    sigma_e: float = 0.004
    expectation: str = "backward"
    recession_process: str = "blocks"     # "blocks" (Markov) or "bernoulli"
    recession_prob: float = 0.08          # entry prob (blocks) / per-quarter prob
    recession_persistence: float = 0.7    # P(stay in recession), blocks only
    recession_noise_scale: float = 1.0
    expected_mean: float = 0.008
    expected_ar: float = 0.7
    expected_sd: float = 0.003
    effect_loading: float = 1.0           # expected-inflation mean shifts by loading * w_i
    unemp_level: float = 7.0
    unemp_ar: float = 0.85
    unemp_sd: float = 0.03
    unemp_trend_sd: float = 0.005
    lam: float = 1600.0
    start: str = "1980Q1"
    seed: int = 42
    entities: Optional[tuple] = None

    def __post_init__(self):
        if self.sigma_u < 0 or self.sigma_e < 0:
            raise ValueError("standard deviations must be >= 0")
        for name in ("expected_ar", "unemp_ar"):
            if not -1.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (-1, 1)")
        if self.expectation not in ("backward", "forward"):
            raise ValueError(f"expectation must be backward or forward, got {self.expectation!r}")
        if self.recession_process not in ("blocks", "bernoulli"):
            raise ValueError(f"unknown recession process {self.recession_process!r}")
        if len(self.beta) != 5:
            raise ValueError("beta needs five entries (b0..b4)")
        if self.n_periods < 4:
            raise ValueError("n_periods must be >= 4")

    def entity_codes(self):
        if self.entities is not None:
            return tuple(sorted(self.entities))
        if self.n_entities <= len(COUNTRY_CODES):
            return COUNTRY_CODES[: self.n_entities]
        return tuple(f"E{i:03d}" for i in range(1, self.n_entities + 1))


def regime_config(seed=0, **overrides):
    """Forward-looking DGP where the Phillips slope only holds in tranquil quarters.

    Tranquil slope -0.07, no extra recession slope (b4 = 0), recession noise
    ten times larger; the recession combined coefficient should come out
    insignificant while the tranquil one stays significant.
    """
    base = SimConfig(
        beta=(0.003, 0.5, -0.07, 0.1, 0.0),
        expectation="forward",
        sigma_e=0.03,
        sigma_u=0.01,
        recession_noise_scale=10.0,
        unemp_sd=0.05,
        seed=seed,
    )
    return replace(base, **overrides)


def _recessions(rng, cfg, T):
    if cfg.recession_process == "bernoulli":
        return rng.random(T) < cfg.recession_prob
    d = np.zeros(T, dtype=bool)
    share = cfg.recession_prob / (1.0 - cfg.recession_persistence + cfg.recession_prob)
    d[0] = rng.random() < share
    u = rng.random(T)
    for t in range(1, T):
        d[t] = u[t] < (cfg.recession_persistence if d[t - 1] else cfg.recession_prob)
    return d


def _ar1(rng, T, phi, sd):
    x = np.empty(T)
    x[0] = rng.normal(0.0, sd / np.sqrt(1.0 - phi**2))
    shocks = rng.normal(0.0, sd, T)
    for t in range(1, T):
        x[t] = phi * x[t - 1] + shocks[t]
    return x


def simulate_panel(cfg):
    """Draw a :class:`PanelDataset` from ``cfg``; identical seeds give identical data."""
    codes = cfg.entity_codes()
    n, T = len(codes), cfg.n_periods
    b0, b1, b2, b3, b4 = cfg.beta
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(n)]

    omega = np.empty(n)
    D = np.empty((n, T), dtype=bool)
    growth = np.empty((n, T))
    unemp = np.empty((n, T))
    expected = np.empty((n, T))
    eps = np.empty((n, T))
    for i, rng in enumerate(streams):
        omega[i] = rng.normal(0.0, cfg.sigma_u) if cfg.sigma_u > 0 else 0.0
        D[i] = _recessions(rng, cfg, T)
        mag = np.abs(rng.normal(0.6, 0.5, T)) + 0.05
        growth[i] = np.where(D[i], -mag, mag)
        level = np.log(cfg.unemp_level) + rng.normal(0.0, 0.2)
        trend = level + np.cumsum(rng.normal(0.0, cfg.unemp_trend_sd, T))
        unemp[i] = np.exp(trend + _ar1(rng, T, cfg.unemp_ar, cfg.unemp_sd))
        expected[i] = (cfg.expected_mean + cfg.effect_loading * omega[i]
                       + _ar1(rng, T, cfg.expected_ar, cfg.expected_sd))
        eps[i] = rng.standard_normal(T)

    gap = unemployment_gap(unemp, cfg.lam, shift_constant(unemp))
    Df = D.astype(np.float64)
    scale = cfg.sigma_e * np.where(D, cfg.recession_noise_scale, 1.0)

    infl = np.full((n, T), np.nan)        # infl[:, t] is the change from t-1 to t
    for i in range(n):
        prev = (b0 + omega[i]) / (1.0 - b1) if cfg.expectation == "backward" else 0.0
        for t in range(1, T):
            pe = prev if cfg.expectation == "backward" else expected[i, t]
            infl[i, t] = (b0 + omega[i] + b1 * pe + b2 * gap[i, t]
                          + Df[i, t] * (b3 * pe + b4 * gap[i, t]) + scale[i, t] * eps[i, t])
            prev = infl[i, t]
        if cfg.expectation == "backward":
            # adaptive expectations: survey proxy tracks last quarter's inflation
            expected[i, 1:] = infl[i, :-1] + (expected[i, 1:] - cfg.expected_mean
                                               - cfg.effect_loading * omega[i])
            expected[i, :2] = expected[i, 2]

    path = np.concatenate([np.zeros((n, 1)), np.cumsum(infl[:, 1:], axis=1)], axis=1)
    base = np.maximum(np.log(100.0), np.log(2.0) - path.min(axis=1))
    cpi = np.exp(path + base[:, None]) - 1.0

    first = quarter_ordinal(cfg.start)
    periods = tuple(format_quarter(first + t) for t in range(T))
    return PanelDataset(codes, periods, {
        "cpi": cpi,
        "expected_cpi": expected,
        "unemployment": unemp,
        "gdp_growth": growth,
    })
