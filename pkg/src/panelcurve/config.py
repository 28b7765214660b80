"""Analysis configuration: defaults, dotted-key files and overrides.

A config file is TOML restricted to flat dotted keys, e.g.::

    recession_rule = "negative"
    hp.lambda = 1600
    hp.nairu_source = "unemployment"
    log_shift.cpi = 1.0
    modes = ["backward"]

Every key has a default, so an empty file (or none) is valid.
"""
from dataclasses import dataclass, replace
from typing import Optional

import tomli

from .errors import ConfigError
from .panel import RECESSION_RULES

MODES = ("backward", "forward")
EFFECT_KINDS = ("pooled", "fixed", "random")
FORMATS = ("text", "csv", "json")

# dotted key -> (attribute, help)
KEYS = {
    "input": ("input", "input CSV path"),
    "recession_rule": ("recession_rule", "nonpositive (growth <= 0) or negative (growth < 0)"),
    "log_shift.mode": ("log_shift_mode", "per_series or uniform log-shift constant"),
    "log_shift.cpi": ("cpi_shift", "override the CPI log-shift constant"),
    "log_shift.unemployment": ("unemployment_shift", "override the unemployment log-shift constant"),
    "hp.lambda": ("hp_lambda", "HP smoothing parameter; unset means the Ravn-Uhlig rule"),
    "hp.exponent": ("hp_exponent", "Ravn-Uhlig exponent x"),
    "hp.periods_per_year": ("hp_periods_per_year", "observations per year"),
    "hp.nairu_source": ("nairu_source", "unemployment or inflation"),
    "modes": ("modes", "expectation modes: backward, forward"),
    "effects": ("effects", "estimators shown: pooled, fixed, random"),
    "level": ("level", "significance level for model selection, in (0, 0.5)"),
    "format": ("format", "text, csv or json"),
    "max_lag": ("max_lag", "ADF maximum lag for SIC selection"),
    "seed": ("seed", "seed for randomized steps (simulate)"),
    "unitroot.enabled": ("unitroot", "run the unit-root section"),
    "unitroot.workers": ("workers", "threads for the unit-root grid"),
    "estimators.white": ("white", "hc0 or hc1"),
    "report.covariance": ("covariance", "standard errors printed: white or classical"),
    "report.timestamp": ("timestamp", "record the wall-clock time in the provenance block"),
}


@dataclass(frozen=True)
class AnalysisConfig:
    input: Optional[str] = None
    recession_rule: str = "nonpositive"
    log_shift_mode: str = "per_series"
    cpi_shift: Optional[float] = None
    unemployment_shift: Optional[float] = None
    hp_lambda: Optional[float] = None
    hp_exponent: float = 2.0
    hp_periods_per_year: int = 4
    nairu_source: str = "unemployment"
    modes: tuple = MODES
    effects: tuple = EFFECT_KINDS
    level: float = 0.05
    format: str = "text"
    max_lag: int = 13
    seed: int = 42
    unitroot: bool = True
    workers: int = 4
    white: str = "hc0"
    covariance: str = "white"
    timestamp: bool = False

    def __post_init__(self):
        object.__setattr__(self, "modes", _as_tuple(self.modes))
        object.__setattr__(self, "effects", _as_tuple(self.effects))
        self.validate()

    def validate(self):
        def bad(msg):
            raise ConfigError(msg)

        if self.recession_rule not in RECESSION_RULES:
            bad(f"recession_rule must be one of {RECESSION_RULES}")
        if self.log_shift_mode not in ("per_series", "uniform"):
            bad("log_shift.mode must be per_series or uniform")
        for name in ("cpi_shift", "unemployment_shift"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                bad(f"log_shift constants must be > 0, got {v!r}")
        if self.hp_lambda is not None and not self.hp_lambda > 0:
            bad("hp.lambda must be > 0")
        if not self.hp_exponent > 0 or self.hp_periods_per_year < 1:
            bad("hp.exponent must be > 0 and hp.periods_per_year >= 1")
        if self.nairu_source not in ("unemployment", "inflation"):
            bad("hp.nairu_source must be unemployment or inflation")
        if not self.modes or any(m not in MODES for m in self.modes):
            bad(f"modes must be a non-empty subset of {MODES}")
        if not self.effects or any(e not in EFFECT_KINDS for e in self.effects):
            bad(f"effects must be a non-empty subset of {EFFECT_KINDS}")
        if not 0.0 < self.level < 0.5:
            bad("level must lie in (0, 0.5)")
        if self.format not in FORMATS:
            bad(f"format must be one of {FORMATS}")
        if self.max_lag < 0:
            bad("max_lag must be >= 0")
        if self.workers < 1:
            bad("unitroot.workers must be >= 1")
        if self.white not in ("hc0", "hc1"):
            bad("estimators.white must be hc0 or hc1")
        if self.covariance not in ("white", "classical"):
            bad("report.covariance must be white or classical")

    @property
    def lam(self):
        from .hp import ravn_uhlig_lambda
        if self.hp_lambda is not None:
            return float(self.hp_lambda)
        return ravn_uhlig_lambda(self.hp_periods_per_year, self.hp_exponent)

    def to_flat(self):
        """Dotted-key echo of every setting (JSON-friendly)."""
        out = {}
        for key, (attr, _) in KEYS.items():
            v = getattr(self, attr)
            out[key] = list(v) if isinstance(v, tuple) else v
        return out

    def updated(self, **changes):
        return replace(self, **changes)


def _as_tuple(v):
    if isinstance(v, str):
        return tuple(p.strip() for p in v.split(",") if p.strip())
    return tuple(v)


def _flatten(tree, prefix=""):
    flat = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def _coerce(attr, value):
    if value is None:
        return None
    default = getattr(AnalysisConfig, attr, None)
    try:
        if attr in ("modes", "effects"):
            return _as_tuple(value)
        if isinstance(default, bool):
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes", "on"):
                    return True
                if value.lower() in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float) or attr in ("cpi_shift", "unemployment_shift", "hp_lambda"):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value {value!r} for {attr}") from None


def from_mapping(mapping, base=None):
    """Apply dotted-key settings to ``base`` (defaults if omitted)."""
    changes = {}
    for key, value in _flatten(mapping).items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        attr = KEYS[key][0]
        changes[attr] = _coerce(attr, value)
    base = AnalysisConfig() if base is None else base
    return replace(base, **changes)


def load_config(path, base=None):
    try:
        with open(path, "rb") as fh:
            tree = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return from_mapping(tree, base)


def parse_assignment(text):
    """``"hp.lambda=1600"`` -> ``("hp.lambda", "1600")``."""
    if "=" not in text:
        raise ConfigError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def describe_keys():
    width = max(len(k) for k in KEYS)
    defaults = AnalysisConfig().to_flat()
    lines = []
    for key, (_, help_text) in KEYS.items():
        lines.append(f"  {key:<{width}}  {help_text} (default: {defaults[key]!r})")
    return "\n".join(lines)
