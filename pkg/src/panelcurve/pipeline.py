"""End-to-end analysis: transforms, unit roots, estimation, tests, decision.

:func:`run_analysis` is a pure function of the config and the input bytes;
the returned :class:`AnalysisReport` holds only JSON-compatible values so a
saved report can be re-rendered exactly.
"""
import datetime
import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from . import estimators as est
from . import spectests as st
from .config import AnalysisConfig
from .errors import DataError, LengthError, DomainError, PanelCurveError, StageError
from .hp import hp_trend_panel, unemployment_gap
from .panel import (build_design, first_diff, ingest_csv, log_shift, phillips_spec,
                    recession_dummy, shift_constant)
from .unitroot import adf_test, pp_test

MODE_CODES = {"backward": "BL", "forward": "FL"}
MODEL_NAMES = {"pooled": "Pooled", "fixed": "Fixed", "random": "Random"}
UNIT_ROOT_VARIABLES = (("CPI", "inflation"), ("EI", "expected_cpi"), ("UGAP", "ugap"))
SECTIONS = ("unit_root", "spec_tests", "estimates", "model_choice", "combined")

# report row labels for the Phillips-curve columns
TERM_LABELS = {
    "const": "Intercept",
    "pi_e": "N pi_e",
    "ugap": "N U_GAP",
    "pi_e:recession": "R pi_e (interaction)",
    "ugap:recession": "R U_GAP (interaction)",
}
COMBINED_PAIRS = (("pi_e", "pi_e:recession"), ("ugap", "ugap:recession"))


@dataclass
class AnalysisReport:
    provenance: dict
    unit_root: Optional[dict] = None
    spec_tests: Optional[dict] = None
    estimates: Optional[dict] = None
    model_choice: Optional[dict] = None
    combined: Optional[dict] = None

    def to_dict(self):
        return {
            "provenance": self.provenance,
            "unit_root": self.unit_root,
            "spec_tests": self.spec_tests,
            "estimates": self.estimates,
            "model_choice": self.model_choice,
            "combined": self.combined,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d.get(k) for k in ("provenance",) + SECTIONS})

    def sections(self):
        return [s for s in SECTIONS if getattr(self, s) is not None]


@contextmanager
def _stage(name, context=""):
    """Re-raise library errors with the pipeline stage attached."""
    try:
        yield
    except StageError:
        raise
    except (PanelCurveError, ValueError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc, context) from exc


# -- transforms ---------------------------------------------------------------

@dataclass(frozen=True)
class Prepared:
    data: object
    cpi_shift: float
    unemployment_shift: float
    lam: float


def prepare(data, config):
    """Add ``inflation``, ``ugap`` and ``recession`` series to ``data``."""
    c_cpi = config.cpi_shift if config.cpi_shift is not None else shift_constant(data["cpi"])
    c_u = (config.unemployment_shift if config.unemployment_shift is not None
           else shift_constant(data["unemployment"]))
    if config.log_shift_mode == "uniform":
        c = max(c_cpi if config.cpi_shift is None else 0.0,
                c_u if config.unemployment_shift is None else 0.0)
        c_cpi = config.cpi_shift if config.cpi_shift is not None else c
        c_u = config.unemployment_shift if config.unemployment_shift is not None else c
    lam = config.lam
    inflation = first_diff(log_shift(data["cpi"], c_cpi))
    if config.nairu_source == "unemployment":
        gap = unemployment_gap(data["unemployment"], lam, c_u)
    else:
        gap = log_shift(data["unemployment"], c_u) - hp_trend_panel(inflation, lam)
    dummy = recession_dummy(data["gdp_growth"], config.recession_rule).values
    enriched = data.with_series(inflation=inflation, ugap=gap, recession=dummy)
    return Prepared(enriched, float(c_cpi), float(c_u), float(lam))


# -- unit roots ---------------------------------------------------------------

def _unit_root_cell(fn, row, **kw):
    try:
        r = fn(row, **kw)
    except (LengthError, DomainError) as exc:
        return {"error": str(exc)}
    return {
        "kind": r.kind,
        "statistic": r.statistic,
        "pvalue": r.pvalue,
        "lag": r.lag,
        "bandwidth": r.bandwidth,
        "nobs": r.nobs,
    }


def unit_root_section(data, config):
    tasks = []
    for i, code in enumerate(data.entities):
        for label, series in UNIT_ROOT_VARIABLES:
            row = data[series][i]
            tasks.append((code, label, "ADF", adf_test, row, {"max_lag": config.max_lag}))
            tasks.append((code, label, "PP", pp_test, row, {}))

    def run(task):
        code, label, kind, fn, row, kw = task
        if np.isnan(row).all():
            return {"error": "no observations"}
        try:
            return _unit_root_cell(fn, row, **kw)
        except PanelCurveError as exc:
            raise StageError("unit_root", exc, f"{code}/{label}/{kind}") from exc

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        cells = list(pool.map(run, tasks))        # map keeps task order

    rows = {}
    for (code, label, kind, *_), cell in zip(tasks, cells):
        rows.setdefault(code, {}).setdefault(label, {})[kind] = cell
    return {
        "variables": [v for v, _ in UNIT_ROOT_VARIABLES],
        "tests": ["ADF", "PP"],
        "max_lag": config.max_lag,
        "rows": [{"entity": code, "cells": rows[code]} for code in data.entities],
    }


# -- estimation -----------------------------------------------------------------

def _coef_rows(result, kind):
    se = result.bse(kind)
    tv = result.tvalues(kind)
    pv = result.pvalues(kind)
    return [
        {
            "name": name,
            "label": TERM_LABELS.get(name, name),
            "estimate": float(result.params[j]),
            "se": float(se[j]),
            "statistic": float(tv[j]),
            "distribution": "t",
            "df": int(result.df_resid),
            "pvalue": float(pv[j]),
        }
        for j, name in enumerate(result.names)
    ]


def _model_block(result, kind):
    block = {
        "effects": result.effects,
        "covariance": kind,
        "white": result.white_kind,
        "coefficients": _coef_rows(result, kind),
        "r2_unweighted": float(result.rsquared),
        "r2_weighted": None if result.rsquared_weighted is None else float(result.rsquared_weighted),
        "nobs": int(result.nobs),
        "n_entities": int(result.n_entities),
        "df_resid": int(result.df_resid),
    }
    comp = result.components
    if comp is not None:
        block["variance_components"] = {
            "sigma_u": float(np.sqrt(comp.sigma2_u)),
            "sigma_e": float(np.sqrt(comp.sigma2_e)),
            "rho_u": float(comp.rho_u),
            "rho_e": float(comp.rho_e),
            "truncated": bool(comp.truncated),
        }
    return block


def _combined_block(result, kind):
    out = []
    for base, inter in COMBINED_PAIRS:
        c = est.combined_coefficient(result, base, inter, kind=kind)
        i, j = result.index(base), result.index(inter)
        out.append({
            "term": base,
            "tranquil": float(result.params[i]),
            "interaction": float(result.params[j]),
            "recession": c.estimate,
            "se_tranquil": float(result.bse(kind)[i]),
            "se_diag": c.se_diag,
            "se_full": c.se_full,
            "t_diag": c.t_diag,
            "t_full": c.t_full,
            "p_tranquil": float(result.pvalues(kind)[i]),
            "p_diag": c.p_diag,
            "p_full": c.p_full,
            "distribution": "normal",
        })
    return out


def _test_block(t):
    block = {
        "name": t.name,
        "statistic": float(t.statistic),
        "distribution": t.distribution,
        "df": [int(x) for x in t.df],
        "pvalue": float(t.pvalue),
        "null": t.null,
    }
    flags = {k: v for k, v in t.flags.items() if k != "slopes"}
    if flags:
        block["flags"] = {k: bool(v) for k, v in flags.items()}
    return block


@dataclass(frozen=True)
class ModeFit:
    design: object
    pooled: object
    fixed: object
    random: object
    fe_test: object
    bp_test: object
    honda: object
    hausman: object
    choice: object


def fit_mode(prepared, mode, config):
    """All three estimators plus the test battery for one expectation mode."""
    spec = phillips_spec(mode, cpi_shift=prepared.cpi_shift)
    design = build_design(spec, prepared.data)
    pooled = est.fit_pooled(design, hc=config.white)
    fixed = est.fit_fixed(design, hc=config.white)
    comps = est.swamy_arora_design(design, within=fixed)
    random = est.fit_random(design, components=comps, hc=config.white)
    fe_test = st.redundant_fe_test(pooled, fixed)
    bp = st.breusch_pagan_lm(pooled)
    honda = st.honda_lm(pooled)
    haus = st.hausman(fixed, random, fixed.slope_names)
    choice = st.select_model(fe_test, bp, haus, level=config.level)
    return ModeFit(design, pooled, fixed, random, fe_test, bp, honda, haus, choice)


# -- orchestration ----------------------------------------------------------------

def _provenance(config, raw, prepared, data):
    prov = {
        "software": f"panelcurve {__version__}",
        # format is left out: it changes the rendering, not the analysis
        "config": {**{k: v for k, v in config.to_flat().items() if k != "format"},
                   "input": os.path.basename(config.input) if config.input else None},
        "input_sha256": hashlib.sha256(raw).hexdigest() if raw is not None else None,
        "data": {
            "entities": len(data.entities),
            "periods": len(data.periods),
            "first_period": data.periods[0],
            "last_period": data.periods[-1],
            "balanced": bool(data.balanced),
        },
        "transforms": {
            "cpi_shift": prepared.cpi_shift,
            "unemployment_shift": prepared.unemployment_shift,
            "hp_lambda": prepared.lam,
            "nairu_source": config.nairu_source,
            "recession_rule": config.recession_rule,
        },
        "timestamp": None,
    }
    if config.timestamp:
        prov["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return prov


def run_analysis(config, data=None, raw=None, sections=SECTIONS):
    """Run the configured analysis and assemble the report.

    ``data`` may be passed pre-ingested; otherwise ``config.input`` is read.
    ``sections`` limits which report sections are produced.
    """
    if not isinstance(config, AnalysisConfig):
        raise TypeError("config must be an AnalysisConfig")
    if data is None:
        if config.input is None:
            raise StageError("ingest", DataError("no input file configured"))
        with _stage("ingest", config.input):
            try:
                with open(config.input, "rb") as fh:
                    raw = fh.read()
            except OSError as exc:
                raise DataError(f"cannot read {config.input}: {exc}") from None
            data = ingest_csv(raw)
    if "forward" in config.modes and np.isnan(data["expected_cpi"]).all():
        raise StageError("ingest", DataError("forward mode needs the expected_cpi column"))

    with _stage("transforms"):
        prepared = prepare(data, config)

    report = AnalysisReport(provenance=_provenance(config, raw, prepared, data))

    if "unit_root" in sections and config.unitroot:
        with _stage("unit_root"):
            report.unit_root = unit_root_section(prepared.data, config)

    wanted = {"spec_tests", "estimates", "model_choice", "combined"} & set(sections)
    if not wanted:
        return report

    fits = {}
    for mode in config.modes:
        with _stage("estimation", MODE_CODES[mode]):
            fits[mode] = fit_mode(prepared, mode, config)

    kind = config.covariance
    if "spec_tests" in sections:
        report.spec_tests = {
            MODE_CODES[m]: {
                "redundant_fe": _test_block(f.fe_test),
                "redundant_fe_chi2": _test_block(f.fe_test.companion),
                "breusch_pagan": _test_block(f.bp_test),
                "honda": _test_block(f.honda),
                "hausman": _test_block(f.hausman),
            }
            for m, f in fits.items()
        }
    if "model_choice" in sections:
        report.model_choice = {
            MODE_CODES[m]: {
                "selected": f.choice.selected,
                "row": f.choice.row,
                "reason": f.choice.reason,
                "level": f.choice.level,
                "fe_pvalue": float(f.fe_test.pvalue),
                "re_pvalue": float(f.bp_test.pvalue),
                "hausman_pvalue": float(f.hausman.pvalue),
            }
            for m, f in fits.items()
        }
    if "estimates" in sections:
        report.estimates = {
            MODE_CODES[m]: {
                MODEL_NAMES[e]: _model_block(getattr(f, e), kind) for e in config.effects
            }
            for m, f in fits.items()
        }
    if "combined" in sections:
        report.combined = {
            MODE_CODES[m]: {
                MODEL_NAMES[e]: _combined_block(getattr(f, e), kind) for e in config.effects
            }
            for m, f in fits.items()
        }
    return report
