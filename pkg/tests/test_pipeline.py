import numpy as np
import pytest
from scipy import stats

from panelcurve import fixture_path
from panelcurve.config import AnalysisConfig
from panelcurve.errors import DataError, StageError
from panelcurve.panel import PanelDataset, ingest_csv
from panelcurve.pipeline import SECTIONS, AnalysisReport, run_analysis
from panelcurve.report import STAR_LEVELS, stars
from panelcurve.spectests import distribution_sf


@pytest.fixture(scope="module")
def fixture_data():
    return ingest_csv(fixture_path())


@pytest.fixture(scope="module")
def full_report():
    return run_analysis(AnalysisConfig(input=fixture_path()))


def test_all_sections_and_decision(full_report):
    assert full_report.sections() == list(SECTIONS)
    for mode in ("BL", "FL"):
        assert full_report.model_choice[mode]["selected"] == "FixedEffects"
        assert full_report.spec_tests[mode]["hausman"]["df"] == [4]
    assert full_report.provenance["input_sha256"]
    assert full_report.provenance["config"]["input"] == "fixture.csv"


def test_backward_only_has_three_columns(fixture_data):
    r = run_analysis(AnalysisConfig(modes=("backward",), unitroot=False), data=fixture_data)
    assert list(r.estimates) == ["BL"]
    assert list(r.estimates["BL"]) == ["Pooled", "Fixed", "Random"]


def test_degenerate_random_effects_in_backward_mode(full_report):
    vc = full_report.estimates["BL"]["Random"]["variance_components"]
    assert vc["rho_u"] == 0.0 and vc["rho_e"] == 1.0 and vc["truncated"]
    po = full_report.estimates["BL"]["Pooled"]["coefficients"]
    re = full_report.estimates["BL"]["Random"]["coefficients"]
    np.testing.assert_allclose([c["estimate"] for c in re], [c["estimate"] for c in po], atol=1e-8)


def test_unitroot_toggle_changes_nothing_else(fixture_data, full_report):
    r = run_analysis(AnalysisConfig(input=fixture_path(), unitroot=False))
    assert r.unit_root is None
    for name in ("spec_tests", "estimates", "model_choice", "combined"):
        assert getattr(r, name) == getattr(full_report, name)


def test_deterministic(fixture_data):
    cfg = AnalysisConfig(modes=("forward",), unitroot=True, workers=3)
    a = run_analysis(cfg, data=fixture_data).to_dict()
    b = run_analysis(cfg.updated(workers=1), data=fixture_data).to_dict()
    a["provenance"]["config"].pop("unitroot.workers")
    b["provenance"]["config"].pop("unitroot.workers")
    assert a == b


def test_combined_identity(full_report):
    for mode in full_report.combined.values():
        for terms in mode.values():
            for t in terms:
                assert abs(t["recession"] - (t["tranquil"] + t["interaction"])) <= 1e-12
                assert t["se_diag"] >= 0 and t["se_full"] >= 0


def test_pvalues_recomputable_and_stars_consistent(full_report):
    for mode in full_report.spec_tests.values():
        for t in mode.values():
            p = distribution_sf(t["distribution"], t["statistic"], tuple(t["df"]))
            assert p == pytest.approx(t["pvalue"], abs=1e-12)
    for mode in full_report.estimates.values():
        for block in mode.values():
            for c in block["coefficients"]:
                p = 2 * stats.t.sf(abs(c["statistic"]), c["df"])
                assert p == pytest.approx(c["pvalue"], rel=1e-9, abs=1e-300)
                s = stars(c["pvalue"])
                for level, mark in STAR_LEVELS:
                    if s == mark:
                        assert p < level


def test_forward_requires_expected_series(fixture_data):
    series = dict(fixture_data.series)
    series["expected_cpi"] = np.full(fixture_data.shape, np.nan)
    data = PanelDataset(fixture_data.entities, fixture_data.periods, series)
    with pytest.raises(StageError) as info:
        run_analysis(AnalysisConfig(unitroot=False), data=data)
    assert info.value.stage == "ingest" and info.value.exit_code == DataError.exit_code
    r = run_analysis(AnalysisConfig(modes=("backward",), unitroot=False), data=data)
    assert r.model_choice["BL"]["selected"] == "FixedEffects"


def test_stage_error_has_context(fixture_data):
    series = dict(fixture_data.series)
    series["unemployment"] = np.full(fixture_data.shape, -5.0)
    data = PanelDataset(fixture_data.entities, fixture_data.periods, series)
    with pytest.raises(StageError, match="transforms"):
        run_analysis(AnalysisConfig(unemployment_shift=1.0), data=data)


def test_missing_input():
    with pytest.raises(StageError, match="ingest"):
        run_analysis(AnalysisConfig(input="/no/such/file.csv"))


def test_report_dict_roundtrip(full_report):
    again = AnalysisReport.from_dict(full_report.to_dict())
    assert again == full_report


def test_regime_dgp_pattern_small():
    from panelcurve.estimators import combined_coefficient, fit_fixed
    from panelcurve.panel import build_design, phillips_spec
    from panelcurve.pipeline import prepare
    from panelcurve.simulate import regime_config, simulate_panel
    hits = 0
    for seed in range(20):
        prep = prepare(simulate_panel(regime_config(seed)), AnalysisConfig())
        fe = fit_fixed(build_design(phillips_spec("forward"), prep.data))
        tranquil = fe.pvalues("white")[fe.index("ugap")] < 0.05
        rec = combined_coefficient(fe, "ugap", "ugap:recession").p_diag >= 0.05
        hits += tranquil and rec
    assert hits >= 16
