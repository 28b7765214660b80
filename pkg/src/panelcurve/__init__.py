"""Panel Phillips-curve toolkit: transforms, unit roots, panel estimators and tests."""
__version__ = "0.1.0"

from importlib import resources as _resources

from .errors import (ConfigError, DataError, NumericalError, PanelCurveError,
                     SingularityError, StageError)
from .panel import (PanelDataset, ModelSpec, SeriesRef, build_design, ingest_csv,
                    phillips_spec, recession_dummy, to_csv)
from .hp import hp_filter, ravn_uhlig_lambda, unemployment_gap
from .unitroot import adf_test, pp_test
from .estimators import (combined_coefficient, fit_fixed, fit_pooled, fit_random,
                         fixed_effects, pooled, random_effects, swamy_arora)
from .spectests import (breusch_pagan_lm, hausman, honda_lm, redundant_fe_test,
                        select_model)
from .simulate import SimConfig, regime_config, simulate_panel
from .config import AnalysisConfig, load_config
from .pipeline import AnalysisReport, run_analysis
from .report import render_report


def fixture_path():
    """Path of the bundled synthetic panel (41 entities, 1980Q1-2016Q1)."""
    return str(_resources.files(__name__) / "data" / "fixture.csv")
