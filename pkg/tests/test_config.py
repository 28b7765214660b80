import pytest

from panelcurve.config import (KEYS, AnalysisConfig, describe_keys, from_mapping, load_config,
                               parse_assignment)
from panelcurve.errors import ConfigError


def test_defaults_valid():
    cfg = AnalysisConfig()
    assert cfg.modes == ("backward", "forward")
    assert cfg.lam == 1600.0
    assert set(cfg.to_flat()) == set(KEYS)


@pytest.mark.parametrize("changes", [
    {"modes": ()}, {"effects": ("twoway",)}, {"level": 0.5}, {"level": 0.0},
    {"recession_rule": "strict"}, {"cpi_shift": 0.0}, {"hp_lambda": -1.0},
    {"format": "xml"}, {"workers": 0}, {"white": "hc3"}, {"max_lag": -1},
])
def test_invalid(changes):
    with pytest.raises(ConfigError):
        AnalysisConfig(**changes)


def test_toml_dotted_keys(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('hp.lambda = 100000\nhp.nairu_source = "inflation"\n'
                 'modes = ["forward"]\n[log_shift]\ncpi = 2\n')
    cfg = load_config(p)
    assert cfg.hp_lambda == 100000.0 and cfg.lam == 100000.0
    assert cfg.modes == ("forward",) and cfg.cpi_shift == 2.0
    assert cfg.nairu_source == "inflation"


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    p = tmp_path / "bad.toml"
    p.write_text("level = = 3\n")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(p)
    p.write_text("colour = 1\n")
    with pytest.raises(ConfigError, match="unknown"):
        load_config(p)


def test_string_coercion():
    cfg = from_mapping({"modes": "backward, forward", "unitroot.enabled": "no",
                        "max_lag": "4", "level": "0.1"})
    assert cfg.modes == ("backward", "forward") and cfg.unitroot is False
    assert cfg.max_lag == 4 and cfg.level == 0.1
    with pytest.raises(ConfigError):
        from_mapping({"unitroot.enabled": "maybe"})


def test_ravn_uhlig_from_config():
    assert AnalysisConfig(hp_periods_per_year=12, hp_exponent=4).lam == 129600.0


def test_assignment_and_description():
    assert parse_assignment("hp.lambda = 1600") == ("hp.lambda", "1600")
    with pytest.raises(ConfigError):
        parse_assignment("hp.lambda")
    text = describe_keys()
    assert all(k in text for k in KEYS)
