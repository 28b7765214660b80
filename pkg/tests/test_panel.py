import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from panelcurve import fixture_path
from panelcurve.errors import DomainError, IngestionError, SpecificationError
from panelcurve.panel import (ModelSpec, PanelDataset, SeriesRef, build_design, first_diff,
                              format_quarter, ingest_csv, log_shift, phillips_spec,
                              quarter_ordinal, recession_dummy, shift, shift_constant, to_csv)

HEADER = b"entity,period,cpi,expected_cpi,unemployment,gdp_growth\n"


def test_two_rows_balanced():
    d = ingest_csv(HEADER + b"US,1990Q1,100,0.01,5.0,0.4\nUS,1990Q2,101,0.01,5.1,0.3\n")
    assert d.entities == ("US",)
    assert d.periods == ("1990Q1", "1990Q2")
    assert d.balanced is True


def test_hole_makes_unbalanced():
    d = ingest_csv(HEADER + b"US,1990Q1,,0.01,5.0,0.4\nUS,1990Q2,101,0.01,5.1,0.3\n")
    assert np.isnan(d["cpi"][0, 0])
    assert d.balanced is False


def test_missing_quarter_becomes_hole_and_entities_sorted():
    d = ingest_csv(HEADER + b"UK,1990Q3,1,1,1,1\nAG,1990Q1,1,1,1,1\n")
    assert d.entities == ("AG", "UK")
    assert d.periods == ("1990Q1", "1990Q2", "1990Q3")
    assert np.isnan(d["cpi"][0, 1:]).all() and np.isnan(d["cpi"][1, :2]).all()


@pytest.mark.parametrize("body, where", [
    (b"US,1990Q1,abc,0.01,5.0,0.4\n", "line 2, column 'cpi'"),
    (b"US,1990Z1,1,0.01,5.0,0.4\n", "line 2, column 'period'"),
    (b"US,1990Q1,1,0.01,5.0\n", "line 2"),
    (b"US,1990Q1,1,1,1,1\nUS,1990Q1,1,1,1,1\n", "line 3: duplicate"),
    (b"US,1990Q1,inf,1,1,1\n", "non-finite"),
])
def test_ingest_errors_name_location(body, where):
    with pytest.raises(IngestionError, match=where):
        ingest_csv(HEADER + body)


def test_bad_header_and_empty():
    with pytest.raises(IngestionError, match="line 1"):
        ingest_csv(b"country,period,cpi,expected_cpi,unemployment,gdp_growth\n")
    with pytest.raises(IngestionError):
        ingest_csv(b"")
    with pytest.raises(IngestionError, match="no data"):
        ingest_csv(HEADER)


def test_fixture_roundtrips():
    d = ingest_csv(fixture_path())
    assert len(d.entities) == 41 and len(d.periods) == 145
    assert d.periods[0] == "1980Q1" and d.periods[-1] == "2016Q1"
    assert ingest_csv(to_csv(d)).equals(d)
    with open(fixture_path(), "rb") as fh:
        assert to_csv(d) == fh.read()


def test_dataset_is_read_only():
    d = ingest_csv(HEADER + b"US,1990Q1,1,1,1,1\n")
    with pytest.raises(ValueError):
        d["cpi"][0, 0] = 2.0


def test_quarters():
    assert format_quarter(quarter_ordinal("1999Q4") + 1) == "2000Q1"
    with pytest.raises(ValueError):
        PanelDataset(("A",), ("1990Q1", "1990Q3"), {"x": [[1.0, 2.0]]})


def test_log_shift_examples():
    assert log_shift(0.0, 1) == 0.0
    assert log_shift(math.e - 1, 1) == pytest.approx(1.0, abs=1e-15)
    assert log_shift(-0.5, 1) == pytest.approx(-0.6931471805599453, abs=1e-15)
    with pytest.raises(DomainError):
        log_shift(-1.0, 1)
    out = log_shift(np.array([np.nan, 0.0]), 1)
    assert np.isnan(out[0]) and out[1] == 0.0


def test_shift_constant():
    assert shift_constant([3.0, 5.0]) == 1.0
    assert shift_constant([-2.5, 1.0]) == 3.5


def test_first_diff_examples():
    out = first_diff([1.0, 3.0, 6.0])
    assert np.isnan(out[0]) and list(out[1:]) == [2.0, 3.0]
    out = first_diff([4.0, 4.0, 4.0, 4.0])
    assert list(out[1:]) == [0.0, 0.0, 0.0]
    assert np.isnan(first_diff([5.0])).all()


def test_shift_examples():
    x = [1.0, 2.0, 3.0]
    np.testing.assert_array_equal(shift(x, 1), [np.nan, 1, 2])
    np.testing.assert_array_equal(shift(x, 0), x)
    np.testing.assert_array_equal(shift(x, -1), [2, 3, np.nan])
    with pytest.warns(UserWarning):
        assert np.isnan(shift(x, 3)).all()


def test_shift_does_not_cross_entities():
    grid = np.arange(6.0).reshape(2, 3)
    out = shift(grid, 1)
    assert np.isnan(out[:, 0]).all()
    np.testing.assert_array_equal(out[1, 1:], [3.0, 4.0])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(2, 30), elements=st.floats(-1e6, 1e6)))
def test_diff_of_cumsum_recovers_series(x):
    y = np.cumsum(x)
    np.testing.assert_allclose(first_diff(y)[1:], x[1:], atol=1e-6 * (1 + np.abs(y).max()))


def test_recession_dummy_examples():
    np.testing.assert_array_equal(recession_dummy([1.2, -0.3, 2.1]).values, [0, 1, 0])
    assert not recession_dummy([0.5, 1.0]).values.any()
    assert recession_dummy([0.0]).values[0] == 1.0
    assert recession_dummy([0.0], rule="negative").values[0] == 0.0
    assert np.isnan(recession_dummy([np.nan]).values[0])
    with pytest.raises(ValueError):
        recession_dummy([1.0], rule="strict")


def _toy(n_ent=2, T=3, seed=0):
    rng = np.random.default_rng(seed)
    ents = tuple(f"E{i}" for i in range(n_ent))
    periods = tuple(format_quarter(quarter_ordinal("2000Q1") + t) for t in range(T))
    shape = (n_ent, T)
    return PanelDataset(ents, periods, {
        "y": rng.normal(size=shape), "x": rng.normal(size=shape), "z": rng.normal(size=shape),
        "D": (rng.random(shape) < 0.5).astype(float),
    })


def test_design_shape_and_names():
    d = _toy()
    spec = ModelSpec(SeriesRef("y"), (SeriesRef("x"), SeriesRef("z")))
    des = build_design(spec, d)
    assert des.X.shape == (6, 3)
    assert des.columns == ("const", "x", "z")
    np.testing.assert_array_equal(des.y, d["y"].ravel())


def test_interaction_column_is_exact_product():
    d = _toy(3, 8)
    spec = ModelSpec(SeriesRef("y"), (SeriesRef("x"),), interactions=((0, "D"),))
    des = build_design(spec, d)
    np.testing.assert_array_equal(des.column("x:D"), des.column("x") * d["D"].ravel())


def test_lagged_regressor_drops_one_row_per_entity():
    d = _toy(4, 6)
    spec = ModelSpec(SeriesRef("y"), (SeriesRef("x").lag(),))
    des = build_design(spec, d)
    assert des.n_obs == 4 * 5
    assert all(v == 1 for v in des.dropped.values())
    assert des.columns == ("const", "L1.x")


def test_duplicate_column_rejected():
    d = _toy()
    spec = ModelSpec(SeriesRef("y"), (SeriesRef("x"), SeriesRef("x").named("x2")))
    with pytest.raises(SpecificationError, match="duplicates"):
        build_design(spec, d)


def test_phillips_spec_columns():
    spec = phillips_spec("backward")
    assert spec.column_names == ["const", "pi_e", "ugap", "pi_e:recession", "ugap:recession"]
    assert phillips_spec("forward").regressors[0].name == "expected_cpi"
    with pytest.raises(SpecificationError):
        phillips_spec("sideways")
    with pytest.raises(SpecificationError):
        ModelSpec(SeriesRef("y"), (SeriesRef("expected_cpi"),), expectation="backward")
