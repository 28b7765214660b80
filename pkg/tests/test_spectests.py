import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import make_panel
from panelcurve.errors import DegenerateInputError, UsageError
from panelcurve.estimators import fit_fixed, fit_pooled, fit_random
from panelcurve.spectests import (TestResult, breusch_pagan_lm, hausman, hausman_statistic,
                                  honda_lm, redundant_fe_test, select_model)


def _constant_within(N=3, T=4):
    c = np.array([1.0, -2.0, 0.5])[:N]
    return np.repeat(c, T), np.repeat([f"E{i}" for i in range(N)], T)


def test_bp_closed_form():
    e, ent = _constant_within()
    assert breusch_pagan_lm(e, ent).statistic == 18.0
    assert honda_lm(e, ent).statistic == pytest.approx(math.sqrt(18), abs=1e-12)
    assert honda_lm(e, ent).statistic == pytest.approx(4.2426, abs=1e-4)


def test_bp_unbalanced_reduces_to_balanced_formula(rng):
    e = rng.normal(size=20)
    ent = np.repeat(list("ABCDE"), 4)
    sums = e.reshape(5, 4).sum(axis=1)
    balanced = 5 * 4 / (2 * 3) * ((sums ** 2).sum() / (e @ e) - 1) ** 2
    assert breusch_pagan_lm(e, ent).statistic == pytest.approx(balanced, rel=1e-12)


def test_lm_zero_vector_errors():
    with pytest.raises(DegenerateInputError):
        breusch_pagan_lm(np.zeros(6), list("AABBCC"))
    with pytest.raises(UsageError):
        breusch_pagan_lm(np.ones(3))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, 24, elements=st.floats(-10, 10)).filter(lambda a: (a ** 2).sum() > 1e-6))
def test_honda_squared_is_bp(e):
    ent = np.repeat(list("ABCDEF"), 4)
    a = honda_lm(e, ent).statistic
    assert a ** 2 == pytest.approx(breusch_pagan_lm(e, ent).statistic, rel=1e-10, abs=1e-10)


def test_hausman_zero_and_hand_example():
    r = hausman_statistic([0.0, 0.0], np.eye(2))
    assert (r.statistic, r.pvalue) == (0.0, 1.0)
    r = hausman_statistic([0.1, -0.2], np.diag([0.01, 0.04]))
    assert abs(r.statistic - 2.0) <= 1e-12
    assert r.df == (2,)


def test_hausman_permutation_invariant(rng):
    d = rng.normal(size=4)
    A = rng.normal(size=(4, 4))
    V = A @ A.T
    perm = rng.permutation(4)
    h1 = hausman_statistic(d, V).statistic
    h2 = hausman_statistic(d[perm], V[np.ix_(perm, perm)]).statistic
    assert abs(h1 - h2) <= 1e-10


def test_hausman_rank_deficient_df():
    V = np.diag([1.0, 1.0, 0.0])
    assert hausman_statistic([1.0, 1.0, 0.0], V).df == (2,)


def test_hausman_negative_is_flagged():
    with pytest.warns(UserWarning):
        r = hausman_statistic([1.0, 0.0], np.diag([-1.0, 1.0]))
    assert r.flags["indefinite"] and r.statistic < 0 and r.pvalue == 1.0
    assert not r.rejects(0.05)


def test_hausman_on_fits_has_df_four(rng):
    des, _ = make_panel(rng, 30, 15, np.array([0.5, -0.2, 0.3, 0.1]), alpha_sd=2.0, corr=0.0)
    fe, re = fit_fixed(des), fit_random(des)
    r = hausman(fe, re)
    assert r.df == (4,)
    assert r.recompute_pvalue() == pytest.approx(r.pvalue)
    with pytest.raises(UsageError):
        hausman(fe, re, ["const"])
    # identical estimates give zero
    assert hausman(fe, fe).statistic == 0.0


def test_redundant_fe_zero_when_rss_equal(rng):
    des, _ = make_panel(rng, 5, 10, np.array([1.0]))
    po, fe = fit_pooled(des), fit_fixed(des)
    fake = type(fe)(**{**fe.__dict__, "rss": po.rss})
    r = redundant_fe_test(po, fake)
    assert r.statistic == 0.0 and r.pvalue == pytest.approx(1.0)
    assert r.companion.distribution == "chi2"
    with pytest.raises(UsageError):
        redundant_fe_test(fe, po)


def test_redundant_fe_df(rng):
    des, _ = make_panel(rng, 7, 9, np.array([1.0, 2.0]))
    r = redundant_fe_test(fit_pooled(des), fit_fixed(des))
    assert r.df == (6, 63 - 7 - 2)


@pytest.mark.slow
def test_redundant_fe_power_and_size():
    rng = np.random.default_rng(31)
    hits = sum(redundant_fe_test(fit_pooled(d), fit_fixed(d)).pvalue < 0.01
               for d, _ in (make_panel(rng, 10, 20, np.array([1.0]), alpha_sd=5.0, corr=0.0)
                            for _ in range(500)))
    assert hits / 500 >= 0.99
    rej = sum(redundant_fe_test(fit_pooled(d), fit_fixed(d)).pvalue < 0.05
              for d, _ in (make_panel(rng, 10, 20, np.array([1.0]), alpha_sd=0.0)
                           for _ in range(2000)))
    assert 0.025 <= rej / 2000 <= 0.075


@pytest.mark.slow
def test_lm_size_and_honda_normality():
    rng = np.random.default_rng(41)
    # the LM test is asymptotic in the number of entities; N = 10 is undersized
    ent = np.repeat(np.arange(50).astype(str), 20)
    bp, a = [], []
    for _ in range(2000):
        e = rng.normal(size=1000)
        e = e - e.mean()
        bp.append(breusch_pagan_lm(e, ent).pvalue < 0.05)
        a.append(honda_lm(e, ent).statistic)
    assert 0.025 <= np.mean(bp) <= 0.075
    assert abs(np.mean(a)) <= 0.1 and 0.8 <= np.var(a) <= 1.2


@pytest.mark.parametrize("pvals, expected, row", [
    ((0.40, 0.30, None), "Pooled", 1),
    ((0.001, 0.30, None), "FixedEffects", 2),
    ((0.30, 0.001, None), "RandomEffects", 3),
    ((0.001, 0.001, 0.000), "FixedEffects", 4),
    ((0.001, 0.001, 0.40), "RandomEffects", 4),
])
def test_decision_table(pvals, expected, row):
    c = select_model(*pvals)
    assert (c.selected, c.row) == (expected, row)


def test_decision_requires_hausman_and_valid_level():
    with pytest.raises(UsageError):
        select_model(0.001, 0.001)
    with pytest.raises(UsageError):
        select_model(0.5, 0.5, level=1.5)


def test_indefinite_hausman_counts_as_non_rejection():
    h = TestResult("Hausman", -3.0, "chi2", (4,), 0.0, "", flags={"indefinite": True})
    assert select_model(0.001, 0.001, h).selected == "RandomEffects"
