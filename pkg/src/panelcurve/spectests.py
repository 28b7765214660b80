"""Specification tests and the pooled / fixed / random model choice."""
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .errors import DegenerateInputError, UsageError

PINV_TOL = 1e-10

NULL_NO_FE = "No Unobserved Heterogeneity (No Fixed Effect)"
NULL_NO_RE = "No Random Effects"
NULL_HAUSMAN = "FE and RE both consistent, RE efficient"


@dataclass(frozen=True)
class TestResult:
    """A test statistic with the distribution its p-value comes from.

    ``distribution`` is ``"F"``, ``"chi2"`` or ``"normal"`` (upper tail).
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    distribution: str
    df: tuple
    pvalue: float
    null: str
    companion: Optional["TestResult"] = None
    flags: dict = field(default_factory=dict)

    def recompute_pvalue(self):
        return distribution_sf(self.distribution, self.statistic, self.df)

    def rejects(self, level):
        return self.pvalue < level and not self.flags.get("indefinite", False)


def distribution_sf(distribution, statistic, df=()):
    if distribution == "F":
        return float(stats.f.sf(statistic, *df))
    if distribution == "chi2":
        if statistic < 0:
            return 1.0
        return float(stats.chi2.sf(statistic, *df))
    if distribution == "normal":
        return float(stats.norm.sf(statistic))
    raise ValueError(f"unknown distribution {distribution!r}")


def redundant_fe_test(pooled, fe):
    """F test (and chi-square LR companion) that all entity effects are zero."""
    if pooled.effects != "pooled" or fe.effects not in ("fixed", "twoway"):
        raise UsageError("redundant_fe_test expects a pooled and a fixed-effects result")
    if pooled.nobs != fe.nobs or set(pooled.slope_names) != set(fe.slope_names):
        raise UsageError("pooled and fixed-effects results come from different specifications")
    df_num = pooled.df_resid - fe.df_resid
    df_den = fe.df_resid
    if df_num <= 0 or df_den <= 0:
        raise UsageError(f"invalid degrees of freedom ({df_num}, {df_den})")
    diff = max(pooled.rss - fe.rss, 0.0)
    F = (diff / df_num) / (fe.rss / df_den)
    lr = fe.nobs * math.log(pooled.rss / fe.rss)
    chi = TestResult("Redundant FE (chi-square)", lr, "chi2", (df_num,),
                     distribution_sf("chi2", lr, (df_num,)), NULL_NO_FE)
    return TestResult("Redundant FE (F)", F, "F", (df_num, df_den),
                      distribution_sf("F", F, (df_num, df_den)), NULL_NO_FE, companion=chi)


def _lm_parts(residuals, entity):
    if hasattr(residuals, "resid"):
        entity = residuals.entity if entity is None else entity
        residuals = residuals.resid
    e = np.asarray(residuals, dtype=np.float64)
    if entity is None:
        raise UsageError("an entity index is required")
    _, inv = np.unique(np.asarray(entity, dtype=object).astype(str), return_inverse=True)
    ssq = float(e @ e)
    if ssq == 0.0:
        raise DegenerateInputError("LM test undefined for all-zero residuals")
    sums = np.bincount(inv, weights=e)
    sizes = np.bincount(inv).astype(np.float64)
    denom = 2.0 * float(np.sum(sizes * (sizes - 1.0)))
    if denom == 0.0:
        raise DegenerateInputError("LM test needs at least one entity with two observations")
    # sizes all equal gives N*T / (2 (T - 1))
    scale = float(sizes.sum()) ** 2 / denom
    bracket = float(np.sum(sums**2)) / ssq - 1.0
    return scale, bracket


def breusch_pagan_lm(residuals, entity=None):
    """Breusch-Pagan LM test for random entity effects, chi-square(1).

    Unbalanced panels use per-entity group sizes; the balanced formula is
    the equal-size special case.  ``residuals`` may be an EstimationResult.
    """
    scale, bracket = _lm_parts(residuals, entity)
    lm = scale * bracket**2
    return TestResult("Breusch-Pagan LM", lm, "chi2", (1,),
                      distribution_sf("chi2", lm, (1,)), NULL_NO_RE)


def honda_lm(residuals, entity=None):
    """Honda's one-sided version of the LM test, upper-tail standard normal."""
    scale, bracket = _lm_parts(residuals, entity)
    a = math.sqrt(scale) * bracket
    return TestResult("Honda LM", a, "normal", (), distribution_sf("normal", a), NULL_NO_RE)


def hausman_statistic(delta, var_diff):
    """``delta' pinv(sym(var_diff)) delta`` with df = rank of the difference."""
    d = np.asarray(delta, dtype=np.float64).ravel()
    V = np.asarray(var_diff, dtype=np.float64)
    if d.size == 0:
        raise UsageError("Hausman test needs at least one coefficient")
    V = (V + V.T) / 2.0
    s = np.linalg.svd(V, compute_uv=False)
    rank = int(np.sum(s > PINV_TOL * s[0])) if s[0] > 0 else 0
    flags = {}
    if rank == 0:
        flags["degenerate"] = True
        H = 0.0
    else:
        H = float(d @ np.linalg.pinv(V, rcond=PINV_TOL, hermitian=True) @ d)
    if H < 0:
        warnings.warn(f"Hausman statistic is negative ({H:.6g}); variance difference "
                      "is not positive semidefinite", stacklevel=2)
        flags["indefinite"] = True
    p = 1.0 if rank == 0 else distribution_sf("chi2", H, (rank,))
    return TestResult("Hausman", H, "chi2", (rank,), p, NULL_HAUSMAN, flags=flags)


def hausman(fe, re, slopes=None):
    """Hausman test comparing fixed- and random-effects slopes.

    Uses the classical covariances and ``Var(FE) - Var(RE)``, which is
    positive semidefinite under the null.  Intercepts are never compared.
    """
    if slopes is None:
        slopes = [n for n in fe.slope_names if n in re.names]
    slopes = list(slopes)
    if not slopes:
        raise UsageError("Hausman test needs a non-empty slope subset")
    if "const" in slopes:
        raise UsageError("the intercept is not comparable across FE and RE")
    b_fe, v_fe = fe.subset(slopes, "classical")
    b_re, v_re = re.subset(slopes, "classical")
    res = hausman_statistic(b_re - b_fe, v_fe - v_re)
    res.flags["slopes"] = tuple(slopes)
    return res


MODELS = ("Pooled", "FixedEffects", "RandomEffects")
ROWS = {
    1: "no fixed effect, no random effect: data are poolable",
    2: "fixed effect, no random effect",
    3: "no fixed effect, random effect",
    4: "fixed and random effects: Hausman test arbitrates",
}


@dataclass(frozen=True)
class ModelChoice:
    selected: str
    row: int
    level: float
    fe_test: object
    re_test: object
    hausman: object = None
    reason: str = ""


def _p(test):
    return float(test.pvalue if hasattr(test, "pvalue") else test)


def select_model(fe_test, re_test, hausman=None, level=0.05):
    """Pooled / fixed / random choice from the redundant-FE, LM and Hausman tests.

    Each test may be a TestResult or a bare p-value.  A flagged (negative)
    Hausman statistic counts as a failure to reject.
    """
    if not 0.0 < level < 1.0:
        raise UsageError(f"significance level must be in (0, 1), got {level!r}")
    fe_rej = _p(fe_test) < level
    re_rej = _p(re_test) < level
    if not fe_rej and not re_rej:
        return ModelChoice("Pooled", 1, level, fe_test, re_test, hausman, ROWS[1])
    if fe_rej and not re_rej:
        return ModelChoice("FixedEffects", 2, level, fe_test, re_test, hausman, ROWS[2])
    if re_rej and not fe_rej:
        return ModelChoice("RandomEffects", 3, level, fe_test, re_test, hausman, ROWS[3])
    if hausman is None:
        raise UsageError("both effects are present: a Hausman test is required")
    indefinite = getattr(hausman, "flags", {}).get("indefinite", False)
    if _p(hausman) < level and not indefinite:
        return ModelChoice("FixedEffects", 4, level, fe_test, re_test, hausman,
                           ROWS[4] + " (rejects: RE inconsistent)")
    return ModelChoice("RandomEffects", 4, level, fe_test, re_test, hausman,
                       ROWS[4] + " (does not reject: RE efficient)")
