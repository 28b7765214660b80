"""Pooled, fixed-effects and random-effects panel regressions.

All fits go through an SVD-based least-squares core; covariance matrices
are reported both classically and as White (HC0, optionally HC1) sandwiches.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from . import _kernels
from .errors import AnnihilationError, InfeasibleError, SingularityError, UsageError
from .panel import build_design

RANK_TOL = 1e-10


@dataclass(frozen=True)
class VarianceComponents:
    sigma2_u: float
    sigma2_e: float
    theta: np.ndarray          # per entity, aligned with ``entities``
    entities: tuple
    raw_sigma2_u: float = None
    truncated: bool = False

    @property
    def rho_u(self):
        total = self.sigma2_u + self.sigma2_e
        return self.sigma2_u / total

    @property
    def rho_e(self):
        return 1.0 - self.rho_u

    @classmethod
    def from_variances(cls, sigma2_u, sigma2_e, group_sizes, entities=None):
        T = np.asarray(group_sizes, dtype=np.float64)
        theta = 1.0 - np.sqrt(sigma2_e / (T * sigma2_u + sigma2_e))
        if sigma2_u == 0:
            theta = np.zeros_like(T)
        ents = tuple(entities) if entities is not None else tuple(range(T.size))
        return cls(float(sigma2_u), float(sigma2_e), theta, ents, float(sigma2_u), False)


@dataclass(frozen=True)
class EstimationResult:
    """Coefficients, both covariance flavours, residuals and fit statistics."""

    names: tuple
    params: np.ndarray
    cov_classical: np.ndarray
    cov_white: np.ndarray
    resid: np.ndarray
    entity: np.ndarray
    period: np.ndarray
    rsquared: float
    nobs: int
    df_resid: int
    rss: float
    effects: str
    rsquared_weighted: Optional[float] = None
    entity_effects: Optional[dict] = None
    components: Optional[VarianceComponents] = None
    n_entities: int = 1
    white_kind: str = "hc0"
    extra: dict = field(default_factory=dict)

    def index(self, name):
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self.names.index(name)
        except ValueError:
            raise UsageError(f"no coefficient named {name!r}") from None

    def cov(self, kind="white"):
        if kind == "white":
            return self.cov_white
        if kind == "classical":
            return self.cov_classical
        raise UsageError(f"covariance kind must be white or classical, got {kind!r}")

    def bse(self, kind="white"):
        return np.sqrt(np.clip(np.diag(self.cov(kind)), 0.0, None))

    def tvalues(self, kind="white"):
        se = self.bse(kind)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.params / se

    def pvalues(self, kind="white"):
        return 2.0 * stats.t.sf(np.abs(self.tvalues(kind)), self.df_resid)

    def conf_int(self, level=0.95, kind="classical"):
        q = stats.t.ppf(0.5 + level / 2.0, self.df_resid)
        se = self.bse(kind)
        return np.column_stack([self.params - q * se, self.params + q * se])

    @property
    def slope_names(self):
        return tuple(n for n in self.names if n != "const")

    def subset(self, names, kind="classical"):
        idx = [self.index(n) for n in names]
        return self.params[idx], self.cov(kind)[np.ix_(idx, idx)]


# -- least-squares core -------------------------------------------------------

def _check_rank(X, columns):
    s = np.linalg.svd(X, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        raise SingularityError("design matrix is zero", column=columns[0] if columns else None)
    if s[-1] > RANK_TOL * s[0]:
        return
    # first column whose addition drops the rank names the culprit
    for j in range(1, X.shape[1] + 1):
        sj = np.linalg.svd(X[:, :j], compute_uv=False)
        if sj[-1] <= RANK_TOL * s[0]:
            raise SingularityError(
                f"design is rank deficient: column {columns[j - 1]!r} is collinear "
                f"with earlier columns", column=columns[j - 1])


def _lstsq(X, y, columns):
    n, k = X.shape
    if n <= k:
        raise SingularityError(f"need more rows than columns (n={n}, k={k})")
    _check_rank(X, columns)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    beta = Vt.T @ ((U.T @ y) / s)
    xtx_inv = (Vt.T / s**2) @ Vt
    return beta, xtx_inv


def _sandwich(X, resid, xtx_inv):
    Xe = X * resid[:, None]
    meat = Xe.T @ Xe
    V = xtx_inv @ meat @ xtx_inv
    return (V + V.T) / 2.0


def white_cov(design, residuals, hc="hc0"):
    """White heteroskedasticity-robust covariance ``(X'X)^-1 X' diag(e^2) X (X'X)^-1``.

    ``hc="hc1"`` applies the ``N / (N - k)`` small-sample factor.
    """
    X = design.X if hasattr(design, "X") else np.asarray(design, dtype=np.float64)
    columns = getattr(design, "columns", tuple(f"x{j}" for j in range(X.shape[1])))
    e = np.asarray(residuals, dtype=np.float64)
    if e.shape[0] != X.shape[0]:
        raise UsageError(f"{e.shape[0]} residuals for {X.shape[0]} rows")
    _check_rank(X, columns)
    _, s, Vt = np.linalg.svd(X, full_matrices=False)
    V = _sandwich(X, e, (Vt.T / s**2) @ Vt)
    if hc == "hc1":
        n, k = X.shape
        V = V * n / (n - k)
    elif hc != "hc0":
        raise UsageError(f"hc must be hc0 or hc1, got {hc!r}")
    return V


def _rsquared(y, resid, centered):
    rss = float(resid @ resid)
    tss = float(((y - y.mean()) ** 2).sum()) if centered else float(y @ y)
    return 1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else 0.0)


def _fit(X, y, columns, df_resid, hc):
    beta, xtx_inv = _lstsq(X, y, columns)
    resid = y - X @ beta
    rss = float(resid @ resid)
    s2 = rss / df_resid
    cov_c = s2 * xtx_inv
    cov_w = _sandwich(X, resid, xtx_inv)
    if hc == "hc1":
        cov_w = cov_w * X.shape[0] / df_resid
    elif hc != "hc0":
        raise UsageError(f"hc must be hc0 or hc1, got {hc!r}")
    return beta, resid, rss, cov_c, cov_w


def ols(design, robust=True, hc="hc0"):
    """Least squares on a :class:`~panelcurve.panel.DesignMatrix`.

    The White covariance is always computed; ``robust`` only records which
    flavour downstream reporting should treat as the headline.
    """
    X, y = design.X, design.y
    n, k = X.shape
    beta, resid, rss, cov_c, cov_w = _fit(X, y, design.columns, n - k, hc)
    return EstimationResult(
        names=tuple(design.columns),
        params=beta,
        cov_classical=cov_c,
        cov_white=cov_w,
        resid=resid,
        entity=design.entity,
        period=design.period,
        rsquared=_rsquared(y, resid, design.intercept),
        nobs=n,
        df_resid=n - k,
        rss=rss,
        effects="pooled",
        n_entities=design.n_entities,
        white_kind=hc,
        extra={"robust": bool(robust)},
    )


# -- panel estimators -----------------------------------------------------------

def _require(spec, *allowed):
    if spec.effects not in allowed:
        raise UsageError(f"spec.effects is {spec.effects!r}; expected one of {allowed}")


def pooled(spec, data, hc="hc0"):
    _require(spec, "pooled")
    return fit_pooled(build_design(spec, data), hc=hc)


def fit_pooled(design, hc="hc0"):
    return ols(design, hc=hc)


def _period_dummies(design):
    labels = np.asarray(design.period)
    uniq = sorted(set(labels.tolist()))
    cols = [(labels == p).astype(np.float64) for p in uniq[1:]]
    if not cols:
        return np.empty((design.n_obs, 0)), ()
    return np.column_stack(cols), tuple(f"period[{p}]" for p in uniq[1:])


def fit_fixed(design, time_effects=False, hc="hc0"):
    """Within (entity-demeaned) estimator, optionally with period dummies.

    The grand mean is added back before the regression so the reported
    ``const`` is the average entity intercept; slopes are unaffected.
    Degrees of freedom are ``N - n_entities - k_slopes``.
    """
    slope_idx = [j for j, c in enumerate(design.columns) if c != "const"]
    slope_names = [design.columns[j] for j in slope_idx]
    Xs = design.X[:, slope_idx]
    n_dummies = 0
    if time_effects:
        D, dnames = _period_dummies(design)
        n_dummies = len(dnames)
        Xs = np.column_stack([Xs, D])
        slope_names = slope_names + list(dnames)
    starts = design.group_starts
    n, n_ent = design.n_obs, design.n_entities
    k = Xs.shape[1]
    if k == 0:
        raise UsageError("fixed effects need at least one slope regressor")

    Z = np.column_stack([design.y, Xs])
    Zw = _kernels.quasi_demean(Z, starts, np.ones(n_ent))
    for j in range(k):
        col, dem = Z[:, 1 + j], Zw[:, 1 + j]
        if np.linalg.norm(dem) <= RANK_TOL * max(np.linalg.norm(col), 1e-300):
            raise AnnihilationError(
                f"regressor {slope_names[j]!r} is constant within every entity "
                "and is annihilated by the within transform")
    df = n - n_ent - k
    if df <= 0:
        raise SingularityError(f"no within degrees of freedom (N={n}, entities={n_ent}, k={k})")

    grand = Z.mean(axis=0)
    Zt = Zw + grand
    yt = Zt[:, 0]
    if design.intercept:
        Xt = np.column_stack([np.ones(n), Zt[:, 1:]])
        names = ["const"] + slope_names
    else:
        Xt = Zw[:, 1:]
        yt = Zw[:, 0]
        names = slope_names
    beta, resid, rss, cov_c, cov_w = _fit(Xt, yt, names, df, hc)

    slopes = beta[1:] if design.intercept else beta
    means = _kernels.group_means(Z, starts)
    alpha = means[:, 0] - means[:, 1:] @ slopes
    keep = len(names) - n_dummies
    return EstimationResult(
        names=tuple(names[:keep]),
        params=beta[:keep],
        cov_classical=cov_c[:keep, :keep],
        cov_white=cov_w[:keep, :keep],
        resid=resid,
        entity=design.entity,
        period=design.period,
        rsquared=_rsquared(design.y, resid, True),
        nobs=n,
        df_resid=df,
        rss=rss,
        effects="twoway" if time_effects else "fixed",
        entity_effects=dict(zip(design.entities, alpha.tolist())),
        n_entities=n_ent,
        white_kind=hc,
    )


def fixed_effects(spec, data, hc="hc0"):
    _require(spec, "fixed", "twoway")
    return fit_fixed(build_design(spec, data), time_effects=spec.effects == "twoway", hc=hc)


def fit_between(design):
    """OLS of entity means of y on a constant and entity means of the slopes."""
    slope_idx = [j for j, c in enumerate(design.columns) if c != "const"]
    Z = np.column_stack([design.y, design.X[:, slope_idx]])
    means = _kernels.group_means(Z, design.group_starts)
    n_ent, k = design.n_entities, len(slope_idx)
    if n_ent <= k + 1:
        raise InfeasibleError(
            f"between regression needs more than {k + 1} entities, have {n_ent}")
    Xb = np.column_stack([np.ones(n_ent), means[:, 1:]])
    names = ["const"] + [design.columns[j] for j in slope_idx]
    beta, _ = _lstsq(Xb, means[:, 0], names)
    resid = means[:, 0] - Xb @ beta
    return beta, float(resid @ resid), n_ent - k - 1


def swamy_arora_design(design, within=None):
    within = fit_fixed(design) if within is None else within
    k = len([c for c in design.columns if c != "const"])
    n, n_ent = design.n_obs, design.n_entities
    sigma2_e = within.rss / (n - n_ent - k)
    _, rss_b, df_b = fit_between(design)
    sigma2_b = rss_b / df_b
    T = design.group_sizes.astype(np.float64)
    t_bar = n_ent / np.sum(1.0 / T)
    raw = sigma2_b - sigma2_e / t_bar
    sigma2_u = max(0.0, raw)
    theta = 1.0 - np.sqrt(sigma2_e / (T * sigma2_u + sigma2_e))
    if sigma2_u == 0.0:
        theta = np.zeros_like(T)
    return VarianceComponents(sigma2_u, sigma2_e, theta, design.entities, raw, raw < 0)


def swamy_arora(spec, data):
    """Swamy-Arora variance components from within and between regressions.

    ``sigma2_u = max(0, sigma2_between - sigma2_e / T_bar)`` with ``T_bar``
    the harmonic mean group size.
    """
    return swamy_arora_design(build_design(spec, data))


def fit_random(design, components=None, hc="hc0"):
    """GLS random effects by quasi-demeaning with per-entity ``theta``."""
    comp = swamy_arora_design(design) if components is None else components
    theta = np.asarray(comp.theta, dtype=np.float64)
    if theta.shape[0] != design.n_entities:
        raise UsageError("components do not match the design's entities")
    Z = np.column_stack([design.y, design.X])
    Zq = _kernels.quasi_demean(Z, design.group_starts, theta)
    yq, Xq = Zq[:, 0], Zq[:, 1:]
    n, k = design.X.shape
    beta, resid_q, rss_q, cov_c, cov_w = _fit(Xq, yq, design.columns, n - k, hc)
    resid = design.y - design.X @ beta
    return EstimationResult(
        names=tuple(design.columns),
        params=beta,
        cov_classical=cov_c,
        cov_white=cov_w,
        resid=resid,
        entity=design.entity,
        period=design.period,
        rsquared=_rsquared(design.y, resid, True),
        rsquared_weighted=_rsquared(yq, resid_q, True),
        nobs=n,
        df_resid=n - k,
        rss=rss_q,
        effects="random",
        components=comp,
        n_entities=design.n_entities,
        white_kind=hc,
    )


def random_effects(spec, data, hc="hc0"):
    _require(spec, "random")
    return fit_random(build_design(spec, data), hc=hc)


# -- combined coefficients ------------------------------------------------------

@dataclass(frozen=True)
class CombinedCoefficient:
    names: tuple
    estimate: float
    se_diag: float
    se_full: float
    t_diag: float
    t_full: float
    p_diag: float
    p_full: float
    clamped: bool = False


def _normal_p(t):
    if math.isnan(t):
        return float("nan")
    return float(2.0 * stats.norm.sf(abs(t)))


def combined_coefficient(result, i, j, kind="white"):
    """Sum of two coefficients with two standard errors.

    ``se_diag`` ignores the covariance term, ``se_full`` includes it.
    p-values use the standard normal.
    """
    a, b = result.index(i), result.index(j)
    if a == b:
        raise UsageError("combined coefficient needs two distinct coefficients")
    V = result.cov(kind)
    est = float(result.params[a] + result.params[b])
    var_diag = float(V[a, a] + V[b, b])
    var_full = var_diag + 2.0 * float(V[a, b])
    clamped = var_full < 0
    if clamped:
        warnings.warn("negative variance for combined coefficient clamped to 0", stacklevel=2)
        var_full = 0.0
    se_p, se_f = math.sqrt(max(var_diag, 0.0)), math.sqrt(var_full)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_p = est / se_p if se_p > 0 else float("nan")
        t_f = est / se_f if se_f > 0 else float("nan")
    return CombinedCoefficient(
        names=(result.names[a], result.names[b]),
        estimate=est,
        se_diag=se_p,
        se_full=se_f,
        t_diag=t_p,
        t_full=t_f,
        p_diag=_normal_p(t_p),
        p_full=_normal_p(t_f),
        clamped=clamped,
    )
