"""Covariate-adjusted associations between language assessments and PCL outcomes.

Every association standardizes the feature, the outcome and the covariates on
the listwise-complete rows of that analysis, then reports

* ``r``: the product-moment correlation with a Fisher-z interval, and
* ``beta``: the OLS coefficient of the standardized feature with covariates,
  with a t-based interval.

Adjusted p-values are Benjamini-Hochberg across the features of one table,
separately for the ``r`` and ``beta`` columns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .errors import SampleTooSmall, SingularDesign
from .stats import bh_adjust, ols, pearson_r, standardize
from .trajectory import TimedScore

CONCURRENT_COVARIATES = ("age", "female", "police", "years_since_911")
TRAJECTORY_COVARIATES = ("police", "female", "years_since_911", "baseline_pcl", "age")
COVARIATE_LABELS = {
    "police": "Occupation",
    "female": "Gender",
    "years_since_911": "Years since 9/11",
    "baseline_pcl": "Interview PCL",
    "age": "Age",
    "married": "Marital Status",
}
MIN_N = 10


@dataclass
class Effect:
    value: float
    ci: tuple[float, float]
    p: float
    p_adj: float = float("nan")
    significant: bool = False


@dataclass
class AssociationResult:
    feature_name: str
    n: int
    r: float
    r_ci: tuple[float, float]
    r_p: float
    beta: float
    beta_ci: tuple[float, float]
    p_raw: float
    r_p_adj: float = float("nan")
    r_significant: bool = False
    p_adj: float = float("nan")
    significant: bool = False

    @property
    def r_effect(self) -> Effect:
        return Effect(self.r, self.r_ci, self.r_p, self.r_p_adj, self.r_significant)

    @property
    def beta_effect(self) -> Effect:
        return Effect(self.beta, self.beta_ci, self.p_raw, self.p_adj, self.significant)


def _complete(columns: Mapping[str, pd.Series]) -> pd.DataFrame:
    frame = pd.concat(columns, axis=1, join="inner")
    return frame.dropna()


def _beta(frame: pd.DataFrame, feature: str, outcome: str, covariates: Sequence[str]) -> Effect:
    names = [feature, *covariates]
    X = np.column_stack([standardize(frame[c].to_numpy(float)) for c in names])
    y = standardize(frame[outcome].to_numpy(float))
    fit = ols(X, y, names)
    i = fit.index(feature)
    return Effect(float(fit.coef[i]), fit.conf_int(feature), float(fit.pvalues[i]))


def associate(feature: pd.Series, outcome: pd.Series, covariates: pd.DataFrame | None = None, name: str | None = None) -> AssociationResult:
    """Unadjusted r and covariate-adjusted beta for one feature (no FDR step)."""
    cols = {"__x": feature, "__y": outcome}
    cov_names = []
    if covariates is not None:
        for c in covariates.columns:
            cols[c] = covariates[c]
            cov_names.append(c)
    frame = _complete(cols)
    n = len(frame)
    if n < MIN_N:
        raise SampleTooSmall(f"{name or feature.name}: {n} complete rows, need {MIN_N}")
    corr = pearson_r(frame["__x"].to_numpy(float), frame["__y"].to_numpy(float))
    eff = _beta(frame, "__x", "__y", cov_names)
    return AssociationResult(name or str(feature.name), n, corr.r, corr.ci, corr.p, eff.value, eff.ci, eff.p)


def apply_fdr(results: list[AssociationResult], alpha: float = 0.05) -> list[AssociationResult]:
    """Fill adjusted p-values and significance flags, r and beta as separate families."""
    if not results:
        return results
    r_adj = bh_adjust([x.r_p for x in results])
    b_adj = bh_adjust([x.p_raw for x in results])
    for res, ra, ba in zip(results, r_adj, b_adj):
        res.r_p_adj, res.r_significant = float(ra), bool(ra < alpha)
        res.p_adj, res.significant = float(ba), bool(ba < alpha)
    return results


def _ordered(covariates: pd.DataFrame, canonical: Sequence[str]) -> pd.DataFrame:
    """Known covariates in canonical order, then any others as given."""
    cols = [c for c in canonical if c in covariates.columns]
    cols += [c for c in covariates.columns if c not in cols]
    return covariates[cols]


def _features(assessments: pd.DataFrame, features) -> list[str]:
    return list(features) if features is not None else list(assessments.columns)


def concurrent_associations(
    assessments: pd.DataFrame,
    baseline_pcl: pd.Series,
    covariates: pd.DataFrame,
    alpha: float = 0.05,
    features: Sequence[str] | None = None,
) -> list[AssociationResult]:
    """Cross-sectional associations with the interview (baseline) PCL."""
    cov = _ordered(covariates, CONCURRENT_COVARIATES)
    out = [associate(assessments[f], baseline_pcl, cov, f) for f in _features(assessments, features)]
    return apply_fdr(out, alpha)


def trajectory_associations(
    assessments: pd.DataFrame,
    slopes: pd.Series,
    baseline_pcl: pd.Series,
    covariates: pd.DataFrame,
    alpha: float = 0.05,
    features: Sequence[str] | None = None,
    covariate_names: Sequence[str] = TRAJECTORY_COVARIATES,
) -> list[AssociationResult]:
    """Associations with the per-responder PCL slope, adjusting for demographics and baseline PCL."""
    cov = covariates.join(baseline_pcl.rename("baseline_pcl"), how="inner") if baseline_pcl is not None else covariates
    cov = _ordered(cov, covariate_names)
    out = [associate(assessments[f], slopes, cov, f) for f in _features(assessments, features)]
    return apply_fdr(out, alpha)


# --- suppression and mediation ---------------------------------------------


@dataclass
class SuppressionRow:
    feature_name: str
    n: int
    unadjusted: Effect
    single: dict[str, Effect]
    adjusted: Effect


def suppression_scan(feature: pd.Series, outcome: pd.Series, covariates: pd.DataFrame, name: str | None = None) -> SuppressionRow:
    """Unadjusted r, beta with each covariate alone, and beta with all covariates."""
    name = name or str(feature.name)
    cols = {"__x": feature, "__y": outcome, **{c: covariates[c] for c in covariates.columns}}
    frame = _complete(cols)
    if len(frame) < MIN_N:
        raise SampleTooSmall(f"{name}: {len(frame)} complete rows, need {MIN_N}")
    corr = pearson_r(frame["__x"].to_numpy(float), frame["__y"].to_numpy(float))
    single = {c: _beta(frame, "__x", "__y", [c]) for c in covariates.columns}
    full = _beta(frame, "__x", "__y", list(covariates.columns))
    return SuppressionRow(name, len(frame), Effect(corr.r, corr.ci, corr.p), single, full)


def _fdr_effects(effects: list[Effect], alpha: float) -> None:
    adj = bh_adjust([e.p for e in effects])
    for e, a in zip(effects, adj):
        e.p_adj, e.significant = float(a), bool(a < alpha)


def suppression_table(
    assessments: pd.DataFrame,
    slopes: pd.Series,
    covariates: pd.DataFrame,
    alpha: float = 0.05,
    features: Sequence[str] | None = None,
) -> list[SuppressionRow]:
    rows = [suppression_scan(assessments[f], slopes, covariates, f) for f in _features(assessments, features)]
    _fdr_effects([r.unadjusted for r in rows], alpha)
    for c in covariates.columns:
        _fdr_effects([r.single[c] for r in rows], alpha)
    _fdr_effects([r.adjusted for r in rows], alpha)
    return rows


@dataclass
class MediationRow:
    feature_name: str
    n: int
    unadjusted: Effect
    marital_only: Effect
    standard: Effect
    with_marital: Effect

    def pair(self) -> tuple[Effect, Effect]:
        return self.standard, self.with_marital


def marital_mediation(
    feature: pd.Series,
    outcome: pd.Series,
    covariates: pd.DataFrame,
    married: pd.Series,
    name: str | None = None,
    marital_with: Sequence[str] = (),
) -> MediationRow:
    """Beta adjusted for the standard covariates, with and without marital status.

    ``marital_only`` adjusts for marital status plus the covariates named in
    ``marital_with`` (the trajectory table pairs it with interview PCL).
    Responders of unknown marital status (NaN) are dropped from every column so
    the compared models share one sample.
    """
    name = name or str(feature.name)
    cols = {"__x": feature, "__y": outcome, "married": married, **{c: covariates[c] for c in covariates.columns}}
    frame = _complete(cols)
    if len(frame) < MIN_N:
        raise SampleTooSmall(f"{name}: {len(frame)} complete rows, need {MIN_N}")
    corr = pearson_r(frame["__x"].to_numpy(float), frame["__y"].to_numpy(float))
    std = list(covariates.columns)
    return MediationRow(
        name,
        len(frame),
        Effect(corr.r, corr.ci, corr.p),
        _beta(frame, "__x", "__y", ["married", *marital_with]),
        _beta(frame, "__x", "__y", std),
        _beta(frame, "__x", "__y", [*std, "married"]),
    )


def mediation_table(assessments, outcome, covariates, married, alpha=0.05, features=None, marital_with=()) -> list[MediationRow]:
    rows = [
        marital_mediation(assessments[f], outcome, covariates, married, f, marital_with)
        for f in _features(assessments, features)
    ]
    for attr in ("unadjusted", "marital_only", "standard", "with_marital"):
        _fdr_effects([getattr(r, attr) for r in rows], alpha)
    return rows


# --- joint panel model -----------------------------------------------------


@dataclass
class JointResult:
    feature_name: str
    n_subjects: int
    n_obs: int
    alpha: dict[str, float]
    se: dict[str, float]
    alpha_ci: tuple[float, float]
    p: float


def _panel_arrays(panel: Mapping[str, Sequence[TimedScore]], ids: Sequence[str]):
    subj, t, y = [], [], []
    for i, rid in enumerate(ids):
        pts = panel[rid]
        if len({p.t for p in pts}) < 2:
            raise SingularDesign(f"subject {rid} has fewer than 2 distinct time points", [rid])
        for p in pts:
            subj.append(i)
            t.append(p.t)
            y.append(p.pcl)
    return np.asarray(subj), np.asarray(t, float), np.asarray(y, float)


def _demean(values: np.ndarray, subj: np.ndarray, n_groups: int) -> np.ndarray:
    counts = np.bincount(subj, minlength=n_groups).astype(float)
    if values.ndim == 1:
        means = np.bincount(subj, weights=values, minlength=n_groups) / counts
        return values - means[subj]
    out = np.empty_like(values)
    for j in range(values.shape[1]):
        means = np.bincount(subj, weights=values[:, j], minlength=n_groups) / counts
        out[:, j] = values[:, j] - means[subj]
    return out


def joint_model(
    panel: Mapping[str, Sequence[TimedScore]],
    feature: pd.Series,
    covariates: pd.DataFrame,
    name: str | None = None,
) -> JointResult:
    """Fixed-intercept panel model PCL_it = b0_i + (a0 + a1 x1_i + ... ) t + e_it.

    Per-subject intercepts are absorbed by demeaning within subject, which gives
    the same coefficients as explicit indicator columns; the residual degrees of
    freedom count the absorbed intercepts. Predictors are standardized across
    subjects; the outcome stays in PCL units so alpha is PCL/year per SD.
    """
    name = name or str(feature.name)
    cols = {"__x": feature, **{c: covariates[c] for c in covariates.columns}}
    frame = _complete(cols)
    frame = frame.loc[[rid for rid in frame.index if rid in panel]]
    ids = list(frame.index)
    if len(ids) < MIN_N:
        raise SampleTooSmall(f"{name}: {len(ids)} subjects, need {MIN_N}")
    names = ["__x", *covariates.columns]
    Z = np.column_stack([standardize(frame[c].to_numpy(float)) for c in names])
    subj, t, y = _panel_arrays(panel, ids)
    X = np.column_stack([t, Z[subj] * t[:, None]])
    Xw = _demean(X, subj, len(ids))
    yw = _demean(y, subj, len(ids))
    fit = ols(Xw, yw, ["t", *names], intercept=False)
    df = len(y) - len(ids) - X.shape[1]
    if df <= 0:
        raise SingularDesign("no residual degrees of freedom", names)
    scale = fit.df_resid / df
    se = fit.se * math.sqrt(scale)
    i = 1
    q = stats.t.ppf(0.975, df)
    tval = fit.coef[i] / se[i]
    alphas = {"intercept": float(fit.coef[0]), **{(name if c == "__x" else c): float(fit.coef[j + 1]) for j, c in enumerate(names)}}
    ses = {"intercept": float(se[0]), **{(name if c == "__x" else c): float(se[j + 1]) for j, c in enumerate(names)}}
    return JointResult(
        name,
        len(ids),
        len(y),
        alphas,
        ses,
        (float(fit.coef[i] - q * se[i]), float(fit.coef[i] + q * se[i])),
        float(2 * stats.t.sf(abs(tval), df)),
    )


def two_stage_alpha(slopes: pd.Series, feature: pd.Series, covariates: pd.DataFrame, name: str | None = None) -> dict[str, float]:
    """Coefficients of raw slopes on standardized predictors (person-level model in PCL units)."""
    name = name or str(feature.name)
    frame = _complete({"__y": slopes, "__x": feature, **{c: covariates[c] for c in covariates.columns}})
    names = ["__x", *covariates.columns]
    X = np.column_stack([standardize(frame[c].to_numpy(float)) for c in names])
    fit = ols(X, frame["__y"].to_numpy(float), names)
    out = {"intercept": float(fit.coef[0])}
    for j, c in enumerate(names):
        out[name if c == "__x" else c] = float(fit.coef[j + 1])
    return out


# --- tertile curves --------------------------------------------------------


@dataclass
class TertileSeries:
    feature_name: str
    group: str  # "top" or "bottom"
    members: list[str]
    t: np.ndarray
    mean_adjusted_pcl: np.ndarray
    mean_slope: float = float("nan")

    @property
    def size(self) -> int:
        return len(self.members)


def tertile_groups(scores: pd.Series) -> tuple[list[str], list[str]]:
    """Top and bottom ceil(N/3) responders by score; ties ordered by responder id."""
    items = sorted(((float(v), str(k)) for k, v in scores.items()), key=lambda kv: (kv[0], kv[1]))
    g = math.ceil(len(items) / 3)
    bottom = [k for _, k in items[:g]]
    # top is taken from the descending order so ties resolve by id as well
    top = [k for _, k in sorted(items, key=lambda kv: (-kv[0], kv[1]))[:g]]
    return top, bottom


def tertile_trajectories(
    feature_scores: pd.Series,
    panel: Mapping[str, Sequence[TimedScore]],
    baseline_pcl: pd.Series,
    grid_size: int = 25,
    t_max: float | None = None,
) -> tuple[TertileSeries, TertileSeries]:
    """Mean baseline-adjusted fitted PCL curves of the top and bottom tertiles.

    PCL values are residualized on baseline PCL by one pooled regression over
    all post-interview points; each responder's residuals get an OLS line, and
    the lines are averaged within each group on a uniform time grid.
    """
    name = str(feature_scores.name)
    frame = _complete({"x": feature_scores, "b": baseline_pcl})
    frame = frame.loc[[rid for rid in frame.index if rid in panel]]
    if len(frame) < 6:
        raise SampleTooSmall(f"{name}: {len(frame)} responders, need 6 for tertiles")
    ids = list(frame.index)
    subj, t, y = _panel_arrays(panel, ids)
    b = frame["b"].to_numpy(float)[subj]
    pooled = ols(b, y, ["baseline"])
    resid = pooled.residuals
    lines = {}
    for i, rid in enumerate(ids):
        mask = subj == i
        tt, rr = t[mask], resid[mask]
        tc = tt - tt.mean()
        slope = float(tc @ (rr - rr.mean()) / (tc @ tc))
        lines[rid] = (float(rr.mean() - slope * tt.mean()), slope)
    top, bottom = tertile_groups(frame["x"])
    if t_max is None:
        t_max = float(t.max())
    grid = np.linspace(0.0, t_max, grid_size)
    out = []
    for label, members in (("top", top), ("bottom", bottom)):
        curves = np.array([lines[m][0] + lines[m][1] * grid for m in members])
        out.append(
            TertileSeries(name, label, members, grid, curves.mean(axis=0), float(np.mean([lines[m][1] for m in members])))
        )
    return out[0], out[1]
