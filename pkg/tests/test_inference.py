import numpy as np
import pandas as pd
import pytest

from langtraj.errors import SampleTooSmall
from langtraj.inference import (
    associate,
    joint_model,
    marital_mediation,
    suppression_scan,
    suppression_table,
    tertile_groups,
    tertile_trajectories,
    trajectory_associations,
    two_stage_alpha,
)
from langtraj.pipeline import Analyses, analyze_synthetic, run_analyses
from langtraj.stats import standardize
from langtraj.synth import SynthConfig, generate_cohort
from langtraj.trajectory import TimedScore


def frame(n, seed=0):
    rng = np.random.default_rng(seed)
    idx = [f"s{i:03d}" for i in range(n)]
    return pd.DataFrame(rng.normal(size=(n, 4)), index=idx, columns=["x", "y", "c1", "c2"]), rng


def test_no_covariates_beta_equals_r():
    df, _ = frame(50)
    a = associate(df["x"], df["y"], None, "x")
    assert a.beta == pytest.approx(a.r, abs=1e-10)


def test_listwise_deletion():
    df, _ = frame(40)
    df.loc[df.index[:5], "c1"] = np.nan
    a = associate(df["x"], df["y"], df[["c1"]], "x")
    assert a.n == 35


def test_planted_concurrent_effect():
    df, rng = frame(200, 3)
    df["y"] = 0.6 * df["x"] + rng.normal(size=200)
    a = associate(df["x"], df["y"], df[["c1", "c2"]], "x")
    assert a.beta > 0 and a.p_raw < 1e-6


def test_too_small():
    df, _ = frame(8)
    with pytest.raises(SampleTooSmall):
        associate(df["x"], df["y"], None, "x")


def test_full_adjustment_matches_trajectory_table():
    df, rng = frame(80, 5)
    df["baseline_pcl"] = rng.normal(size=80)
    feats = df[["x", "c2"]]
    cov = df[["c1"]]
    table = trajectory_associations(feats, df["y"], df["baseline_pcl"], cov)
    rows = suppression_table(feats, df["y"], df[["c1", "baseline_pcl"]])
    for a, s in zip(table, rows):
        assert s.adjusted.value == pytest.approx(a.beta, abs=1e-10)
        assert s.unadjusted.value == pytest.approx(a.r, abs=1e-10)


def test_suppressor_column_moves_most():
    n = 400
    rng = np.random.default_rng(9)
    b = rng.normal(size=n)
    x = 0.6 * b + 0.8 * rng.normal(size=n)
    y = 0.4 * x - 0.5 * b + rng.normal(size=n)
    idx = [f"s{i}" for i in range(n)]
    cov = pd.DataFrame({"noise": rng.normal(size=n), "baseline_pcl": b}, index=idx)
    row = suppression_scan(pd.Series(x, idx), pd.Series(y, idx), cov, "x")
    gain = {c: abs(e.value) - abs(row.unadjusted.value) for c, e in row.single.items()}
    assert max(gain, key=gain.get) == "baseline_pcl"
    assert abs(row.adjusted.value) > abs(row.unadjusted.value)


def test_marital_status_confounding():
    n = 1000
    rng = np.random.default_rng(4)
    married = (rng.random(n) < 0.5).astype(float)
    x = married + 0.3 * rng.normal(size=n)
    y = married + rng.normal(size=n)
    idx = [f"s{i}" for i in range(n)]
    cov = pd.DataFrame({"c": rng.normal(size=n)}, index=idx)
    row = marital_mediation(pd.Series(x, idx), pd.Series(y, idx), cov, pd.Series(married, idx), "x")
    assert row.standard.value > 0.3
    assert abs(row.with_marital.value) < 0.15


def test_marital_unknown_dropped_from_both():
    df, _ = frame(60, 8)
    married = pd.Series(np.r_[np.ones(30), np.zeros(25), np.full(5, np.nan)], index=df.index)
    row = marital_mediation(df["x"], df["y"], df[["c1"]], married, "x")
    assert row.n == 55


def _panel(n, alpha, noise=0.0, seed=0, grid=None):
    rng = np.random.default_rng(seed)
    idx = [f"s{i:03d}" for i in range(n)]
    x, c = rng.normal(size=n), rng.normal(size=n)
    zx, zc = standardize(x), standardize(c)
    b0 = rng.uniform(20, 60, size=n)
    panel = {}
    for i, rid in enumerate(idx):
        ts = grid if grid is not None else np.sort(rng.uniform(0.2, 6, size=4))
        slope = alpha[0] + alpha[1] * zx[i] + alpha[2] * zc[i]
        panel[rid] = [TimedScore(float(t), float(b0[i] + slope * t + noise * rng.normal())) for t in ts]
    return panel, pd.Series(x, idx, name="x"), pd.DataFrame({"c": c}, index=idx)


def test_joint_noise_free():
    panel, x, cov = _panel(50, (-0.4, 0.7, 0.2))
    res = joint_model(panel, x, cov)
    assert res.alpha["x"] == pytest.approx(0.7, abs=1e-6)
    assert res.alpha["c"] == pytest.approx(0.2, abs=1e-6)
    assert res.alpha["intercept"] == pytest.approx(-0.4, abs=1e-6)
    assert res.n_obs == 200


def test_joint_small_noise_coverage():
    hits = 0
    for seed in range(200):
        panel, x, cov = _panel(40, (0.0, 0.5, 0.0), noise=1.0, seed=seed)
        res = joint_model(panel, x, cov)
        hits += abs(res.alpha["x"] - 0.5) <= 3 * res.se["x"]
    assert hits / 200 >= 0.99


def test_two_stage_matches_joint_on_balanced_panel():
    grid = np.array([0.5, 1.5, 3.0, 5.0])
    panel, x, cov = _panel(30, (0.1, -0.3, 0.2), noise=2.0, seed=2, grid=grid)
    slopes = pd.Series({rid: np.polyfit([p.t for p in pts], [p.pcl for p in pts], 1)[0] for rid, pts in panel.items()})
    two = two_stage_alpha(slopes, x, cov)
    joint = joint_model(panel, x, cov)
    assert two["x"] == pytest.approx(joint.alpha["x"], abs=1e-6)


def test_tertile_groups_small():
    scores = pd.Series([3.0, 1.0, 2.0, 2.0, 5.0, 0.0], index=list("abcdef"))
    top, bottom = tertile_groups(scores)
    assert top == ["e", "a"] and bottom == ["f", "b"]
    assert not set(top) & set(bottom)


def test_tertiles_follow_planted_slope():
    panel, x, cov = _panel(60, (0.0, 1.0, 0.0), noise=0.5, seed=1)
    baseline = pd.Series({rid: pts[0].pcl for rid, pts in panel.items()})
    top, bottom = tertile_trajectories(x, panel, baseline, grid_size=10)
    assert top.size == bottom.size == 20
    assert top.mean_slope > bottom.mean_slope
    assert top.mean_adjusted_pcl[-1] > bottom.mean_adjusted_pcl[-1]
    assert len(top.t) == 10


def test_tertiles_need_six():
    panel, x, _ = _panel(5, (0.0, 1.0, 0.0), noise=0.5)
    with pytest.raises(SampleTooSmall):
        tertile_trajectories(x, panel, pd.Series({k: 30.0 for k in panel}))


def test_toggles_are_independent():
    cohort = generate_cohort(SynthConfig(seed=3, n_subjects=80), materialize_text=False)
    _, only = analyze_synthetic(cohort, toggles=Analyses(True, True, False, False, False, False))
    _, every = analyze_synthetic(cohort, toggles=Analyses())
    assert only.table2 == every.table2 and only.table3 == every.table3


def test_null_covariate_single_beta_close_to_r():
    cohort = generate_cohort(SynthConfig(seed=7, n_subjects=500), materialize_text=False)
    _, res = analyze_synthetic(cohort, toggles=Analyses(False, False, True, False, False, False))
    diffs = [abs(r.single["years_since_911"].value - r.unadjusted.value) for r in res.s1]
    assert np.mean(diffs) < 0.02


@pytest.mark.slow
def test_noise_feature_tertile_gap():
    gaps = []
    for seed in range(200):
        cohort = generate_cohort(SynthConfig(seed=seed, n_subjects=75), materialize_text=False)
        data, _ = analyze_synthetic(cohort, toggles=Analyses(False, False, False, False, False, False))
        res = run_analyses(data, toggles=Analyses(False, False, False, False, False, True), tertile_features=("articles",))
        top, bottom = res.tertiles["articles"]
        gaps.append((top.mean_slope - bottom.mean_slope) / data.trajectory()["slope"].std())
    assert abs(np.mean(gaps)) < 0.05
