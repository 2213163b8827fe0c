import numpy as np
import pytest

from langtraj.assess import FEATURES
from langtraj.errors import ConfigError, ProvenanceError
from langtraj.pipeline import analyze_synthetic
from langtraj.synth import SynthConfig, generate_cohort, oracle_report
from langtraj.text import extract_ngrams, responder_segments


def test_same_seed_same_files(tmp_path):
    a = generate_cohort(SynthConfig(seed=1, n_subjects=12)).write(tmp_path / "a")
    b = generate_cohort(SynthConfig(seed=1, n_subjects=12)).write(tmp_path / "b")
    for key in ("transcripts", "pcl", "demographics", "truth"):
        assert a[key].read_bytes() == b[key].read_bytes()
    c = generate_cohort(SynthConfig(seed=2, n_subjects=12)).write(tmp_path / "c")
    assert a["pcl"].read_bytes() != c["pcl"].read_bytes()


@pytest.mark.parametrize(
    "bad",
    [
        {"n_subjects": 5},
        {"visits_per_subject": 3},
        {"marker_rates": {"anxiety": 1.5}},
        {"marker_rates": {"articles": 0.4}},
        {"longitudinal": {"anxiety": float("nan")}},
        {"longitudinal": {"anxiety": 0.9, "first_person_plural": 0.6}},
        {"unknown_key": 1},
    ],
)
def test_infeasible_configs(bad):
    with pytest.raises(ConfigError):
        generate_cohort(SynthConfig.from_dict(bad))


def test_four_visits_are_enough():
    cohort = generate_cohort(SynthConfig(seed=4, n_subjects=20, visits_per_subject=4), materialize_text=False)
    data, _ = analyze_synthetic(cohort)
    assert len(data.sample.trajectory_ids()) == 20


def test_baseline_moments():
    truth = generate_cohort(SynthConfig(seed=21, n_subjects=500), materialize_text=False).truth
    assert np.mean(truth.true_baseline) == pytest.approx(33.7, abs=1.0)
    assert np.std(truth.true_baseline, ddof=1) == pytest.approx(16.2, abs=1.0)
    assert truth.clip_rate < 0.01


def test_zero_noise_recovery():
    cfg = SynthConfig(
        seed=5, n_subjects=75, pcl_noise_sd=0.0, text_noise=False, exact_moments=True,
        longitudinal={"first_person_plural": -0.37}, cross_sectional={}, baseline_on_slope=0.0,
        words_per_subject=1_000_000,  # keeps integer rounding of word counts negligible
    )
    cohort = generate_cohort(cfg, materialize_text=False)
    _, res = analyze_synthetic(cohort)
    report = oracle_report(cohort.truth, res, 5)
    assert len(report.rows) == len(FEATURES)
    assert report.coverage == 1.0
    for row in report.rows:
        assert abs(row.estimate - row.true_value) < 1e-3


def test_mismatched_seed():
    cohort = generate_cohort(SynthConfig(seed=5, n_subjects=20), materialize_text=False)
    with pytest.raises(ProvenanceError):
        oracle_report(cohort.truth, [], 6)


def test_marker_frequencies_track_latents():
    cfg = SynthConfig(seed=8, n_subjects=500)
    cohort = generate_cohort(cfg, materialize_text=False)
    data, _ = analyze_synthetic(cohort)
    frame = data.frame
    for feat in ("first_person_singular", "first_person_plural", "articles"):
        base = cfg.rates()[feat]
        # share of between-subject variance not due to multinomial sampling
        reliability = 1 / (1 + 1 / (base * 0.3**2 * cfg.words_per_subject))
        r = np.corrcoef(frame.loc[cohort.truth.responder_ids, feat], cohort.truth.latent[feat])[0, 1]
        assert r == pytest.approx(np.sqrt(reliability), abs=0.05)


def test_text_and_counts_agree(text_cohort):
    t = text_cohort.transcripts[0]
    fv = extract_ngrams(responder_segments(t), max_order=1)
    words = sum(text_cohort.word_counts[t.responder_id].values())
    assert fv.totals[1] == words
    assert len(text_cohort.transcripts) == 75
    assert 0.5 * 10_000 < np.median([sum(c.values()) for c in text_cohort.word_counts.values()]) < 1.5 * 10_000
