"""Synthetic cohorts with planted language/PCL effects.

Every subject gets nine standard-normal latent traits, one per assessment.
The latent trait drives the measured feature through the word-emission model:

* category and trait-marker words take a share ``base * (1 + 0.3 z)`` of the
  subject's words (``z`` clipped to [-3.3, 6]), spread evenly over the marker set;
* the rest is filler, split between 3- and 9-letter words so that the
  expected average word length is ``avg_len_mean + avg_len_sd * z``;
* the word count is ``words_per_subject * (1 + word_count_cv * z)``.

Baseline PCL comes from a Gaussian copula: ``u = sum(c_f z_f) + noise`` is
mapped through a Beta distribution on [17, 85] with the configured mean and
SD, so ``c_f`` is the cross-sectional effect in SD units of the latent score.
The yearly PCL slope in SD units is

    sum(alpha_f z_f) + delta * baseline_z + sum(gamma_c covariate_z) + residual

with the residual variance chosen so the slope has unit variance; ``alpha_f``
is therefore the standardized coefficient that the trajectory analysis
estimates. Post-interview PCL values follow a straight line from the baseline
(kept ``trajectory_headroom`` points away from the scale limits) plus noise,
clipped to [17, 85].

Random numbers come from numpy's PCG64 generator seeded through
``SeedSequence(seed)``; cohort-level latents use the first spawned child and
each subject's words and visits use its own child.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta
from pathlib import Path
from types import MappingProxyType

import numpy as np
from scipy import stats

from .assess import FEATURES
from .cohort import (
    ATTACK_DATE,
    DAYS_PER_YEAR,
    PCL_MAX,
    PCL_MIN,
    Demographics,
    PclRecord,
    Transcript,
    Utterance,
    serialize_demographics,
    serialize_pcl,
    serialize_transcripts,
)
from .errors import ConfigError, ProvenanceError
from .lexica import CategoricalLexicon, FeatureRef, ModelBundle, TopicModel, TraitModel, write_bundle

MARKERS = {
    "first_person_singular": ("i", "me", "my", "mine", "myself"),
    "first_person_plural": ("we", "us", "our", "ours", "ourselves"),
    "articles": ("the", "a", "an"),
    "anxiety": ("worried", "nervous", "afraid", "scared", "panic", "anxious"),
    "depression": ("sad", "tired", "empty", "lonely", "hopeless", "crying"),
    "neuroticism": ("upset", "angry", "stressed", "moody", "irritated"),
    "extraversion": ("party", "friends", "fun", "laughing", "social"),
}
BASE_RATES = {
    "first_person_singular": 0.04,
    "first_person_plural": 0.05,
    "articles": 0.06,
    "anxiety": 0.05,
    "depression": 0.04,
    "neuroticism": 0.04,
    "extraversion": 0.04,
}
RATE_SCALE = 0.3
# latent range used for emission rates: the floor keeps every rate positive
Z_FLOOR, Z_CEIL = -3.3, 6.0
SHORT_LEN, LONG_LEN = 3, 9
TRAIT_WEIGHT = 10.0
COVARIATES = ("age", "female", "police", "years_since_911", "married")
INTERVIEWER_PROMPTS = (
    "Where were you when you heard?",
    "Tell me about the first days at the site.",
    "What did we miss? Go on.",
    "How did your family react?",
    "And then what happened to you and your unit?",
    "Can you describe the smell, the dust?",
)
INTERVIEW_START = date(2010, 1, 1)
INTERVIEW_END = date(2018, 12, 31)


def _filler_words():
    cons, vowels = "bdfgklmnprstvz", "aeiou"
    taken = {w for ws in MARKERS.values() for w in ws}
    short = [c1 + v + c2 for c1, v, c2 in itertools.product(cons, vowels, cons)]
    short = [w for w in short if w not in taken][::37][:40]
    long_ = []
    for i, (a, b, c, d) in enumerate(itertools.product(cons, vowels, cons, vowels)):
        if i % 53 == 0:
            long_.append(a + b + c + d + "r" + b + "nt" + d)  # 9 letters
        if len(long_) == 40:
            break
    assert all(len(w) == SHORT_LEN for w in short) and all(len(w) == LONG_LEN for w in long_)
    return tuple(short), tuple(long_)


SHORT_FILLER, LONG_FILLER = _filler_words()


@dataclass
class SynthConfig:
    seed: int = 1
    n_subjects: int = 75
    words_per_subject: int = 10_000
    word_count_cv: float = 0.25
    words_per_utterance: int = 40
    visits_per_subject: int = 8
    follow_up_years: float = 6.0
    cross_sectional: dict = field(
        default_factory=lambda: {"depression": 0.32, "first_person_singular": 0.31, "neuroticism": 0.25}
    )
    longitudinal: dict = field(default_factory=lambda: {"first_person_plural": -0.37, "anxiety": 0.31})
    baseline_on_slope: float = -0.2
    covariate_on_slope: dict = field(default_factory=dict)
    baseline_mean: float = 33.7
    baseline_sd: float = 16.2
    slope_mean: float = 0.0
    slope_sd: float = 0.5
    pcl_noise_sd: float = 0.25
    pre_noise_sd: float = 2.0
    trajectory_headroom: float = 13.0
    avg_len_mean: float = 5.0
    avg_len_sd: float = 0.35
    text_noise: bool = True
    exact_moments: bool = False
    age_mean: float = 53.0
    age_sd: float = 8.0
    female_rate: float = 0.08
    police_rate: float = 0.49
    married_rate: float = 0.6
    marital_unknown_rate: float = 0.0
    marker_rates: dict = field(default_factory=dict)  # overrides BASE_RATES per feature

    def rates(self) -> dict[str, float]:
        return {**BASE_RATES, **self.marker_rates}

    def validate(self) -> None:
        if self.n_subjects < 6:
            raise ConfigError("n_subjects must be >= 6")
        if self.visits_per_subject < 4:
            # baseline (pre-interview) plus three post-interview visits
            raise ConfigError("visits_per_subject must be >= 4")
        if self.follow_up_years < 2.1:
            raise ConfigError("follow_up_years must be >= 2.1 so the last visit is two years out")
        if self.words_per_subject < 1 or not 0 <= self.word_count_cv < 1 / 3.5:
            raise ConfigError("words_per_subject must be >= 1 and word_count_cv in [0, 0.28)")
        for label, effects in (("cross_sectional", self.cross_sectional), ("longitudinal", self.longitudinal)):
            for k, v in effects.items():
                if k not in FEATURES:
                    raise ConfigError(f"{label}: unknown feature {k!r}")
                if not math.isfinite(v):
                    raise ConfigError(f"{label}: effect for {k} is not finite")
        for k, v in self.covariate_on_slope.items():
            if k not in COVARIATES or not math.isfinite(v):
                raise ConfigError(f"covariate_on_slope: bad entry {k!r}")
        if sum(v * v for v in self.cross_sectional.values()) >= 1:
            raise ConfigError("cross-sectional effects explain >= 100% of baseline variance")
        for k, v in self.marker_rates.items():
            if k not in BASE_RATES:
                raise ConfigError(f"marker_rates: {k!r} has no marker words")
            if not 0 < v < 1:
                raise ConfigError(f"marker rate for {k} must be in (0, 1), got {v}")
        peak = sum(self.rates().values()) * (1 + RATE_SCALE * Z_CEIL)
        if peak > 0.95:
            raise ConfigError(f"marker rates can reach {peak:.2f}, leaving no room for filler words")
        if self.residual_variance() < 0:
            raise ConfigError("planted slope effects explain more than 100% of slope variance")
        lo = PCL_MIN + self.trajectory_headroom
        if lo >= PCL_MAX - self.trajectory_headroom:
            raise ConfigError("trajectory_headroom leaves no room for intercepts")
        for name in ("female_rate", "police_rate", "married_rate", "marital_unknown_rate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must be a probability")
        if not (PCL_MIN < self.baseline_mean < PCL_MAX and self.baseline_sd > 0):
            raise ConfigError("baseline moments outside the PCL range")
        a, b = self.beta_params()
        if a <= 0 or b <= 0:
            raise ConfigError("baseline mean/SD infeasible on [17, 85]")

    def beta_params(self) -> tuple[float, float]:
        span = PCL_MAX - PCL_MIN
        m = (self.baseline_mean - PCL_MIN) / span
        v = (self.baseline_sd / span) ** 2
        k = m * (1 - m) / v - 1
        return m * k, (1 - m) * k

    def copula_factor(self) -> float:
        """E[u * g(u)] for the standardized baseline g(u); Cov(z_f, baseline_z) = c_f times this."""
        x, w = np.polynomial.hermite_e.hermegauss(160)
        w = w / w.sum()
        return float(np.sum(w * x * self._baseline_z(x)))

    def _baseline_z(self, u):
        a, b = self.beta_params()
        pcl = PCL_MIN + (PCL_MAX - PCL_MIN) * stats.beta.ppf(stats.norm.cdf(u), a, b)
        return (pcl - self.baseline_mean) / self.baseline_sd

    def residual_variance(self) -> float:
        explained = sum(v * v for v in self.longitudinal.values())
        explained += self.baseline_on_slope**2 + sum(v * v for v in self.covariate_on_slope.values())
        cross = sum(self.longitudinal.get(k, 0.0) * c for k, c in self.cross_sectional.items())
        if self.baseline_on_slope and cross:
            explained += 2 * self.baseline_on_slope * self.copula_factor() * cross
        return 1.0 - explained

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "SynthConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass
class GroundTruth:
    seed: int
    config_digest: str
    responder_ids: list[str]
    true_slope: np.ndarray
    true_baseline: np.ndarray
    latent: dict[str, np.ndarray]
    longitudinal: dict[str, float]
    cross_sectional: dict[str, float]
    cross_sectional_corr: dict[str, float]
    clip_rate: float  # share of post-interview PCL values clipped to [17, 85]
    long_share_clip_rate: float


@dataclass
class SynthCohort:
    config: SynthConfig
    transcripts: list[Transcript] | None
    word_counts: dict[str, dict[str, int]]
    pcl_records: list[PclRecord]
    demographics: list[Demographics]
    bundle: ModelBundle
    truth: GroundTruth
    interview_dates: dict[str, date] = field(default_factory=dict)

    def write(self, out_dir) -> dict[str, Path]:
        """Write the cohort in the ingest and bundle file formats."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if self.transcripts is None:
            raise ConfigError("cohort was generated without text")
        paths = {
            "transcripts": out / "transcripts.jsonl",
            "pcl": out / "pcl.csv",
            "demographics": out / "demographics.csv",
            "bundle": out / "bundle",
            "truth": out / "ground_truth.json",
        }
        paths["transcripts"].write_text(serialize_transcripts(self.transcripts), encoding="utf-8")
        paths["pcl"].write_text(serialize_pcl(self.pcl_records), encoding="utf-8")
        paths["demographics"].write_text(serialize_demographics(self.demographics), encoding="utf-8")
        write_bundle(self.bundle, paths["bundle"])
        paths["truth"].write_text(truth_json(self.truth, self.config), encoding="utf-8")
        return paths


def truth_json(truth: GroundTruth, config: SynthConfig) -> str:
    doc = {
        "seed": truth.seed,
        "config_digest": truth.config_digest,
        "config": asdict(config),
        "longitudinal": truth.longitudinal,
        "cross_sectional": truth.cross_sectional,
        "cross_sectional_corr": truth.cross_sectional_corr,
        "clip_rate": truth.clip_rate,
        "subjects": [
            {"responder_id": rid, "true_slope": float(s), "true_baseline": float(b)}
            for rid, s, b in zip(truth.responder_ids, truth.true_slope, truth.true_baseline)
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def synth_bundle() -> ModelBundle:
    """Lexicon, topic model and trait models matching the generator's vocabulary."""
    lexicon = CategoricalLexicon(
        MappingProxyType(
            {
                "articles": frozenset(MARKERS["articles"]),
                "first_person_plural": frozenset(("we", "us", "our", "ours", "ourselv*")),
                "first_person_singular": frozenset(MARKERS["first_person_singular"]),
            }
        )
    )
    topics: dict[str, dict[str, float]] = {
        "anx": {w: 1.0 for w in MARKERS["anxiety"]},
        "dep": {w: 1.0 for w in MARKERS["depression"]},
        "neu": {w: 1.0 for w in MARKERS["neuroticism"]},
        "ext": {w: 1.0 for w in MARKERS["extraversion"]},
        "func": {w: 1.0 for k in ("first_person_singular", "first_person_plural", "articles") for w in MARKERS[k]},
        "short": {w: 0.5 for w in SHORT_FILLER},
        "long": {w: 0.5 for w in LONG_FILLER},
        "mix": {**{w: 0.5 for w in SHORT_FILLER}, **{w: 0.5 for w in LONG_FILLER}},
    }
    topic_model = TopicModel(MappingProxyType({k: MappingProxyType(v) for k, v in sorted(topics.items())}))
    half = TRAIT_WEIGHT / 2
    traits = {
        "anxiety": TraitModel("anxiety", 0.0, ((FeatureRef("topic", "anx"), TRAIT_WEIGHT),)),
        "depression": TraitModel(
            "depression", 0.0, tuple((FeatureRef("ngram", (w,)), TRAIT_WEIGHT) for w in MARKERS["depression"])
        ),
        "neuroticism": TraitModel(
            "neuroticism",
            0.0,
            ((FeatureRef("topic", "neu"), half), *((FeatureRef("ngram", (w,)), half) for w in MARKERS["neuroticism"])),
        ),
        "extraversion": TraitModel("extraversion", 0.0, ((FeatureRef("topic", "ext"), TRAIT_WEIGHT),)),
    }
    return ModelBundle(MappingProxyType(traits), lexicon, topic_model, "synthetic")


def _orthonormalize(cols: np.ndarray, against: np.ndarray | None) -> np.ndarray:
    """Center, make columns orthogonal to ``against`` and each other, scale to sample SD 1."""
    n = cols.shape[0]
    basis = np.ones((n, 1))
    if against is not None and against.size:
        basis = np.column_stack([basis, against])
    q, r = np.linalg.qr(basis)
    q = q[:, np.abs(np.diag(r)) > 1e-10 * np.abs(r).max()]
    out = np.empty_like(cols)
    for j in range(cols.shape[1]):
        v = cols[:, j].copy()
        for _ in range(2):
            v -= q @ (q.T @ v)
        v /= np.sqrt(v @ v / (n - 1))
        out[:, j] = v
        q = np.column_stack([q, v / np.linalg.norm(v)])
    return out


def _round_counts(p: np.ndarray, total: int) -> np.ndarray:
    raw = p * total
    counts = np.floor(raw).astype(np.int64)
    short = total - int(counts.sum())
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def _word_probabilities(cfg: SynthConfig, z: dict[str, float], vocab_index: dict[str, int], n_vocab: int):
    p = np.zeros(n_vocab)
    rates = cfg.rates()
    marker_mass = 0.0
    marker_len = 0.0
    for feat, words in MARKERS.items():
        mass = rates[feat] * (1 + RATE_SCALE * float(np.clip(z[feat], Z_FLOOR, Z_CEIL)))
        for w in words:
            p[vocab_index[w]] = mass / len(words)
        marker_mass += mass
        marker_len += mass * float(np.mean([len(w) for w in words]))
    filler = 1.0 - marker_mass
    target = cfg.avg_len_mean + cfg.avg_len_sd * float(np.clip(z["avg_word_length"], -Z_CEIL, Z_CEIL))
    share = (target - marker_len - SHORT_LEN * filler) / ((LONG_LEN - SHORT_LEN) * filler)
    clipped = not 0.0 <= share <= 1.0
    share = min(1.0, max(0.0, share))
    for w in SHORT_FILLER:
        p[vocab_index[w]] = filler * (1 - share) / len(SHORT_FILLER)
    for w in LONG_FILLER:
        p[vocab_index[w]] = filler * share / len(LONG_FILLER)
    return p / p.sum(), clipped


def _reflect(value: float) -> float:
    """Fold a value back into the PCL range at its bounds."""
    span = PCL_MAX - PCL_MIN
    v = (value - PCL_MIN) % (2 * span)
    return PCL_MIN + (v if v <= span else 2 * span - v)


def _random_date(rng, start: date, end: date) -> date:
    return start + timedelta(days=int(rng.integers(0, (end - start).days + 1)))


def _build_transcript(rid, interview, tokens: list[str], rng, cfg: SynthConfig) -> Transcript:
    utts = []
    clock = 0.0
    i = 0
    while i < len(tokens):
        prompt = INTERVIEWER_PROMPTS[int(rng.integers(len(INTERVIEWER_PROMPTS)))]
        utts.append(Utterance(round(clock, 2), "interviewer", prompt))
        clock += 3.0
        k = 1 + int(rng.poisson(cfg.words_per_utterance - 1))
        chunk = tokens[i : i + k]
        i += k
        text = " ".join(chunk)
        utts.append(Utterance(round(clock, 2), "responder", text[:1].upper() + text[1:] + "."))
        clock += 0.4 * len(chunk)
    return Transcript(rid, interview, tuple(utts))


def generate_cohort(config: SynthConfig, materialize_text: bool = True) -> SynthCohort:
    """Draw a cohort; identical configs give identical cohorts.

    With ``materialize_text=False`` only per-subject word counts are produced,
    which is enough for unigram bundles and much faster.
    """
    cfg = config
    cfg.validate()
    n = cfg.n_subjects
    root = np.random.SeedSequence(cfg.seed)
    cohort_seq, *subject_seqs = root.spawn(n + 1)
    rng = np.random.Generator(np.random.PCG64(cohort_seq))

    # cohort-level draws
    Z = rng.standard_normal((n, len(FEATURES)))
    e_base = rng.standard_normal(n)
    e_slope = rng.standard_normal(n)
    interview_offsets = rng.integers(0, (INTERVIEW_END - INTERVIEW_START).days + 1, size=n)
    age = np.round(np.clip(rng.normal(cfg.age_mean, cfg.age_sd, size=n), 21.0, 85.0), 1)
    female = (rng.random(n) < cfg.female_rate).astype(float)
    police = (rng.random(n) < cfg.police_rate).astype(float)
    married = (rng.random(n) < cfg.married_rate).astype(float)
    marital_unknown = rng.random(n) < cfg.marital_unknown_rate

    interview_dates = [INTERVIEW_START + timedelta(days=int(d)) for d in interview_offsets]
    years911 = np.array([(d - ATTACK_DATE).days / DAYS_PER_YEAR for d in interview_dates])
    y_lo = (INTERVIEW_START - ATTACK_DATE).days / DAYS_PER_YEAR
    y_hi = (INTERVIEW_END - ATTACK_DATE).days / DAYS_PER_YEAR
    cov_z = {
        "age": (age - cfg.age_mean) / cfg.age_sd,
        "female": (female - cfg.female_rate) / math.sqrt(max(cfg.female_rate * (1 - cfg.female_rate), 1e-12)),
        "police": (police - cfg.police_rate) / math.sqrt(max(cfg.police_rate * (1 - cfg.police_rate), 1e-12)),
        "years_since_911": (years911 - (y_lo + y_hi) / 2) / ((y_hi - y_lo) / math.sqrt(12)),
        "married": (married - cfg.married_rate) / math.sqrt(max(cfg.married_rate * (1 - cfg.married_rate), 1e-12)),
    }

    if cfg.exact_moments:
        covs = np.column_stack([cov_z[c] for c in COVARIATES])
        covs = covs[:, covs.std(axis=0) > 0]
        block = _orthonormalize(np.column_stack([Z, e_base]), covs)
        Z, e_base = block[:, :-1], block[:, -1]

    latent = {f: Z[:, j] for j, f in enumerate(FEATURES)}
    cs = cfg.cross_sectional
    u = sum(c * latent[f] for f, c in cs.items()) + math.sqrt(1 - sum(c * c for c in cs.values())) * e_base
    baseline_z = cfg._baseline_z(u)
    a, b = cfg.beta_params()
    baseline = PCL_MIN + (PCL_MAX - PCL_MIN) * stats.beta.ppf(stats.norm.cdf(u), a, b)

    resid_sd = math.sqrt(max(cfg.residual_variance(), 0.0))
    if cfg.exact_moments:
        others = np.column_stack([Z, baseline_z, *[cov_z[c] for c in COVARIATES]])
        e_slope = _orthonormalize(e_slope[:, None], others[:, others.std(axis=0) > 0])[:, 0]
    slope_z = sum(a_ * latent[f] for f, a_ in cfg.longitudinal.items()) + cfg.baseline_on_slope * baseline_z
    slope_z = slope_z + sum(g * cov_z[c] for c, g in cfg.covariate_on_slope.items()) + resid_sd * e_slope
    slope = cfg.slope_mean + cfg.slope_sd * slope_z
    lo, hi = PCL_MIN + cfg.trajectory_headroom, PCL_MAX - cfg.trajectory_headroom
    start_level = np.clip(baseline, lo, hi)

    vocab = [w for ws in MARKERS.values() for w in ws] + list(SHORT_FILLER) + list(LONG_FILLER)
    vocab_index = {w: i for i, w in enumerate(vocab)}
    vocab_arr = np.array(vocab, dtype=object)

    width = len(str(n))
    transcripts = [] if materialize_text else None
    word_counts: dict[str, dict[str, int]] = {}
    records: list[PclRecord] = []
    demographics: list[Demographics] = []
    ids = []
    clipped_values = 0
    total_values = 0
    share_clips = 0
    far_pre = cfg.visits_per_subject >= 5
    n_post = cfg.visits_per_subject - 1 - far_pre
    for i in range(n):
        rid = f"s{i + 1:0{width}d}"
        ids.append(rid)
        srng = np.random.Generator(np.random.PCG64(subject_seqs[i]))
        zi = {f: float(latent[f][i]) for f in FEATURES}
        p, share_clipped = _word_probabilities(cfg, zi, vocab_index, len(vocab))
        share_clips += share_clipped
        wz = float(np.clip(zi["word_count"], -3.5, 3.5))
        n_words = max(1, int(round(cfg.words_per_subject * (1 + cfg.word_count_cv * wz))))
        counts = srng.multinomial(n_words, p) if cfg.text_noise else _round_counts(p, n_words)
        word_counts[rid] = {vocab[j]: int(c) for j, c in enumerate(counts) if c > 0}
        interview = interview_dates[i]
        if materialize_text:
            tokens = np.repeat(vocab_arr, counts)
            tokens = tokens[srng.permutation(tokens.size)].tolist()
            transcripts.append(_build_transcript(rid, interview, tokens, srng, cfg))

        # visits: an earlier pre-interview record, the baseline just before the interview, then follow-up
        pre_day = interview - timedelta(days=int(srng.integers(180, 721)))
        base_day = interview - timedelta(days=int(srng.integers(1, 91)))
        pre_val = _reflect(float(baseline[i] + srng.normal(0.0, cfg.pre_noise_sd)))
        vals = [pre_val]
        days = []
        span = cfg.follow_up_years - 0.3
        for j in range(n_post):
            frac = (j + 0.5 + srng.uniform(-0.35, 0.35)) / n_post
            days.append(max(1, int(round((0.3 + span * frac) * DAYS_PER_YEAR))))
        days[-1] = max(days[-1], int(math.ceil(2.0 * DAYS_PER_YEAR)) + 1)
        days = sorted(set(days))
        while len(days) < n_post:
            days.append(days[-1] + 7)
        for d in days:
            t = d / DAYS_PER_YEAR
            vals.append(float(start_level[i] + slope[i] * t + srng.normal(0.0, cfg.pcl_noise_sd)))
        clipped = [vals[0]] + [min(PCL_MAX, max(PCL_MIN, v)) for v in vals[1:]]
        clipped_values += sum(1 for v, c in zip(vals[1:], clipped[1:]) if v != c)
        total_values += len(vals) - 1
        if far_pre:
            records.append(PclRecord(rid, pre_day, clipped[0]))
        records.append(PclRecord(rid, base_day, float(baseline[i])))
        for d, v in zip(days, clipped[1:]):
            records.append(PclRecord(rid, interview + timedelta(days=d), v))

        status = "unknown" if marital_unknown[i] else ("married" if married[i] else "not_married")
        demographics.append(
            Demographics(rid, float(age[i]), "female" if female[i] else "male", bool(police[i]), status)
        )

    kappa = cfg.copula_factor()
    truth = GroundTruth(
        seed=cfg.seed,
        config_digest=cfg.digest(),
        responder_ids=ids,
        true_slope=slope,
        true_baseline=baseline,
        latent=latent,
        longitudinal={f: float(cfg.longitudinal.get(f, 0.0)) for f in FEATURES},
        cross_sectional={f: float(cs.get(f, 0.0)) for f in FEATURES},
        cross_sectional_corr={f: float(cs.get(f, 0.0)) * kappa for f in FEATURES},
        clip_rate=clipped_values / total_values,
        long_share_clip_rate=share_clips / n,
    )
    return SynthCohort(
        cfg, transcripts, word_counts, records, demographics, synth_bundle(), truth, dict(zip(ids, interview_dates))
    )


# --- oracle comparison -----------------------------------------------------


@dataclass
class RecoveryRow:
    feature: str
    planted: bool
    true_value: float
    estimate: float
    ci: tuple[float, float]
    covered: bool
    significant: bool


@dataclass
class RecoveryReport:
    seed: int
    rows: list[RecoveryRow]

    @property
    def coverage(self) -> float:
        return float(np.mean([r.covered for r in self.rows])) if self.rows else float("nan")

    def to_text(self) -> str:
        lines = ["feature\tplanted\ttrue\testimate\tci_lo\tci_hi\tcovered\tsignificant"]
        for r in self.rows:
            lines.append(
                f"{r.feature}\t{int(r.planted)}\t{r.true_value:.4f}\t{r.estimate:.4f}\t"
                f"{r.ci[0]:.4f}\t{r.ci[1]:.4f}\t{int(r.covered)}\t{int(r.significant)}"
            )
        lines.append(f"# coverage={self.coverage:.4f}")
        return "\n".join(lines) + "\n"


def oracle_report(truth: GroundTruth, results, results_seed: int) -> RecoveryReport:
    """Compare trajectory associations (adjusted beta) with the planted effects."""
    if results_seed != truth.seed:
        raise ProvenanceError(f"results come from seed {results_seed}, ground truth from seed {truth.seed}")
    if hasattr(results, "table3"):
        results = results.table3
    rows = []
    for res in results:
        true = truth.longitudinal.get(res.feature_name, 0.0)
        lo, hi = res.beta_ci
        rows.append(RecoveryRow(res.feature_name, true != 0.0, true, res.beta, (lo, hi), lo <= true <= hi, res.significant))
    return RecoveryReport(truth.seed, rows)
