"""The nine language-based assessments per responder."""
from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .errors import CohortEmpty, EmptySpeech
from .lexica import TRAITS, ModelBundle, apply_trait_model, score_categories, score_topics
from .text import (
    RELATIVE,
    FeatureVector,
    MetaFeatures,
    _count_ngrams,
    from_counts,
    meta_features,
    meta_from_unigram_counts,
    responder_segments,
)

log = logging.getLogger(__name__)

FEATURES = (
    "anxiety",
    "depression",
    "neuroticism",
    "extraversion",
    "first_person_singular",
    "first_person_plural",
    "articles",
    "avg_word_length",
    "word_count",
)
FEATURE_LABELS = {
    "anxiety": "Anxiety",
    "depression": "Depression",
    "neuroticism": "Neuroticism",
    "extraversion": "Extraversion",
    "first_person_singular": "First-Person Singular",
    "first_person_plural": "First-Person Plural",
    "articles": "Articles",
    "avg_word_length": "AVG Word Length",
    "word_count": "Word Count",
}
LOW_DATA_WARN = 200
LOW_DATA_FLAG = 50


@dataclass(frozen=True)
class AssessmentRecord:
    responder_id: str
    scores: Mapping[str, float]
    low_data: str = ""  # "", "warn" (< 200 tokens) or "flag" (< 50 tokens)

    def __post_init__(self):
        if tuple(self.scores) != FEATURES:
            raise ValueError(f"scores must cover exactly {FEATURES}")


@dataclass
class AssessmentTable:
    records: list[AssessmentRecord]
    bundle_id: str
    version: str = __version__
    exclusions: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        ids = [r.responder_id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("responder ids in an assessment table must be unique")

    def ids(self) -> list[str]:
        return [r.responder_id for r in self.records]

    def column(self, feature: str) -> list[float]:
        return [r.scores[feature] for r in self.records]

    def to_frame(self):
        import pandas as pd

        return pd.DataFrame(
            [[r.scores[f] for f in FEATURES] for r in self.records],
            index=pd.Index(self.ids(), name="responder_id"),
            columns=list(FEATURES),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# bundle={self.bundle_id}\n# version={self.version}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["responder_id", *FEATURES])
        for r in self.records:
            row = [r.responder_id]
            for f in FEATURES:
                v = r.scores[f]
                row.append(str(int(v)) if f == "word_count" else repr(float(v)))
            w.writerow(row)
        return buf.getvalue()


def read_assessment_csv(source) -> "AssessmentTable":
    path = Path(source) if not isinstance(source, str) or "\n" not in source else None
    text = path.read_text(encoding="utf-8") if path is not None else source
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    records = [
        AssessmentRecord(row["responder_id"], {f: float(row[f]) for f in FEATURES}) for row in reader
    ]
    return AssessmentTable(records, meta.get("bundle", "unknown"), meta.get("version", "unknown"))


def assess_features(
    responder_id: str,
    features: FeatureVector,
    meta: MetaFeatures,
    bundle: ModelBundle,
) -> AssessmentRecord:
    """Score one responder from precomputed relative-frequency features."""
    if meta.word_count == 0:
        raise EmptySpeech(f"{responder_id}: no responder tokens")
    topic_scores = score_topics(features, bundle.topic_model)
    categories = score_categories(features, bundle.lexicon)
    binary = features.to_binary()
    scores = {t: apply_trait_model(features, topic_scores, bundle.traits[t], binary) for t in TRAITS}
    scores["first_person_singular"] = categories["first_person_singular"]
    scores["first_person_plural"] = categories["first_person_plural"]
    scores["articles"] = categories["articles"]
    scores["avg_word_length"] = meta.avg_word_length
    scores["word_count"] = meta.word_count
    low = "flag" if meta.word_count < LOW_DATA_FLAG else "warn" if meta.word_count < LOW_DATA_WARN else ""
    if low:
        log.warning("%s: only %d responder tokens", responder_id, meta.word_count)
    return AssessmentRecord(responder_id, {f: scores[f] for f in FEATURES}, low)


def assess_responder(transcript, bundle: ModelBundle) -> AssessmentRecord:
    segments = responder_segments(transcript)
    tokens = [t for seg in segments for t in seg]
    if not tokens:
        raise EmptySpeech(f"{transcript.responder_id}: no responder tokens")
    counts, _ = _count_ngrams(segments, bundle.max_order())
    return assess_features(transcript.responder_id, from_counts(counts, RELATIVE), meta_features(tokens), bundle)


def assess_counts(responder_id: str, unigram_counts: Mapping[str, int], bundle: ModelBundle) -> AssessmentRecord:
    """Score from bag-of-words counts; equivalent to :func:`assess_responder` for unigram-only bundles."""
    if bundle.max_order() > 1:
        raise ValueError("bundle references phrases; counts of single words are not enough")
    counts = {(w,): int(c) for w, c in unigram_counts.items() if c > 0}
    return assess_features(responder_id, from_counts(counts, RELATIVE), meta_from_unigram_counts(counts), bundle)


def _try(fn, *args):
    try:
        return fn(*args), None
    except EmptySpeech as exc:
        return None, str(exc)


def assess_cohort(transcripts: Sequence, bundle: ModelBundle, jobs: int = 1) -> AssessmentTable:
    """Assess every transcript; failures are logged and collected, not raised."""
    transcripts = list(transcripts)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda tr: _try(assess_responder, tr, bundle), transcripts))
    else:
        results = [_try(assess_responder, tr, bundle) for tr in transcripts]
    records, exclusions = [], []
    for tr, (rec, err) in zip(transcripts, results):
        if rec is None:
            log.warning("excluded %s: %s", tr.responder_id, err)
            exclusions.append((tr.responder_id, err))
        else:
            records.append(rec)
    if not records:
        raise CohortEmpty("no responder could be assessed")
    return AssessmentTable(records, bundle.bundle_id, __version__, exclusions)
