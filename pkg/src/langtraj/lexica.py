"""Categorical lexica, topic models and linear trait models.

Bundle layout on disk (a directory)::

    lexicon.csv      term,category          (term may end in '*')
    topics.csv       topic_id,word,weight   (weight = p(topic | word))
    traits/*.json    {"trait": ..., "intercept": ..., "weights": [{"feature": "topic:T17", "weight": 0.3}]}

Trait-model feature references are ``topic:<id>`` or ``<n>gram:<space separated words>``;
an optional per-weight ``"mode"`` of ``relative_frequency`` (default) or ``binary``
selects which n-gram representation is read.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .errors import ParseError, SchemaError
from .text import BINARY, MODES, RELATIVE, FeatureVector

log = logging.getLogger(__name__)

TRAITS = ("anxiety", "depression", "neuroticism", "extraversion")
CATEGORIES = ("first_person_singular", "first_person_plural", "articles")
COMPLETENESS_TOL = 1e-6


@dataclass(frozen=True)
class CategoricalLexicon:
    categories: Mapping[str, frozenset[str]]

    def __post_init__(self):
        for name, patterns in self.categories.items():
            if not patterns or any(not p or p == "*" for p in patterns):
                raise SchemaError(f"category {name!r} has an empty pattern")

    def matcher(self, category: str):
        literals = set()
        stems = []
        for p in self.categories[category]:
            if p.endswith("*"):
                stems.append(p[:-1])
            else:
                literals.add(p)
        stems_t = tuple(sorted(stems))
        return lambda word: word in literals or (bool(stems_t) and word.startswith(stems_t))


@dataclass(frozen=True)
class TopicModel:
    # topic_id -> word -> p(topic | word)
    topics: Mapping[str, Mapping[str, float]]
    _by_word: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        by_word: dict[str, list[tuple[str, float]]] = {}
        for tid in sorted(self.topics):
            for word, weight in self.topics[tid].items():
                if weight < 0 or not math.isfinite(weight):
                    raise SchemaError(f"topic {tid!r} word {word!r} has invalid weight {weight}")
                by_word.setdefault(word, []).append((tid, weight))
        object.__setattr__(self, "_by_word", by_word)

    def word_topics(self, word: str) -> list[tuple[str, float]]:
        return self._by_word.get(word, [])

    def completeness_violations(self, tol: float = COMPLETENESS_TOL) -> dict[str, float]:
        """Words whose topic weights do not sum to 1 within ``tol``."""
        bad = {}
        for word, pairs in self._by_word.items():
            total = math.fsum(w for _, w in pairs)
            if abs(total - 1.0) > tol:
                bad[word] = total
        return bad


@dataclass(frozen=True)
class FeatureRef:
    kind: str  # "topic" or "ngram"
    key: object  # topic id, or tuple of words
    mode: str = RELATIVE

    @classmethod
    def parse(cls, text: str, mode: str = RELATIVE) -> "FeatureRef":
        prefix, sep, rest = text.partition(":")
        if not sep or not rest:
            raise ValueError(f"bad feature reference {text!r}")
        if mode not in MODES:
            raise ValueError(f"bad feature mode {mode!r}")
        if prefix == "topic":
            return cls("topic", rest, mode)
        if prefix in ("1gram", "2gram", "3gram"):
            words = tuple(rest.split())
            if len(words) != int(prefix[0]):
                raise ValueError(f"{text!r} does not have {prefix[0]} words")
            return cls("ngram", words, mode)
        raise ValueError(f"unknown feature kind {prefix!r}")

    def __str__(self):
        if self.kind == "topic":
            return f"topic:{self.key}"
        return f"{len(self.key)}gram:{' '.join(self.key)}"


@dataclass(frozen=True)
class TraitModel:
    trait_name: str
    intercept: float
    weights: tuple[tuple[FeatureRef, float], ...]

    def max_order(self) -> int:
        return max((len(ref.key) for ref, _ in self.weights if ref.kind == "ngram"), default=1)

    def scaled(self, k: float) -> "TraitModel":
        return TraitModel(self.trait_name, self.intercept * k, tuple((r, w * k) for r, w in self.weights))


@dataclass(frozen=True)
class ModelBundle:
    traits: Mapping[str, TraitModel]
    lexicon: CategoricalLexicon
    topic_model: TopicModel
    bundle_id: str = "unidentified"

    def __post_init__(self):
        missing = [t for t in TRAITS if t not in self.traits]
        if missing:
            raise SchemaError(f"missing trait: {', '.join(missing)}")
        missing = [c for c in CATEGORIES if c not in self.lexicon.categories]
        if missing:
            raise SchemaError(f"missing category: {', '.join(missing)}")

    def max_order(self) -> int:
        return max(m.max_order() for m in self.traits.values())


# --- loading ---------------------------------------------------------------


def _read_csv(path: Path, columns: tuple[str, ...]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in columns if c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"missing column(s) {', '.join(missing)}", source=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            yield lineno, row


def load_lexicon(path) -> CategoricalLexicon:
    path = Path(path)
    cats: dict[str, set[str]] = {}
    for lineno, row in _read_csv(path, ("term", "category")):
        term = (row["term"] or "").strip().lower()
        cat = (row["category"] or "").strip()
        if not term or not cat or term == "*":
            raise ParseError("empty term or category", source=path, line=lineno)
        cats.setdefault(cat, set()).add(term)
    return CategoricalLexicon(MappingProxyType({k: frozenset(v) for k, v in sorted(cats.items())}))


def load_topics(path, tol: float = COMPLETENESS_TOL) -> TopicModel:
    path = Path(path)
    topics: dict[str, dict[str, float]] = {}
    for lineno, row in _read_csv(path, ("topic_id", "word", "weight")):
        tid = (row["topic_id"] or "").strip()
        word = (row["word"] or "").strip().lower()
        try:
            weight = float(row["weight"])
        except (TypeError, ValueError):
            raise ParseError(f"invalid weight {row['weight']!r}", source=path, line=lineno) from None
        if not tid or not word:
            raise ParseError("empty topic_id or word", source=path, line=lineno)
        if weight < 0 or not math.isfinite(weight):
            raise ParseError(f"invalid weight {weight}", source=path, line=lineno)
        slot = topics.setdefault(tid, {})
        if word in slot:
            raise ParseError(f"duplicate word {word!r} in topic {tid!r}", source=path, line=lineno)
        slot[word] = weight
    model = TopicModel(MappingProxyType({k: MappingProxyType(v) for k, v in sorted(topics.items())}))
    bad = model.completeness_violations(tol)
    if bad:
        sample = ", ".join(f"{w!r} sums to {s:.6g}" for w, s in sorted(bad.items())[:5])
        log.warning("topic model %s incomplete for %d word(s): %s", path, len(bad), sample)
    return model


def load_trait_model(path) -> TraitModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", source=path, line=exc.lineno) from None
    for key in ("trait", "intercept", "weights"):
        if key not in doc:
            raise SchemaError(f"{path}: missing key {key!r}")
    weights = []
    for j, entry in enumerate(doc["weights"]):
        try:
            ref = FeatureRef.parse(str(entry["feature"]), entry.get("mode", RELATIVE))
            weights.append((ref, float(entry["weight"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"weight {j}: {exc}", source=path) from None
    try:
        intercept = float(doc["intercept"])
    except (TypeError, ValueError):
        raise ParseError(f"invalid intercept {doc['intercept']!r}", source=path) from None
    return TraitModel(str(doc["trait"]), intercept, tuple(weights))


def bundle_digest(paths) -> str:
    h = hashlib.sha256()
    for p in sorted(Path(x) for x in paths):
        h.update(p.name.encode())
        h.update(b"\0")
        h.update(p.read_bytes())
    return h.hexdigest()[:16]


def load_bundle(paths, tol: float = COMPLETENESS_TOL) -> ModelBundle:
    """Load a bundle directory, or a mapping with keys ``lexicon``, ``topics`` and ``traits``."""
    if isinstance(paths, Mapping):
        lexicon_path = Path(paths["lexicon"])
        topics_path = Path(paths["topics"])
        trait_paths = [Path(p) for p in paths["traits"]]
    else:
        root = Path(paths)
        if not root.is_dir():
            raise SchemaError(f"bundle directory not found: {root}")
        lexicon_path, topics_path = root / "lexicon.csv", root / "topics.csv"
        trait_paths = sorted((root / "traits").glob("*.json"))
    for p in (lexicon_path, topics_path):
        if not p.is_file():
            raise SchemaError(f"bundle file not found: {p}")
    traits: dict[str, TraitModel] = {}
    for p in trait_paths:
        model = load_trait_model(p)
        if model.trait_name in traits:
            raise SchemaError(f"duplicate trait: {model.trait_name}")
        traits[model.trait_name] = model
    return ModelBundle(
        MappingProxyType(traits),
        load_lexicon(lexicon_path),
        load_topics(topics_path, tol),
        bundle_digest([lexicon_path, topics_path, *trait_paths]),
    )


def write_bundle(bundle: ModelBundle, root) -> list[Path]:
    """Serialize a bundle into the on-disk layout read by :func:`load_bundle`."""
    root = Path(root)
    (root / "traits").mkdir(parents=True, exist_ok=True)
    written = []
    with open(root / "lexicon.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["term", "category"])
        for cat in sorted(bundle.lexicon.categories):
            for term in sorted(bundle.lexicon.categories[cat]):
                w.writerow([term, cat])
    written.append(root / "lexicon.csv")
    with open(root / "topics.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic_id", "word", "weight"])
        for tid in sorted(bundle.topic_model.topics):
            for word in sorted(bundle.topic_model.topics[tid]):
                w.writerow([tid, word, repr(float(bundle.topic_model.topics[tid][word]))])
    written.append(root / "topics.csv")
    for name in sorted(bundle.traits):
        m = bundle.traits[name]
        doc = {
            "trait": m.trait_name,
            "intercept": m.intercept,
            "weights": [
                {"feature": str(ref), "weight": wt, **({"mode": ref.mode} if ref.mode != RELATIVE else {})}
                for ref, wt in m.weights
            ],
        }
        path = root / "traits" / f"{name}.json"
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        written.append(path)
    return written


# --- scoring ---------------------------------------------------------------


def _unigrams(features: FeatureVector) -> dict[str, float]:
    return {k[0]: v for k, v in features.entries.items() if len(k) == 1}


def score_categories(features: FeatureVector, lexicon: CategoricalLexicon) -> dict[str, float]:
    """Summed relative frequency of the unigrams matching each category."""
    unigrams = _unigrams(features)
    scores = {}
    for cat in lexicon.categories:
        match = lexicon.matcher(cat)
        scores[cat] = math.fsum(v for w, v in unigrams.items() if match(w))
    return scores


def score_topics(features: FeatureVector, topic_model: TopicModel) -> dict[str, float]:
    """Topic prevalence: sum over words of relative frequency times p(topic | word)."""
    parts: dict[str, list[float]] = {tid: [] for tid in topic_model.topics}
    for word, freq in _unigrams(features).items():
        for tid, weight in topic_model.word_topics(word):
            parts[tid].append(freq * weight)
    return {tid: math.fsum(vals) for tid, vals in parts.items()}


def apply_trait_model(
    features: FeatureVector,
    topic_scores: Mapping[str, float],
    model: TraitModel,
    binary: FeatureVector | None = None,
) -> float:
    """Intercept plus weighted sum of referenced feature values; unknown refs read as 0."""
    if binary is None and any(ref.mode == BINARY for ref, _ in model.weights):
        binary = features.to_binary() if features.mode == RELATIVE else features
    terms = []
    for ref, weight in model.weights:
        if ref.kind == "topic":
            value = topic_scores.get(ref.key, 0.0)
        elif ref.mode == BINARY:
            value = binary.get(ref.key)
        else:
            value = features.get(ref.key)
        terms.append(weight * value)
    return model.intercept + math.fsum(terms)


def demo_bundle_path() -> Path:
    """Directory of the small bundle shipped with the package (matches the synthetic vocabulary)."""
    return Path(__file__).parent / "data" / "demo_bundle"
