"""Tokenization, n-gram features and meta features of responder speech."""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

RELATIVE = "relative_frequency"
BINARY = "binary"
MODES = (RELATIVE, BINARY)

# characters kept inside a token; every other non-alphanumeric character splits it
_INTERNAL = frozenset("'-/")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})

NGramKey = tuple  # tuple of token surfaces; the order is len(key)


def _strip_edges(piece: str) -> str:
    start, end = 0, len(piece)
    while start < end and not piece[start].isalnum():
        start += 1
    while end > start and not piece[end - 1].isalnum():
        end -= 1
    return piece[start:end]


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens.

    Whitespace separates tokens, leading and trailing punctuation is stripped,
    and apostrophes, hyphens and slashes survive only between other characters.

    >>> tokenize("We went DOWN there.")
    ['we', 'went', 'down', 'there']
    >>> tokenize("9/11 -- chaos")
    ['9/11', 'chaos']
    """
    tokens = []
    for chunk in text.translate(_APOSTROPHES).lower().split():
        piece = []
        for ch in chunk:
            if ch.isalnum() or ch in _INTERNAL:
                piece.append(ch)
            else:
                word = _strip_edges("".join(piece))
                if word:
                    tokens.append(word)
                piece = []
        word = _strip_edges("".join(piece))
        if word:
            tokens.append(word)
    return tokens


@dataclass
class FeatureVector:
    mode: str
    entries: dict[tuple[str, ...], float] = field(default_factory=dict)
    totals: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    def order(self, n: int) -> dict[tuple[str, ...], float]:
        return {k: v for k, v in self.entries.items() if len(k) == n}

    def get(self, key: tuple[str, ...], default: float = 0.0) -> float:
        return self.entries.get(key, default)

    def to_binary(self) -> "FeatureVector":
        return FeatureVector(BINARY, {k: 1.0 for k, v in self.entries.items() if v > 0}, dict(self.totals))


def _count_ngrams(segments: Iterable[Sequence[str]], max_order: int) -> tuple[Counter, dict[int, int]]:
    counts: Counter = Counter()
    totals = {n: 0 for n in range(1, max_order + 1)}
    for seg in segments:
        seg = list(seg)
        for n in range(1, max_order + 1):
            grams = [tuple(seg[i : i + n]) for i in range(len(seg) - n + 1)]
            counts.update(grams)
            totals[n] += len(grams)
    return counts, {n: c for n, c in totals.items() if c > 0}


def from_counts(counts: Mapping[tuple[str, ...], int], mode: str = RELATIVE) -> FeatureVector:
    """Build a feature vector from raw n-gram counts."""
    totals: dict[int, int] = {}
    for key, c in counts.items():
        totals[len(key)] = totals.get(len(key), 0) + c
    if mode == BINARY:
        return FeatureVector(BINARY, {k: 1.0 for k, c in counts.items() if c > 0}, totals)
    return FeatureVector(RELATIVE, {k: c / totals[len(k)] for k, c in counts.items() if c > 0}, totals)


def extract_ngrams(tokens, max_order: int = 3, mode: str = RELATIVE) -> FeatureVector:
    """N-gram features of orders 1..max_order.

    ``tokens`` is either one token list or a list of per-utterance token lists;
    n-grams never span two utterances. Relative frequencies are normalized
    within each order.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not 1 <= max_order <= 3:
        raise ValueError("max_order must be 1, 2 or 3")
    tokens = list(tokens)
    segments = tokens if tokens and not isinstance(tokens[0], str) else [tokens]
    counts, _ = _count_ngrams(segments, max_order)
    return from_counts(counts, mode)


@dataclass(frozen=True)
class MetaFeatures:
    word_count: int
    avg_word_length: float


def meta_features(tokens: Iterable[str]) -> MetaFeatures:
    tokens = list(tokens)
    if not tokens:
        return MetaFeatures(0, 0.0)
    return MetaFeatures(len(tokens), math.fsum(len(t) for t in tokens) / len(tokens))


def meta_from_unigram_counts(counts: Mapping[tuple[str, ...], int]) -> MetaFeatures:
    uni = {k[0]: c for k, c in counts.items() if len(k) == 1}
    n = sum(uni.values())
    if n == 0:
        return MetaFeatures(0, 0.0)
    return MetaFeatures(n, math.fsum(len(w) * c for w, c in uni.items()) / n)


def responder_segments(transcript) -> list[list[str]]:
    """Token lists of the responder's utterances, in order; interviewer speech is dropped."""
    return [tokenize(text) for text in transcript.responder_text()]


def feature_table(rows: Iterable[tuple[str, FeatureVector]]) -> str:
    """Long-format export: responder_id, order, ngram, value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["responder_id", "order", "ngram", "value"])
    for rid, fv in rows:
        for key in sorted(fv.entries, key=lambda k: (len(k), k)):
            w.writerow([rid, len(key), " ".join(key), repr(fv.entries[key])])
    return buf.getvalue()
