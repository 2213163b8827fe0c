import json
import logging
import math
import shutil

import pytest
from hypothesis import given, strategies as st

from langtraj.errors import SchemaError
from langtraj.lexica import (
    CategoricalLexicon,
    FeatureRef,
    TopicModel,
    TraitModel,
    apply_trait_model,
    demo_bundle_path,
    load_bundle,
    load_topics,
    score_categories,
    score_topics,
)
from langtraj.text import BINARY, FeatureVector, extract_ngrams


def fv(unigrams):
    return FeatureVector("relative_frequency", {(w,): v for w, v in unigrams.items()})


def lex(**cats):
    return CategoricalLexicon({k: frozenset(v) for k, v in cats.items()})


def test_demo_bundle_loads():
    b = load_bundle(demo_bundle_path())
    assert set(b.traits) == {"anxiety", "depression", "neuroticism", "extraversion"}
    assert len(b.bundle_id) == 16


def test_missing_trait(tmp_path):
    shutil.copytree(demo_bundle_path(), tmp_path / "b")
    (tmp_path / "b" / "traits" / "extraversion.json").unlink()
    with pytest.raises(SchemaError, match="missing trait: extraversion"):
        load_bundle(tmp_path / "b")


def test_incomplete_topics_warn(tmp_path, caplog):
    p = tmp_path / "topics.csv"
    p.write_text("topic_id,word,weight\nA,we,0.7\nB,we,0.4\n")
    with caplog.at_level(logging.WARNING):
        model = load_topics(p)
    assert "incomplete" in caplog.text
    assert model.completeness_violations() == {"we": pytest.approx(1.1)}


def test_category_scores():
    lexicon = lex(fps={"i"}, fpp={"we"})
    assert score_categories(fv({"i": 2 / 3, "we": 1 / 3}), lexicon) == {"fps": 2 / 3, "fpp": 1 / 3}
    assert score_categories(fv({"cat": 1.0}), lexicon) == {"fps": 0.0, "fpp": 0.0}


def test_stem_pattern():
    scores = score_categories(fv({"responders": 0.25, "respond": 0.25, "cat": 0.5}), lex(r={"respond*"}))
    assert scores["r"] == 0.5


def test_topic_scores():
    two = TopicModel({"T1": {"storm": 1.0}, "T2": {"calm": 1.0}})
    assert score_topics(fv({"storm": 0.5, "calm": 0.5}), two) == {"T1": 0.5, "T2": 0.5}
    mixed = TopicModel({"T1": {"storm": 0.8, "calm": 0.1}, "T2": {"storm": 0.2, "calm": 0.9}})
    out = score_topics(fv({"storm": 0.6, "calm": 0.4}), mixed)
    assert out["T1"] == pytest.approx(0.52, abs=1e-12) and out["T2"] == pytest.approx(0.48, abs=1e-12)
    one = TopicModel({"T": {"storm": 1.0, "calm": 1.0}})
    assert score_topics(fv({"storm": 0.6, "calm": 0.4}), one)["T"] == pytest.approx(1.0)


def test_trait_model():
    assert apply_trait_model(fv({}), {}, TraitModel("anxiety", 2.5, ())) == 2.5
    m = TraitModel("anxiety", 0.0, ((FeatureRef.parse("topic:T1"), 2.0),))
    assert apply_trait_model(fv({}), {"T1": 0.52}, m) == pytest.approx(1.04)
    absent = TraitModel("anxiety", 1.0, ((FeatureRef.parse("2gram:not there"), 5.0),))
    assert apply_trait_model(fv({"x": 1.0}), {}, absent) == 1.0


def test_binary_weights():
    m = TraitModel("anxiety", 0.0, ((FeatureRef.parse("1gram:a", BINARY), 3.0), (FeatureRef.parse("1gram:a"), 1.0)))
    feats = extract_ngrams(["a", "b", "b", "b"])
    assert apply_trait_model(feats, {}, m) == pytest.approx(3.25)


@pytest.mark.parametrize("text", ["topic:", "2gram:one", "4gram:a b c d", "word:x"])
def test_bad_refs(text):
    with pytest.raises(ValueError):
        FeatureRef.parse(text)


def test_bad_trait_json(tmp_path):
    shutil.copytree(demo_bundle_path(), tmp_path / "b")
    (tmp_path / "b" / "traits" / "anxiety.json").write_text(json.dumps({"trait": "anxiety", "intercept": 0}))
    with pytest.raises(SchemaError, match="weights"):
        load_bundle(tmp_path / "b")


freqs = st.dictionaries(st.sampled_from(["storm", "calm", "we", "i", "the"]), st.floats(0.01, 1.0), min_size=1)


@given(freqs, st.lists(st.floats(0.0, 1.0), min_size=5, max_size=5))
def test_topic_scores_bounded_for_complete_models(raw, split):
    total = sum(raw.values())
    rel = {w: v / total for w, v in raw.items()}
    words = ["storm", "calm", "we", "i", "the"]
    model = TopicModel({"A": {w: s for w, s in zip(words, split)}, "B": {w: 1 - s for w, s in zip(words, split)}})
    scores = score_topics(fv(rel), model)
    assert all(-1e-12 <= v <= 1 + 1e-12 for v in scores.values())
    assert math.fsum(scores.values()) == pytest.approx(1.0, abs=1e-6)


@given(freqs, freqs, st.floats(0.0, 3.0))
def test_scores_linear(a, b, k):
    lexicon = lex(x={"storm", "we"}, y={"i", "calm"})
    model = TopicModel({"T": {"storm": 0.3, "the": 1.0}})
    combo = {w: a.get(w, 0.0) + k * b.get(w, 0.0) for w in set(a) | set(b)}
    for score in (lambda d: score_categories(fv(d), lexicon), lambda d: score_topics(fv(d), model)):
        sa, sb, sc = score(a), score(b), score(combo)
        for key in sc:
            assert sc[key] == pytest.approx(sa[key] + k * sb[key], abs=1e-9)
