from datetime import date

import pytest

from langtraj.assess import FEATURES, assess_cohort, assess_counts, assess_responder, read_assessment_csv
from langtraj.cohort import Transcript, Utterance
from langtraj.errors import CohortEmpty, EmptySpeech
from langtraj.lexica import CategoricalLexicon, ModelBundle, TopicModel, TraitModel, load_bundle, demo_bundle_path

DAY = date(2012, 1, 1)


def tiny_bundle():
    traits = {t: TraitModel(t, c, ()) for t, c in zip(("anxiety", "depression", "neuroticism", "extraversion"), (1.0, 2.0, 3.0, 4.0))}
    lexicon = CategoricalLexicon({"first_person_singular": frozenset({"i"}), "first_person_plural": frozenset({"we"}), "articles": frozenset({"the"})})
    return ModelBundle(traits, lexicon, TopicModel({}))


def tr(rid, *texts, speaker="responder"):
    return Transcript(rid, DAY, tuple(Utterance(float(i), speaker, t) for i, t in enumerate(texts)))


def test_hand_computed_record():
    rec = assess_responder(tr("r1", "i i we"), tiny_bundle())
    s = rec.scores
    assert s["first_person_singular"] == pytest.approx(2 / 3)
    assert s["first_person_plural"] == pytest.approx(1 / 3)
    # lengths 1, 1, 2
    assert s["word_count"] == 3 and s["avg_word_length"] == pytest.approx(4 / 3)
    assert (s["anxiety"], s["depression"], s["neuroticism"], s["extraversion"]) == (1.0, 2.0, 3.0, 4.0)
    assert rec.low_data == "flag"


def test_interviewer_only():
    with pytest.raises(EmptySpeech):
        assess_responder(tr("r1", "how are you", speaker="interviewer"), tiny_bundle())


def test_duplicated_utterances_only_change_word_count():
    bundle = load_bundle(demo_bundle_path())
    texts = ["we were there together with the crew", "i remember the smoke"]
    a = assess_responder(tr("r", *texts), bundle)
    b = assess_responder(tr("r", *texts, *texts), bundle)
    for f in FEATURES:
        if f == "word_count":
            assert b.scores[f] == 2 * a.scores[f]
        else:
            assert b.scores[f] == pytest.approx(a.scores[f], abs=1e-12)


def test_cohort_order_and_exclusions(caplog):
    trs = [tr("c", "we"), tr("a", "the", speaker="interviewer"), tr("b", "i")]
    table = assess_cohort(trs, tiny_bundle())
    assert table.ids() == ["c", "b"]
    assert [rid for rid, _ in table.exclusions] == ["a"]
    assert "excluded a" in caplog.text
    assert assess_cohort(trs[::2], tiny_bundle()).ids() == ["c", "b"]


def test_all_empty():
    with pytest.raises(CohortEmpty):
        assess_cohort([tr("a", "x", speaker="interviewer")], tiny_bundle())


def test_workers_do_not_change_output(text_cohort):
    trs = text_cohort.transcripts[:20]
    assert assess_cohort(trs, text_cohort.bundle, jobs=1).to_csv() == assess_cohort(trs, text_cohort.bundle, jobs=8).to_csv()


def test_counts_path_matches_text_path(text_cohort):
    for t in text_cohort.transcripts[:5]:
        a = assess_responder(t, text_cohort.bundle)
        b = assess_counts(t.responder_id, text_cohort.word_counts[t.responder_id], text_cohort.bundle)
        for f in FEATURES:
            assert b.scores[f] == pytest.approx(a.scores[f], rel=1e-12, abs=1e-15)


def test_interviewer_speech_is_ignored(text_cohort):
    t = text_cohort.transcripts[0]
    stripped = Transcript(t.responder_id, t.interview_date, tuple(u for u in t.utterances if u.speaker == "responder"))
    assert assess_responder(t, text_cohort.bundle) == assess_responder(stripped, text_cohort.bundle)


def test_csv_round_trip(text_cohort):
    table = assess_cohort(text_cohort.transcripts[:4], text_cohort.bundle)
    back = read_assessment_csv(table.to_csv())
    assert back.bundle_id == table.bundle_id
    assert [r.scores for r in back.records] == [dict(r.scores) for r in table.records]
