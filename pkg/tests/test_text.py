import math

from hypothesis import given, strategies as st

from langtraj.text import BINARY, extract_ngrams, feature_table, meta_features, tokenize


def test_tokenize_examples():
    assert tokenize("We went DOWN there.") == ["we", "went", "down", "there"]
    assert tokenize("don't") == ["don't"]
    assert tokenize("don’t") == ["don't"]
    assert tokenize("9/11 -- chaos") == ["9/11", "chaos"]
    assert tokenize("well,then;ok") == ["well", "then", "ok"]
    assert tokenize("'quoted'") == ["quoted"]


def test_relative_frequencies():
    fv = extract_ngrams(["a", "b", "a"])
    assert fv.order(1) == {("a",): 2 / 3, ("b",): 1 / 3}
    assert fv.order(2) == {("a", "b"): 0.5, ("b", "a"): 0.5}
    assert fv.order(3) == {("a", "b", "a"): 1.0}


def test_binary():
    fv = extract_ngrams(["a", "b", "a"], mode=BINARY)
    assert fv.entries == {("a",): 1, ("b",): 1, ("a", "b"): 1, ("b", "a"): 1, ("a", "b", "a"): 1}


def test_ngrams_do_not_cross_utterances():
    fv = extract_ngrams([["a", "b"], ["c"]])
    assert ("b", "c") not in fv.entries
    assert fv.totals == {1: 3, 2: 1}


def test_meta():
    m = meta_features(["the", "cat", "sat"])
    assert (m.word_count, m.avg_word_length) == (3, 3.0)
    m = meta_features([])
    assert (m.word_count, m.avg_word_length) == (0, 0.0)
    m = meta_features(["a", "responders"])
    assert (m.word_count, m.avg_word_length) == (2, 5.5)


def test_feature_table_rows():
    out = feature_table([("r1", extract_ngrams(["a", "b"], max_order=2))])
    assert out.splitlines() == ["responder_id,order,ngram,value", "r1,1,a,0.5", "r1,1,b,0.5", "r1,2,a b,1.0"]


words = st.text(alphabet="abcde'-/.,!? ", max_size=40)


@given(st.lists(words, max_size=8))
def test_relative_frequencies_sum_to_one(utterances):
    segs = [tokenize(u) for u in utterances]
    fv = extract_ngrams(segs)
    for n, total in fv.totals.items():
        assert math.isclose(math.fsum(fv.order(n).values()), 1.0, abs_tol=1e-9)
        assert total == sum(max(0, len(s) - n + 1) for s in segs)


@given(words)
def test_tokens_have_no_edge_punctuation(text):
    for tok in tokenize(text):
        assert tok[0].isalnum() and tok[-1].isalnum()
        assert tok == tok.lower()
        assert all(ch.isalnum() or ch in "'-/" for ch in tok)


@given(st.lists(st.sampled_from(["i", "we", "the", "storm"]), min_size=1, max_size=30))
def test_duplication_preserves_relative_frequencies(tokens):
    a = extract_ngrams([tokens])
    b = extract_ngrams([tokens, tokens])
    assert a.entries.keys() == b.entries.keys()
    for k, v in a.entries.items():
        assert math.isclose(v, b.entries[k], rel_tol=1e-12)
