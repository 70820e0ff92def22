import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2_contingency

from tsetlin_news.clause import literal_values
from tsetlin_news.textpipe import (CleaningConfig, TextPipeline, Vocabulary, booleanize,
                                   build_vocabulary, chi2_scores, chi2_select, clean_and_tokenize,
                                   document_frequencies, frequency_select, light_lemmatize,
                                   load_stopwords)

from conftest import WALL_SENTENCE

tokens_st = st.lists(st.sampled_from(list("abcdefgh")), max_size=6)


class TestCleaning:
    def test_wall_sentence(self):
        toks = clean_and_tokenize(WALL_SENTENCE)
        assert {"build", "wall", "u.s-mexico", "take", "years"} <= set(toks)
        assert not {"a", "on", "the", "will"} & set(toks)

    def test_empty(self):
        assert clean_and_tokenize("") == []

    def test_hyperlink_stripped(self):
        assert clean_and_tokenize("http://x.co VISIT") == ["visit"]

    def test_flags_off_keep_everything(self):
        cfg = CleaningConfig(strip_urls=False, strip_stopwords=False, strip_punctuation=False,
                             strip_emojis=False, lemmatize=False)
        assert clean_and_tokenize("The http://x.co Building!", cfg) == ["the", "http://x.co", "building!"]

    def test_emoji_removed(self):
        assert clean_and_tokenize("wow\U0001F600great ❤️") == ["wow", "great"]

    def test_punctuation(self):
        assert clean_and_tokenize("Trump's claim, \"fake\" (really)?!") == ["trump's", "claim", "fake", "really"]

    @pytest.mark.parametrize("word,lemma", [("building", "build"), ("taking", "take"),
                                            ("hoping", "hope"), ("stopped", "stop"),
                                            ("used", "used"), ("bring", "bring"),
                                            ("speed", "speed"), ("years", "years"),
                                            ("falling", "fall"), ("u.s-mexico", "u.s-mexico")])
    def test_lemmatizer(self, word, lemma):
        assert light_lemmatize(word) == lemma

    def test_plural_rule_is_opt_in(self):
        assert light_lemmatize("years", plurals=True) == "year"
        assert light_lemmatize("stories", plurals=True) == "story"
        assert light_lemmatize("glass", plurals=True) == "glass"

    def test_stopword_list(self):
        words = load_stopwords("en-v1")
        assert 120 <= len(words) <= 180
        assert {"the", "a", "will", "on"} <= words
        assert not {"build", "wall", "take", "years"} & words

    def test_config_file_roundtrip(self, tmp_path):
        cfg = CleaningConfig(lemmatize=False, stem_plurals=True)
        p = tmp_path / "clean.json"
        p.write_text(json.dumps(cfg.to_dict()))
        assert CleaningConfig.from_file(p) == cfg

    def test_config_rejects_unknowns(self):
        with pytest.raises(ValueError):
            CleaningConfig.from_dict({"strip_urls": True, "colour": 1})
        with pytest.raises(ValueError):
            CleaningConfig(stopword_list="de-v9")


class TestVocabulary:
    def test_sizes(self):
        assert len(build_vocabulary([["a", "b"], ["b", "c"]])) == 3
        assert len(build_vocabulary([["a"], ["a"]])) == 1

    def test_lexicographic_and_bijective(self):
        v = build_vocabulary([["wall", "build"], ["take"]])
        assert v.tokens == ("build", "take", "wall")
        assert all(v.token(v[t]) == t for t in v)

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            build_vocabulary([])

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary(["a", "a"])

    def test_file_roundtrip(self, tmp_path):
        v = Vocabulary(["u.s-mexico", "zebra", "ärger", "a b"])
        p = tmp_path / "vocab.tsv"
        v.to_file(p)
        assert p.read_text(encoding="utf-8").split("\n")[0] == "u.s-mexico\t0"
        assert Vocabulary.from_file(p) == v

    def test_digest_tracks_content(self):
        assert Vocabulary(["a", "b"]).digest() != Vocabulary(["b", "a"]).digest()


class TestChi2:
    def test_perfect_token_oracle(self):
        corpus = [["good", "x"], ["good"], ["x"], ["y"]]
        labels = [1, 1, 0, 0]
        v = build_vocabulary(corpus)
        scores = dict(zip(v.tokens, chi2_scores(corpus, labels, v)))
        assert scores["good"] == pytest.approx(4.0)
        assert chi2_select(corpus, labels, 1).tokens == ("good",)

    def test_independent_token_zero(self):
        corpus = [["t", "a"], ["b"], ["t", "c"], ["d"]]
        v = build_vocabulary(corpus)
        scores = dict(zip(v.tokens, chi2_scores(corpus, [1, 1, 0, 0], v)))
        assert scores["t"] == 0.0

    def test_k_equals_vocab_is_identity(self):
        corpus = [["a", "b"], ["c"], ["a"]]
        assert chi2_select(corpus, [1, 0, 0], 3) == build_vocabulary(corpus)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            chi2_select([["a"], ["b"]], [1, 1], 1)
        with pytest.raises(ValueError):
            chi2_select([["a"], ["b"]], [0, 2], 1)

    def test_matches_scipy_contingency(self):
        rng = random.Random(4)
        corpus = [rng.sample("abcdefghij", rng.randint(1, 6)) for _ in range(40)]
        labels = [rng.randint(0, 1) for _ in corpus]
        v = build_vocabulary(corpus)
        ours = chi2_scores(corpus, labels, v)
        for tok, score in zip(v.tokens, ours):
            a = sum(1 for d, y in zip(corpus, labels) if tok in d and y == 1)
            b = sum(1 for d, y in zip(corpus, labels) if tok in d and y == 0)
            n1, n0 = labels.count(1), labels.count(0)
            table = np.array([[a, b], [n1 - a, n0 - b]])
            if (table.sum(axis=0) == 0).any() or (table.sum(axis=1) == 0).any():
                assert score == 0.0
            else:
                assert score == pytest.approx(chi2_contingency(table, correction=False)[0])

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(tokens_st, st.integers(0, 1)), min_size=2, max_size=15), st.randoms(),
           st.integers(1, 10))
    def test_permutation_invariant_and_size(self, rows, rnd, k):
        labels = [y for _, y in rows]
        if len(set(labels)) < 2:
            labels[0] = 1 - labels[1]
        corpus = [t for t, _ in rows]
        if not any(corpus):
            corpus[0] = ["a"]
        perm = list(range(len(rows)))
        rnd.shuffle(perm)
        a = chi2_select(corpus, labels, k)
        b = chi2_select([corpus[i] for i in perm], [labels[i] for i in perm], k)
        assert a == b
        assert len(a) == min(k, len(build_vocabulary(corpus)))


class TestFrequency:
    def test_examples(self):
        assert frequency_select([["a", "b"], ["a"]], 1).tokens == ("a",)
        assert frequency_select([["a", "b"], ["a"]], 5).tokens == ("a", "b")
        assert frequency_select([["y", "x"]], 1).tokens == ("x",)

    def test_document_frequency_ignores_repeats(self):
        v = Vocabulary(["a", "b"])
        assert document_frequencies([["a", "a", "a"], ["b", "a"]], v).tolist() == [2, 1]


class TestBooleanize:
    VOCAB = Vocabulary(["build", "wall", "take"])

    def test_set_semantics(self):
        assert booleanize(["build", "wall", "wall"], self.VOCAB).features == (0, 1)

    def test_all_oov(self):
        assert booleanize(["zzz", "qqq"], self.VOCAB).features == ()

    def test_wall_sentence_literals(self):
        toks = clean_and_tokenize(WALL_SENTENCE)
        vocab = Vocabulary(["build", "wall", "u.s-mexico", "take", "years"])
        d = booleanize(toks, vocab, label=1)
        assert d.dense().tolist() == [1, 1, 1, 1, 1]
        assert literal_values(d).tolist() == [1] * 5 + [0] * 5

    @given(tokens_st, st.integers(1, 3))
    def test_idempotent_under_repetition(self, toks, times):
        v = Vocabulary(list("abcdefgh"))
        assert booleanize(toks * times, v) == booleanize(toks, v)


def test_pipeline_deterministic():
    texts = ["Shocking hoax exposed", "Senate budget hearing", "Hoax about the senate", "Budget data"]
    labels = [1, 0, 1, 0]
    outs = []
    for _ in range(2):
        pipe = TextPipeline(k=4)
        toks = pipe.tokenize(texts)
        pipe.fit(toks, labels)
        outs.append(pipe.transform(toks, labels))
    assert outs[0] == outs[1]
    assert len(pipe.vocab) == 4


def test_pipeline_requires_fit():
    with pytest.raises(RuntimeError):
        TextPipeline().transform([["a"]])
    with pytest.raises(ValueError):
        TextPipeline(selection="tfidf")
