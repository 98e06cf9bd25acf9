import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reviewforge.exceptions import FeatureSpaceMismatchError
from reviewforge.features import (
    READABILITY_FEATURES,
    SCALE_INVARIANT,
    TAGSET,
    ReviewFeaturizer,
    char_ngrams,
    check_space,
    count_syllables,
    extract_features,
    pos_tag,
    readability_scores,
)
from reviewforge.features.pos import LEXICON, SUFFIX_RULES

ARI = READABILITY_FEATURES.index("automated_readability_index")

sentences = st.lists(
    st.sampled_from(["the", "food", "was", "absolutely", "delicious", "i", "will", "return",
                     "service", "slow", ",", "unbelievably", "ok", "5", "stars"]),
    min_size=1, max_size=12,
).map(lambda words: words + [".", "!", "?"][len(words) % 3:len(words) % 3 + 1])
reviews = st.lists(sentences, min_size=1, max_size=5).map(lambda ss: [t for s in ss for t in s])


class TestReadability:
    def test_ari_hand_counted(self):
        tokens = "the cat sat on the mat .".split()
        chars, words, sents = 3 + 3 + 3 + 2 + 3 + 3, 6, 1
        expected = 4.71 * chars / words + 0.5 * words / sents - 21.43
        assert abs(readability_scores(tokens)[ARI] - expected) <= 1e-9

    def test_ari_two_sentences(self):
        tokens = "great burgers ! we loved the fries .".split()
        chars, words, sents = 5 + 7 + 2 + 5 + 3 + 5, 6, 2
        expected = 4.71 * chars / words + 0.5 * words / sents - 21.43
        assert abs(readability_scores(tokens)[ARI] - expected) <= 1e-9

    def test_flesch_hand_counted(self):
        # vowel groups: great 1, burgers 2, we 1, loved 2 (no silent e before d), the 1, fries 1
        tokens = "great burgers ! we loved the fries .".split()
        fre = 206.835 - 1.015 * 3 - 84.6 * 8 / 6
        assert abs(readability_scores(tokens)[1] - fre) <= 1e-9

    @given(reviews)
    def test_duplication_invariance(self, tokens):
        once = readability_scores(tokens)
        twice = readability_scores(tokens + tokens)
        idx = [READABILITY_FEATURES.index(n) for n in SCALE_INVARIANT]
        np.testing.assert_allclose(twice[idx], once[idx], rtol=1e-12, atol=1e-12)

    def test_type_token_ratio_is_length_dependent(self):
        tokens = "good food .".split()
        ttr = READABILITY_FEATURES.index("type_token_ratio")
        assert readability_scores(tokens + tokens)[ttr] == readability_scores(tokens)[ttr] / 2

    @pytest.mark.parametrize("tokens", [["wow"], ["."], ["!", "!"], ["5"]])
    def test_degenerate_inputs_finite(self, tokens):
        scores = readability_scores(tokens)
        assert scores.shape == (13,) and np.all(np.isfinite(scores))

    def test_empty(self):
        with pytest.raises(ValueError):
            readability_scores([])

    @pytest.mark.parametrize("word,n", [
        ("the", 1), ("cake", 1), ("table", 2), ("banana", 3), ("free", 1), ("rhythm", 1),
        ("delicious", 3), ("x", 1),
    ])
    def test_syllables(self, word, n):
        assert count_syllables(word) == n


class TestPosTagger:
    def test_examples(self):
        assert pos_tag(["."]) == ["PUNCT"]
        assert "running" not in LEXICON
        assert pos_tag(["running"]) == ["VERB"]

    def test_suffix_table(self):
        # first matching suffix wins, so "zzzzest" is ADJ via -est
        for suffix, _ in SUFFIX_RULES:
            word = "zzzz" + suffix
            expected = next(t for s, t in SUFFIX_RULES if word.endswith(s))
            assert pos_tag([word]) == [expected]

    @given(st.lists(st.text(min_size=1, max_size=8), max_size=20))
    def test_total_and_deterministic(self, tokens):
        tags = pos_tag(tokens)
        assert len(tags) == len(tokens)
        assert set(tags) <= set(TAGSET)
        assert tags == pos_tag(tokens)

    def test_tagset_size(self):
        assert len(TAGSET) == 17


DOCS = [
    "good good .".split(),
    "the food was good .".split(),
    "the service was slow !".split(),
    "i liked the food and the service .".split(),
]


def brute_counts(doc, groups, pos_range=(1, 4), char_range=(1, 3)):
    """Feature counts by direct enumeration, keyed like the featurizer's names."""
    feats = Counter()
    tags = pos_tag(doc)
    if "pos_unigrams" in groups:
        for t in tags:
            feats["pos_unigrams:" + t] += 1
    if "pos_ngrams" in groups:
        for n in range(pos_range[0], pos_range[1] + 1):
            for i in range(len(tags) - n + 1):
                feats["pos_ngrams:" + " ".join(tags[i:i + n])] += 1
    if "word_unigrams" in groups:
        for w in doc:
            feats["word_unigrams:" + w] += 1
    if "char_ngrams" in groups:
        text = " ".join(doc)
        for n in range(char_range[0], char_range[1] + 1):
            for i in range(len(text) - n + 1):
                feats["char_ngrams:" + text[i:i + n]] += 1
    return feats


class TestFeaturizer:
    def test_word_counts(self):
        fz = ReviewFeaturizer(groups=("word_unigrams",), min_df=1).fit(DOCS)
        row = extract_features("good good .", fz).toarray().ravel()
        names = list(fz.feature_names_)
        assert row[names.index("word_unigrams:good")] == 2
        assert row[names.index("word_unigrams:.")] == 1

    def test_overlapping_char_ngrams(self):
        assert char_ngrams("aaaa", 3).count("aaa") == 2
        fz = ReviewFeaturizer(groups=("char_ngrams",), min_df=1).fit([["aaaa"]])
        row = fz.transform([["aaaa"]]).toarray().ravel()
        assert row[list(fz.feature_names_).index("char_ngrams:aaa")] == 2

    @pytest.mark.parametrize("groups", [
        ("pos_unigrams", "pos_ngrams", "word_unigrams"),
        ("char_ngrams",),
        ("readability", "pos_unigrams", "pos_ngrams", "word_unigrams", "char_ngrams"),
    ])
    def test_matches_brute_force(self, groups):
        fz = ReviewFeaturizer(groups=groups, min_df=1, max_features=None).fit(DOCS)
        X = fz.transform(DOCS).toarray()
        names = list(fz.feature_names_)
        for doc, row in zip(DOCS, X):
            expected = brute_counts(doc, groups)
            for name, count in expected.items():
                assert row[names.index(name)] == count
            n_ngram = sum(1 for nm in names if not nm.startswith("readability:"))
            got = {nm: v for nm, v in zip(names, row) if v and not nm.startswith("readability:")}
            assert got == {k: v for k, v in expected.items() if v}
            assert len(names) - n_ngram == (13 if "readability" in groups else 0)
            if "readability" in groups:
                np.testing.assert_array_equal(row[fz.group_slices_["readability"]], readability_scores(doc))

    def test_unseen_features_ignored(self):
        fz = ReviewFeaturizer(groups=("word_unigrams",), min_df=1).fit(DOCS)
        row = fz.transform([["zebra", "good"]]).toarray().ravel()
        assert row.sum() == 1

    def test_min_df_and_cap(self):
        fz = ReviewFeaturizer(groups=("word_unigrams",), min_df=2, max_features=2).fit(DOCS)
        # document frequencies: the 3, . 3, food 2, good 2, was 2, service 2
        assert fz.feature_names_ == ["word_unigrams:.", "word_unigrams:the"]

    def test_canonical_group_order_and_hash(self):
        a = ReviewFeaturizer(groups=("word_unigrams", "readability"), min_df=1).fit(DOCS)
        b = ReviewFeaturizer(groups=("readability", "word_unigrams"), min_df=1).fit(DOCS)
        assert a.feature_names_ == b.feature_names_
        assert a.feature_names_[0].startswith("readability:")
        check_space(a, a.space_hash_)
        c = ReviewFeaturizer(groups=("readability",)).fit(DOCS)
        with pytest.raises(FeatureSpaceMismatchError):
            check_space(c, a.space_hash_)

    def test_deterministic(self):
        a = ReviewFeaturizer().fit(DOCS)
        b = ReviewFeaturizer().fit(list(DOCS))
        assert a.space_hash_ == b.space_hash_
        assert (a.transform(DOCS) != b.transform(DOCS)).nnz == 0

    def test_bad_groups(self):
        with pytest.raises(ValueError):
            ReviewFeaturizer(groups=("liwc",)).fit(DOCS)

    def test_values_finite(self):
        X = ReviewFeaturizer().fit(DOCS).transform(DOCS + [[]])
        assert np.all(np.isfinite(X.data))
        assert X.shape[0] == 5
        assert math.isfinite(X.sum())
