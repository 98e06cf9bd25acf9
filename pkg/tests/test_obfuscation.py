import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reviewforge.obfuscation import (
    KeyboardWeights,
    Obfuscator,
    SpellingRuleSet,
    apply_spelling_rule,
    inject_typo,
    obfuscate,
    typo_candidates,
    typo_distribution,
)

RULES = SpellingRuleSet.load()
WEIGHTS = KeyboardWeights.qwerty()


def brute_single_edits(word, weights):
    """Every one-edit neighbour with its cheapest cost, enumerated separately per edit kind."""
    letters = "abcdefghijklmnopqrstuvwxyz"
    found = {}

    def keep(cand, cost):
        if cand == word:
            return
        found[cand] = min(cost, found.get(cand, float("inf")))

    for i in range(len(word)):
        keep(word[:i] + word[i + 1:], weights.deletion)
        for ch in letters:
            if ch != word[i]:
                keep(word[:i] + ch + word[i + 1:], weights.substitution_cost(word[i], ch))
    for i in range(len(word) + 1):
        for ch in letters:
            keep(word[:i] + ch + word[i:], weights.insertion)
    for i in range(len(word) - 1):
        swapped = list(word)
        swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
        keep("".join(swapped), weights.transposition)
    return found


class TestRules:
    def test_bundled_count_and_content(self):
        assert len(RULES) >= 80
        assert RULES.get("definitely") == "definately"

    def test_apply(self):
        assert apply_spelling_rule("definitely", RULES) == "definately"
        assert apply_spelling_rule("Definitely", RULES) == "Definately"
        assert apply_spelling_rule("burger", RULES) == "burger"

    def test_self_mapping_rejected(self):
        with pytest.raises(ValueError):
            SpellingRuleSet([("a", "a")])

    def test_file_format(self, tmp_path):
        (tmp_path / "r.tsv").write_text("# c\nrecieve\trecieve2\nbad line\n")
        with pytest.raises(ValueError, match="line 3"):
            SpellingRuleSet.load(tmp_path / "r.tsv")


class TestKeyboard:
    def test_adjacent_cheaper(self):
        assert WEIGHTS.substitution_cost("f", "g") == 1.0
        assert WEIGHTS.substitution_cost("f", "p") == 2.0
        assert WEIGHTS.substitution_cost("q", "a") == 1.0

    def test_positive_costs(self):
        with pytest.raises(ValueError):
            KeyboardWeights({}, insertion=0.0)

    def test_bundled_file_is_qwerty(self, tmp_path):
        assert KeyboardWeights.load().to_dict() == WEIGHTS.to_dict()
        WEIGHTS.save(tmp_path / "w.json")
        assert json.loads((tmp_path / "w.json").read_text())["transposition"] == 1.2


class TestTypos:
    @pytest.mark.parametrize("word", ["food", "ab", "pizza", "aa"])
    def test_candidates_match_enumeration(self, word):
        assert typo_candidates(word, WEIGHTS) == brute_single_edits(word, WEIGHTS)

    def test_sampling_distribution(self):
        dictionary = {"good", "foot", "fool", "mood", "hood", "fold", "ford", "wood"}
        words, probs = typo_distribution("food", WEIGHTS, dictionary, 10.0)
        p = dict(zip(words, probs))
        assert p["good"] > p["fokd"] and p["foot"] > p["fokd"]
        rng = np.random.default_rng(0)
        n = 10000
        draws = Counter(inject_typo("food", WEIGHTS, dictionary, rng) for _ in range(n))
        for cand in ("good", "foot", "fold"):
            sigma = np.sqrt(p[cand] * (1 - p[cand]) / n)
            assert abs(draws[cand] / n - p[cand]) <= 4 * sigma
        real = sum(p[w] for w in dictionary if w in p)
        assert abs(sum(draws[w] for w in dictionary) / n - real) <= 4 * np.sqrt(real * (1 - real) / n)

    def test_weights_inverse_cost(self):
        cands = typo_candidates("food", WEIGHTS)
        words, probs = typo_distribution("food", WEIGHTS, (), 10.0)
        inv = np.array([1.0 / cands[w] for w in words])
        np.testing.assert_allclose(probs, inv / inv.sum(), rtol=1e-12)

    def test_short_word_unchanged(self):
        assert inject_typo("a", WEIGHTS, (), np.random.default_rng(0)) == "a"

    def test_seeded(self):
        a = [inject_typo("burger", WEIGHTS, (), np.random.default_rng(s)) for s in range(20)]
        b = [inject_typo("burger", WEIGHTS, (), np.random.default_rng(s)) for s in range(20)]
        assert a == b

    @given(st.text("abcdefghijklmnopqrstuvwxyz", min_size=2, max_size=8), st.integers(0, 2**16))
    @settings(max_examples=50)
    def test_single_edit(self, word, seed):
        out = inject_typo(word, WEIGHTS, (), np.random.default_rng(seed))
        assert out != word
        assert out in brute_single_edits(word, WEIGHTS)


WORDS = ["the", "food", "was", "definitely", "great", ",", "and", "the", "staff", "!"]


class TestObfuscate:
    @given(st.lists(st.sampled_from(WORDS + ["a", "'", "5"]), max_size=30), st.integers(0, 2**16))
    def test_zero_probability_identity(self, review, seed):
        assert obfuscate(review, 0.0, 0.0, RULES, WEIGHTS, (), np.random.default_rng(seed)) == review

    @given(st.lists(st.sampled_from(WORDS), max_size=30), st.floats(0, 1), st.floats(0, 1),
           st.integers(0, 2**16))
    @settings(max_examples=50)
    def test_count_and_punctuation_preserved(self, review, p_typo, p_spell, seed):
        out = obfuscate(review, p_typo, p_spell, RULES, WEIGHTS, (), np.random.default_rng(seed))
        assert len(out) == len(review)
        for a, b in zip(review, out):
            if a in {",", "!"}:
                assert a == b
            elif a != b:
                assert b == RULES.get(a) or b in brute_single_edits(a, WEIGHTS)

    def test_forced_spelling(self):
        out = obfuscate(["i", "definitely", "liked", "it"], 0.0, 1.0, RULES, WEIGHTS, (),
                        np.random.default_rng(0))
        assert out == ["i", "definately", "liked", "it"]

    def test_typo_rate(self):
        review = ["burger", "fries", "salad"] * 3334
        out = obfuscate(review, 0.05, 0.0, RULES, WEIGHTS, (), np.random.default_rng(1))
        frac = np.mean([a != b for a, b in zip(review, out)])
        assert abs(frac - 0.05) <= 0.01

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            obfuscate(["x"], 1.5, 0.0, RULES, WEIGHTS)


class TestObfuscator:
    def test_dictionary_from_fit_data(self):
        obf = Obfuscator().fit([["good", "food", "!"]])
        assert obf.dictionary_ == frozenset({"good", "food"})

    def test_per_review_streams(self):
        docs = [["the", "burger", "was", "great"]] * 6
        obf = Obfuscator(p_typo=0.5, seed=2).fit(docs)
        full = obf.transform(docs)
        assert obf.transform(docs[:3]) == full[:3]
        assert full == Obfuscator(p_typo=0.5, seed=2).fit(docs).transform(docs)

    def test_estimator_params(self):
        assert Obfuscator(p_typo=0.2).get_params()["p_typo"] == 0.2
