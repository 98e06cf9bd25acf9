"""Human-like error injection: common misspellings and keyboard typos."""

import json
import string
from importlib import resources

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .utils import check_documents, check_probability, check_tokens, item_rng, resolve_rng

QWERTY_ROWS = ("qwertyuiop", "asdfghjkl", "zxcvbnm")
ALPHABET = string.ascii_lowercase


def is_word(token):
    return any(ch.isalpha() for ch in token)


class SpellingRuleSet:
    """Ordered (correct, misspelled) pairs; the first rule for a word wins."""

    def __init__(self, rules):
        self.rules = []
        self._lookup = {}
        for correct, wrong in rules:
            if correct == wrong:
                raise ValueError(f"rule maps {correct!r} to itself")
            if len(correct.split()) != 1 or len(wrong.split()) != 1:
                raise ValueError(f"rule forms must be single tokens: {correct!r} -> {wrong!r}")
            self.rules.append((correct, wrong))
            self._lookup.setdefault(correct.lower(), wrong)

    def __len__(self):
        return len(self.rules)

    def get(self, word):
        return self._lookup.get(word.lower())

    @classmethod
    def load(cls, path=None):
        """Read ``correct<TAB>misspelled`` lines; defaults to the bundled rules."""
        if path is None:
            text = resources.files("reviewforge.data").joinpath("spelling_rules.tsv").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        rules = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"rules line {lineno}: expected 'correct<TAB>misspelled'")
            rules.append((parts[0].strip(), parts[1].strip()))
        return cls(rules)


class KeyboardWeights:
    """Costs of single character edits.

    Substitution costs are looked up per (source, target) pair, falling back to
    ``default_substitution``.
    """

    def __init__(self, substitution, default_substitution=2.0, insertion=1.5,
                 deletion=1.5, transposition=1.2):
        self.substitution = {a: dict(row) for a, row in substitution.items()}
        self.default_substitution = float(default_substitution)
        self.insertion = float(insertion)
        self.deletion = float(deletion)
        self.transposition = float(transposition)
        costs = [self.default_substitution, self.insertion, self.deletion, self.transposition]
        costs += [c for row in self.substitution.values() for c in row.values()]
        if min(costs) <= 0:
            raise ValueError("edit costs must be positive")

    def substitution_cost(self, a, b):
        return self.substitution.get(a.lower(), {}).get(b.lower(), self.default_substitution)

    @classmethod
    def qwerty(cls, adjacent=1.0, distant=2.0, insertion=1.5, deletion=1.5, transposition=1.2):
        """Adjacency on a staggered QWERTY layout: same-row neighbours plus the
        two touching keys in the rows above and below."""
        pos = {ch: (r, c) for r, row in enumerate(QWERTY_ROWS) for c, ch in enumerate(row)}
        sub = {}
        for ch, (r, c) in pos.items():
            near = [(r, c - 1), (r, c + 1), (r - 1, c), (r - 1, c + 1), (r + 1, c - 1), (r + 1, c)]
            row = {}
            for rr, cc in near:
                if 0 <= rr < len(QWERTY_ROWS) and 0 <= cc < len(QWERTY_ROWS[rr]):
                    row[QWERTY_ROWS[rr][cc]] = adjacent
            sub[ch] = dict(sorted(row.items()))
        return cls(sub, distant, insertion, deletion, transposition)

    def to_dict(self):
        return {
            "insertion": self.insertion,
            "deletion": self.deletion,
            "transposition": self.transposition,
            "default_substitution": self.default_substitution,
            "substitution": self.substitution,
        }

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path=None):
        if path is None:
            text = resources.files("reviewforge.data").joinpath("keyboard_weights.json").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        data = json.loads(text)
        return cls(
            data.get("substitution", {}),
            data.get("default_substitution", 2.0),
            data.get("insertion", 1.5),
            data.get("deletion", 1.5),
            data.get("transposition", 1.2),
        )


def apply_spelling_rule(word, rules, rng=None):
    """Misspell ``word`` if a rule covers it, keeping the case of the first letter."""
    wrong = rules.get(word)
    if wrong is None:
        return word
    if word[:1].isupper():
        return wrong[:1].upper() + wrong[1:]
    return wrong


def typo_candidates(word, weights):
    """All strings one edit away from ``word``, mapped to their cheapest edit cost."""
    cands = {}

    def add(cand, cost):
        if cand != word and cost < cands.get(cand, np.inf):
            cands[cand] = cost

    for i in range(len(word)):
        add(word[:i] + word[i + 1:], weights.deletion)
    for i in range(len(word) + 1):
        for ch in ALPHABET:
            add(word[:i] + ch + word[i:], weights.insertion)
    for i, src in enumerate(word):
        for ch in ALPHABET:
            if ch != src:
                add(word[:i] + ch + word[i + 1:], weights.substitution_cost(src, ch))
    for i in range(len(word) - 1):
        if word[i] != word[i + 1]:
            add(word[:i] + word[i + 1] + word[i] + word[i + 2:], weights.transposition)
    return cands


def typo_distribution(word, weights, dictionary=(), real_word_bonus=10.0):
    """Candidates and their sampling probabilities.

    Weight is the inverse edit cost, multiplied by ``real_word_bonus`` for
    candidates found in ``dictionary``.
    """
    cands = typo_candidates(word, weights)
    words = list(cands)
    w = np.array([
        (real_word_bonus if cand.lower() in dictionary else 1.0) / cands[cand] for cand in words
    ])
    return words, w / w.sum()


def inject_typo(word, weights, dictionary=(), rng=None, real_word_bonus=10.0):
    """Replace ``word`` with a random single-edit neighbour.

    Words shorter than two characters come back unchanged.
    """
    if len(word) < 2:
        return word
    rng = resolve_rng(rng)
    words, probs = typo_distribution(word, weights, dictionary, real_word_bonus)
    k = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    return words[min(k, len(words) - 1)]


def obfuscate(review, p_typo, p_spell, rules, weights, dictionary=(), rng=None,
              real_word_bonus=10.0):
    """Per word token: apply a spelling rule with probability ``p_spell`` (when one
    matches), otherwise inject a typo with probability ``p_typo``.

    Non-word tokens pass through. Two uniforms are drawn for every word token,
    whether or not they are used, so streams stay aligned across settings.
    """
    check_probability(p_typo, "p_typo")
    check_probability(p_spell, "p_spell")
    rng = resolve_rng(rng)
    out = []
    for tok in check_tokens(review):
        if not is_word(tok):
            out.append(tok)
            continue
        u_spell, u_typo = rng.random(2)
        if u_spell < p_spell and rules.get(tok) is not None:
            out.append(apply_spelling_rule(tok, rules))
        elif u_typo < p_typo and len(tok) >= 2:
            out.append(inject_typo(tok, weights, dictionary, rng, real_word_bonus))
        else:
            out.append(tok)
    return out


class Obfuscator(TransformerMixin, BaseEstimator):
    """Transformer adding misspellings and typos to tokenized reviews.

    ``fit`` collects the real-word dictionary used to favour typos that land on
    existing words: the ``dictionary`` parameter if given (an iterable of words
    or a ``Vocabulary``), otherwise every word token seen in ``X``.
    """

    def __init__(self, p_typo=0.01, p_spell=0.01, rules=None, weights=None,
                 dictionary=None, real_word_bonus=10.0, seed=0):
        self.p_typo = p_typo
        self.p_spell = p_spell
        self.rules = rules
        self.weights = weights
        self.dictionary = dictionary
        self.real_word_bonus = real_word_bonus
        self.seed = seed

    def fit(self, X=None, y=None):
        check_probability(self.p_typo, "p_typo")
        check_probability(self.p_spell, "p_spell")
        rules = self.rules
        self.rules_ = rules if isinstance(rules, SpellingRuleSet) else SpellingRuleSet.load(rules)
        weights = self.weights
        self.weights_ = weights if isinstance(weights, KeyboardWeights) else KeyboardWeights.load(weights)
        if self.dictionary is not None:
            words = self.dictionary.words() if hasattr(self.dictionary, "words") else self.dictionary
        elif X is not None:
            words = (tok for doc in check_documents(X) for tok in doc)
        else:
            words = ()
        self.dictionary_ = frozenset(w.lower() for w in words if is_word(w))
        return self

    def transform(self, X):
        if not hasattr(self, "rules_"):
            self.fit()
        return [
            obfuscate(doc, self.p_typo, self.p_spell, self.rules_, self.weights_,
                      self.dictionary_, item_rng(self.seed, i), self.real_word_bonus)
            for i, doc in enumerate(check_documents(X))
        ]
