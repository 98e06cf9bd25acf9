"""Readability metrics over tokenized reviews.

Sentences end at runs of ``.``, ``!`` or ``?`` tokens (a trailing unterminated
run of words counts as one more sentence). Words are tokens containing a
letter or digit; their letters and digits are the character count. All
denominators are floored at one.
"""

import math
import re

import numpy as np

from ..utils import check_tokens

READABILITY_FEATURES = (
    "automated_readability_index",
    "flesch_reading_ease",
    "flesch_kincaid_grade",
    "gunning_fog",
    "smog",
    "coleman_liau",
    "lix",
    "rix",
    "dale_chall_approx",
    "avg_sentence_length",
    "avg_word_length",
    "avg_syllables_per_word",
    "type_token_ratio",
)

# type_token_ratio depends on text length; the rest are ratios of totals
SCALE_INVARIANT = READABILITY_FEATURES[:-1]

_TERMINATORS = frozenset(".!?")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")


def count_syllables(word):
    """Vowel groups, minus one for a silent final ``e``; at least one."""
    word = "".join(ch for ch in word.lower() if ch.isalpha())
    if not word:
        return 1
    n = len(_VOWEL_GROUP.findall(word))
    if word.endswith("e") and not word.endswith(("le", "ee")) and n > 1:
        n -= 1
    return max(n, 1)


def text_counts(tokens):
    """Raw counts the metrics are built from."""
    tokens = check_tokens(tokens)
    words = [t for t in tokens if any(ch.isalnum() for ch in t)]
    sentences = 0
    pending = False
    for tok in tokens:
        if tok in _TERMINATORS:
            if pending:
                sentences += 1
                pending = False
        elif any(ch.isalnum() for ch in tok):
            pending = True
    if pending:
        sentences += 1
    syllables = [count_syllables(w) for w in words]
    return {
        "words": len(words),
        "sentences": sentences,
        "chars": sum(sum(ch.isalnum() for ch in w) for w in words),
        "syllables": sum(syllables),
        "polysyllables": sum(s >= 3 for s in syllables),
        "long_words": sum(sum(ch.isalnum() for ch in w) > 6 for w in words),
        "types": len(set(words)),
    }


def readability_scores(tokens):
    """The 13 metrics named in ``READABILITY_FEATURES``, in that order."""
    tokens = check_tokens(tokens)
    if not tokens:
        raise ValueError("readability of an empty review is undefined")
    c = text_counts(tokens)
    W = max(c["words"], 1)
    S = max(c["sentences"], 1)
    wps = W / S
    cpw = c["chars"] / W
    spw = c["syllables"] / W
    poly = c["polysyllables"]
    pct_difficult = 100.0 * poly / W
    dale = 0.1579 * pct_difficult + 0.0496 * wps + (3.6365 if pct_difficult > 5.0 else 0.0)
    return np.array([
        4.71 * cpw + 0.5 * wps - 21.43,
        206.835 - 1.015 * wps - 84.6 * spw,
        0.39 * wps + 11.8 * spw - 15.59,
        0.4 * (wps + 100.0 * poly / W),
        1.043 * math.sqrt(poly * 30.0 / S) + 3.1291,
        0.0588 * (100.0 * cpw) - 0.296 * (100.0 * S / W) - 15.8,
        wps + 100.0 * c["long_words"] / W,
        c["long_words"] / S,
        dale,
        wps,
        cpw,
        spw,
        c["types"] / W,
    ])
