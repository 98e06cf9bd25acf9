from collections import Counter

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import FeatureSpaceMismatchError
from ..utils import check_count, check_documents, check_tokens, sha256_hex
from .pos import TAGSET, pos_tag
from .readability import READABILITY_FEATURES, readability_scores

FEATURE_GROUPS = ("readability", "pos_unigrams", "pos_ngrams", "word_unigrams", "char_ngrams")
DEFAULT_GROUPS = ("readability", "pos_unigrams", "pos_ngrams", "word_unigrams")


def ngrams(seq, n):
    return [tuple(seq[i:i + n]) for i in range(len(seq) - n + 1)]


def char_ngrams(text, n):
    """Overlapping character n-grams: ``char_ngrams("aaaa", 3) == ["aaa", "aaa"]``."""
    return [text[i:i + n] for i in range(len(text) - n + 1)]


def _group_counts(group, tokens, tags, pos_range, char_range):
    """Counter of feature keys for one fitted n-gram group."""
    if group == "word_unigrams":
        return Counter(tokens)
    if group == "pos_ngrams":
        lo, hi = pos_range
        return Counter(" ".join(g) for n in range(lo, hi + 1) for g in ngrams(tags, n))
    if group == "char_ngrams":
        text = " ".join(tokens)
        lo, hi = char_range
        return Counter(g for n in range(lo, hi + 1) for g in char_ngrams(text, n))
    raise ValueError(group)


class ReviewFeaturizer(TransformerMixin, BaseEstimator):
    """Stylometric feature matrix for tokenized reviews.

    Groups, in column order:

    ``readability``
        13 dense readability metrics.
    ``pos_unigrams``
        Counts of each tag in the fixed coarse tag set.
    ``pos_ngrams``
        Counts of tag n-grams for n in ``pos_ngram_range``.
    ``word_unigrams``
        Token counts.
    ``char_ngrams``
        Overlapping character n-gram counts over the space-joined tokens.

    The n-gram groups learn their columns in ``fit``: keys with document
    frequency of at least ``min_df``, capped at the ``max_features`` most
    frequent per group (ties broken by key). Keys unseen at fit time are ignored
    by ``transform``.

    Attributes
    ----------
    feature_names_ : list of str
        ``"<group>:<key>"`` per column.
    group_slices_ : dict of str to slice
    space_hash_ : str
        Digest of the column layout, used to pair models with feature spaces.
    """

    def __init__(self, groups=DEFAULT_GROUPS, pos_ngram_range=(1, 4), char_ngram_range=(1, 3),
                 min_df=2, max_features=2000):
        self.groups = groups
        self.pos_ngram_range = pos_ngram_range
        self.char_ngram_range = char_ngram_range
        self.min_df = min_df
        self.max_features = max_features

    def _check_params(self):
        groups = tuple(self.groups)
        unknown = set(groups) - set(FEATURE_GROUPS)
        if unknown or not groups:
            raise ValueError(f"groups must be a non-empty subset of {FEATURE_GROUPS}, got {groups}")
        check_count(self.min_df, "min_df", minimum=1)
        if self.max_features is not None:
            check_count(self.max_features, "max_features", minimum=1)
        # keep canonical column order regardless of how groups were listed
        return tuple(g for g in FEATURE_GROUPS if g in groups)

    def _analyze(self, tokens):
        tags = pos_tag(tokens) if ("pos_unigrams" in self.groups_ or "pos_ngrams" in self.groups_) else None
        counts = {
            g: _group_counts(g, tokens, tags, self.pos_ngram_range, self.char_ngram_range)
            for g in self.groups_ if g in ("pos_ngrams", "word_unigrams", "char_ngrams")
        }
        return tags, counts

    def fit(self, X, y=None):
        self.groups_ = self._check_params()
        docs = check_documents(X)
        df = {g: Counter() for g in self.groups_}
        for tokens in docs:
            _, counts = self._analyze(tokens)
            for g, c in counts.items():
                df[g].update(c.keys())

        names = []
        self.group_slices_ = {}
        self.vocabularies_ = {}
        for g in self.groups_:
            start = len(names)
            if g == "readability":
                keys = list(READABILITY_FEATURES)
            elif g == "pos_unigrams":
                keys = list(TAGSET)
            else:
                kept = [(k, n) for k, n in df[g].items() if n >= self.min_df]
                kept.sort(key=lambda kv: (-kv[1], kv[0]))
                if self.max_features is not None:
                    kept = kept[:self.max_features]
                keys = sorted(k for k, _ in kept)
                self.vocabularies_[g] = {k: i for i, k in enumerate(keys)}
            names.extend(f"{g}:{k}" for k in keys)
            self.group_slices_[g] = slice(start, len(names))
        self.feature_names_ = names
        self.n_features_out_ = len(names)
        self.space_hash_ = sha256_hex("\n".join(names), repr(self.get_params()))
        return self

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_")
        return np.array(self.feature_names_, dtype=object)

    def transform(self, X):
        check_is_fitted(self, "feature_names_")
        docs = check_documents(X)
        rows, cols, vals = [], [], []
        for r, tokens in enumerate(docs):
            tags, counts = self._analyze(tokens)
            for g in self.groups_:
                off = self.group_slices_[g].start
                if g == "readability":
                    if tokens:
                        scores = readability_scores(tokens)
                    else:
                        scores = np.zeros(len(READABILITY_FEATURES))
                    for j, v in enumerate(scores):
                        if v != 0:
                            rows.append(r)
                            cols.append(off + j)
                            vals.append(float(v))
                elif g == "pos_unigrams":
                    for tag, n in sorted(Counter(tags).items()):
                        rows.append(r)
                        cols.append(off + TAGSET.index(tag))
                        vals.append(float(n))
                else:
                    vocab = self.vocabularies_[g]
                    for key, n in counts[g].items():
                        j = vocab.get(key)
                        if j is not None:
                            rows.append(r)
                            cols.append(off + j)
                            vals.append(float(n))
        X_out = sp.csr_matrix((vals, (rows, cols)), shape=(len(docs), self.n_features_out_))
        X_out.sum_duplicates()
        X_out.sort_indices()
        return X_out


def extract_features(review, featurizer):
    """Feature row (1 x n_features CSR) for a single tokenized review."""
    return featurizer.transform([check_tokens(review)])


def check_space(featurizer, expected_hash):
    check_is_fitted(featurizer, "space_hash_")
    if featurizer.space_hash_ != expected_hash:
        raise FeatureSpaceMismatchError(
            f"feature space {featurizer.space_hash_[:12]} does not match model's {expected_hash[:12]}"
        )
