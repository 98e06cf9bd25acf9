"""Conditional n-gram language model over (context, review) pairs.

Context tokens are prepended to each review, so the model's next-token
distribution depends on the context through shared n-gram histories. Only
review positions (and the final EOS) are prediction targets.

Smoothing is interpolated absolute discounting::

    p(w | h) = (c(h, w) - D) / c(h) + D * N1+(h .) / c(h) * p(w | h')

bottoming out in a discounted unigram interpolated with the uniform
distribution, so every token keeps non-zero probability.
"""

import pickle
import struct
import zlib
from collections import defaultdict

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .corpus import Vocabulary, build_vocabulary
from .exceptions import ModelFormatError, ReviewForgeError, VocabularyMismatchError
from .utils import check_count, check_documents, check_tokens

_LM_MAGIC = b"RFLM"
_LM_VERSION = 1


class NGramLM(BaseEstimator):
    """Backoff n-gram model of p(review token | context, previous tokens).

    Parameters
    ----------
    order : int, default=4
        n-gram order; histories hold ``order - 1`` tokens.
    discount : float, default=0.75
        Absolute discount, strictly between 0 and 1.
    min_frequency : int, default=10
        Vocabulary threshold used when ``vocabulary`` is not supplied.
    vocabulary : Vocabulary or None
        Prebuilt vocabulary; built from the training pairs when None.
    """

    def __init__(self, order=4, discount=0.75, min_frequency=10, vocabulary=None):
        self.order = order
        self.discount = discount
        self.min_frequency = min_frequency
        self.vocabulary = vocabulary

    def _validate_params(self):
        check_count(self.order, "order", minimum=2)
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"discount must lie in (0, 1), got {self.discount!r}")

    def fit(self, X, y):
        """Count n-grams. ``X`` holds contexts, ``y`` the aligned reviews."""
        self._validate_params()
        contexts = check_documents(X)
        reviews = check_documents(y)
        if len(contexts) != len(reviews):
            raise ValueError(f"{len(contexts)} contexts but {len(reviews)} reviews")
        if not reviews:
            raise ReviewForgeError("cannot train a language model on an empty corpus")

        vocab = self.vocabulary
        if vocab is None:
            vocab = build_vocabulary(zip(contexts, reviews), self.min_frequency)
        self.vocabulary_ = vocab
        V = len(vocab)
        eos = vocab.eos_index
        hmax = self.order - 1

        unigram = np.zeros(V)
        tables = [defaultdict(lambda: defaultdict(int)) for _ in range(hmax + 1)]
        for context, review in zip(contexts, reviews):
            ids = vocab.encode(context)
            start = len(ids)
            ids.extend(vocab.encode(review))
            ids.append(eos)
            for pos in range(start, len(ids)):
                w = ids[pos]
                unigram[w] += 1
                for hlen in range(1, min(hmax, pos) + 1):
                    tables[hlen][tuple(ids[pos - hlen:pos])][w] += 1

        self.n_targets_ = int(unigram.sum())
        D = self.discount
        seen = unigram > 0
        base = np.where(seen, unigram - D, 0.0) / self.n_targets_
        base += D * seen.sum() / self.n_targets_ / V
        self.unigram_logprob_ = np.log(base)
        self._unigram = base

        # history -> (ids, counts, total, n_types); sorted ids keep pickles stable
        self.tables_ = [None]
        for hlen in range(1, hmax + 1):
            packed = {}
            for hist in sorted(tables[hlen]):
                cont = tables[hlen][hist]
                ids = np.array(sorted(cont), dtype=np.int32)
                counts = np.array([cont[i] for i in ids], dtype=np.float64)
                packed[hist] = (ids, counts, float(counts.sum()), len(ids))
            self.tables_.append(packed)
        return self

    def _history(self, context, prefix):
        vocab = self.vocabulary_
        ids = vocab.encode(context) + vocab.encode(prefix)
        return tuple(ids[-(self.order - 1):]) if ids else ()

    def _probs_from_history(self, hist):
        D = self.discount
        probs = self._unigram.copy()
        for hlen in range(1, len(hist) + 1):
            entry = self.tables_[hlen].get(hist[len(hist) - hlen:])
            if entry is None:
                break
            ids, counts, total, n_types = entry
            probs *= D * n_types / total
            probs[ids] += (counts - D) / total
        return probs

    def next_token_logprobs(self, context, prefix=()):
        """Log-probabilities over the vocabulary (EOS last) for the next review token."""
        check_is_fitted(self, "tables_")
        return np.log(self._probs_from_history(self._history(context, prefix)))

    def perplexity(self, X, y):
        """exp of the mean negative log-probability per review token, EOS included."""
        check_is_fitted(self, "tables_")
        contexts = check_documents(X)
        reviews = check_documents(y)
        if not reviews:
            raise ReviewForgeError("cannot evaluate perplexity on an empty corpus")
        vocab = self.vocabulary_
        eos = vocab.eos_index
        nll = 0.0
        n = 0
        for context, review in zip(contexts, reviews):
            ids = vocab.encode(context)
            start = len(ids)
            ids.extend(vocab.encode(review))
            ids.append(eos)
            for pos in range(start, len(ids)):
                hist = tuple(ids[max(0, pos - self.order + 1):pos])
                nll -= np.log(self._probs_from_history(hist)[ids[pos]])
                n += 1
        return float(np.exp(nll / n))

    def score(self, X, y):
        """Negative perplexity, so that greater is better."""
        return -self.perplexity(X, y)

    def save(self, path):
        check_is_fitted(self, "tables_")
        payload = pickle.dumps(
            {
                "params": self.get_params(deep=False) | {"vocabulary": None},
                "vocabulary": (self.vocabulary_.tokens, self.vocabulary_.counts),
                "n_targets": self.n_targets_,
                "unigram": self._unigram,
                "tables": self.tables_,
            },
            protocol=4,
        )
        vocab_hash = bytes.fromhex(self.vocabulary_.hash())
        with open(path, "wb") as fh:
            fh.write(_LM_MAGIC + struct.pack("<H", _LM_VERSION) + vocab_hash)
            fh.write(zlib.compress(payload, 6))

    @classmethod
    def load(cls, path, vocabulary=None):
        """Load a saved model; if ``vocabulary`` is given it must match the embedded one."""
        with open(path, "rb") as fh:
            blob = fh.read()
        if blob[:4] != _LM_MAGIC:
            raise ModelFormatError(f"{path}: not a language model file")
        (version,) = struct.unpack("<H", blob[4:6])
        if version != _LM_VERSION:
            raise ModelFormatError(f"{path}: unsupported model version {version}")
        vocab_hash = blob[6:38].hex()
        try:
            state = pickle.loads(zlib.decompress(blob[38:]))
        except (zlib.error, pickle.UnpicklingError) as exc:
            raise ModelFormatError(f"{path}: corrupt payload") from exc
        vocab = Vocabulary(*state["vocabulary"])
        if vocab.hash() != vocab_hash:
            raise ModelFormatError(f"{path}: embedded vocabulary does not match its hash")
        if vocabulary is not None and vocabulary.hash() != vocab_hash:
            raise VocabularyMismatchError(f"{path}: model was trained with a different vocabulary")
        model = cls(**state["params"])
        model.vocabulary_ = vocab
        model.n_targets_ = state["n_targets"]
        model._unigram = state["unigram"]
        model.unigram_logprob_ = np.log(model._unigram)
        model.tables_ = state["tables"]
        return model


def greedy_decode(lm, context, max_len=50, min_len=0, suppress_unk=True):
    """Unpenalized greedy decoding: take the argmax token until EOS or ``max_len``.

    Ties go to the lowest vocabulary index. EOS is blocked before ``min_len``
    tokens; UNK is never emitted when ``suppress_unk`` is set.
    """
    check_is_fitted(lm, "tables_")
    context = check_tokens(context)
    vocab = lm.vocabulary_
    eos = vocab.eos_index
    out = []
    while len(out) < max_len:
        logp = lm.next_token_logprobs(context, out)
        if suppress_unk:
            logp[vocab.unk_index] = -np.inf
        if len(out) < min_len:
            logp[eos] = -np.inf
        best = int(np.argmax(logp))
        if best == eos:
            break
        out.append(vocab.tokens[best])
    return out
