"""Penalty-augmented greedy decoding.

Each generated review gets three kinds of log-likelihood penalty on top of the
language model's next-token distribution:

* a per-review random penalty: a Bernoulli(b) mask over the vocabulary, drawn
  once per review, adds ``lam`` to the masked tokens;
* a start penalty: a fresh Bernoulli(b) mask at every step adds ``lam * alpha**i``
  at step ``i``, so it fades out after the first few words;
* a memory penalty: every token already emitted in this review gets ``lam``.

Grammar tokens (pronouns, conjunctions, punctuation) receive half of every
penalty. Sources add when they hit the same token.

Random draws follow a fixed protocol so a review can be replayed: the review
mask is ``rng.random(n_words) < b`` drawn first, then one
``rng.random(n_words) < b`` per step. ``n_words`` covers every index except EOS,
which is never penalized.
"""

import hashlib
from dataclasses import asdict, dataclass
from importlib import resources

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .utils import (
    check_count,
    check_documents,
    check_non_positive,
    check_probability,
    check_tokens,
    item_rng,
    resolve_rng,
)

NMT_FAKE_STAR = {"b": 0.3, "lam": -5.0}


@dataclass(frozen=True)
class GenerationParams:
    b: float = 0.3
    lam: float = -5.0
    alpha: float = 2.0 / 3.0
    min_len: int = 10
    max_len: int = 50
    p_typo: float = 0.0
    p_spell: float = 0.0
    seed: int = 0

    def __post_init__(self):
        check_probability(self.b, "b")
        check_non_positive(self.lam, "lam")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        check_count(self.min_len, "min_len")
        check_count(self.max_len, "max_len", minimum=1)
        if self.min_len > self.max_len:
            raise ValueError(f"min_len ({self.min_len}) exceeds max_len ({self.max_len})")
        check_probability(self.p_typo, "p_typo")
        check_probability(self.p_spell, "p_spell")
        check_count(self.seed, "seed")

    def to_dict(self):
        return asdict(self)


class GrammarSet:
    """Tokens that only take half penalties."""

    def __init__(self, tokens):
        self.tokens = frozenset(tokens)

    def __contains__(self, token):
        return token in self.tokens

    def __len__(self):
        return len(self.tokens)

    @classmethod
    def load(cls, path=None):
        """Read one token per line; lines starting with ``"# "`` are comments.

        Defaults to the bundled list.
        """
        if path is None:
            text = resources.files("reviewforge.data").joinpath("grammar.txt").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        tokens = [
            line.strip() for line in text.splitlines()
            if line.strip() and not line.startswith("# ")
        ]
        return cls(tokens)

    def mask(self, vocabulary):
        """Boolean membership over vocabulary indices."""
        return np.array([tok in self.tokens for tok in vocabulary.tokens], dtype=bool)


def discount(logp, indices, penalty, grammar_mask):
    """Add ``penalty`` at ``indices``, halved where ``grammar_mask`` is set.

    ``indices`` may be an integer array or a boolean mask. The input is not
    modified.
    """
    if penalty > 0:
        raise ValueError(f"penalty must be <= 0, got {penalty!r}")
    out = np.array(logp, dtype=np.float64, copy=True)
    idx = np.asarray(indices)
    if idx.dtype == bool:
        idx = np.flatnonzero(idx)
    if idx.size == 0 or penalty == 0:
        return out
    idx = idx.astype(np.intp)
    out[idx] += np.where(grammar_mask[idx], penalty / 2.0, penalty)
    return out


def sample_bernoulli_mask(b, size, rng):
    """Independent Bernoulli(b) draws as a boolean vector."""
    check_probability(b, "b")
    return resolve_rng(rng).random(size) < b


def start_penalty(lam, alpha, step):
    """Start-penalty magnitude at ``step``: ``lam * alpha**step``."""
    return lam * alpha ** step


class PenaltyState:
    """Per-review decoding state.

    ``review_mask`` is drawn once at construction; ``memory`` flags every
    token emitted so far; ``step`` counts emitted tokens.
    """

    def __init__(self, n_words, b, rng):
        self.rng = resolve_rng(rng)
        self.n_words = n_words
        self.review_mask = sample_bernoulli_mask(b, n_words, self.rng)
        self.memory = np.zeros(n_words, dtype=bool)
        self.step = 0

    def record(self, index):
        if index < self.n_words:
            self.memory[index] = True
        self.step += 1

    def mask_digest(self):
        return hashlib.sha256(np.packbits(self.review_mask).tobytes()).hexdigest()[:16]


def augment(logp, params, state, grammar_mask):
    """Apply every penalty source active at the current step.

    Draws the step's start-penalty mask from ``state.rng``. Returns a new array;
    the EOS entry (last) is never penalized.
    """
    n = state.n_words
    out = np.array(logp, dtype=np.float64, copy=True)
    words = out[:n]
    gmask = grammar_mask[:n]
    start_mask = sample_bernoulli_mask(params.b, n, state.rng)
    words = discount(words, state.review_mask, params.lam, gmask)
    words = discount(words, start_mask, start_penalty(params.lam, params.alpha, state.step), gmask)
    words = discount(words, state.memory, params.lam, gmask)
    out[:n] = words
    return out


def enforce_length(logp, step, min_len, max_len):
    """Block EOS (last entry) before ``min_len`` tokens; force it at ``max_len``."""
    if min_len > max_len:
        raise ValueError(f"min_len ({min_len}) exceeds max_len ({max_len})")
    out = np.array(logp, dtype=np.float64, copy=True)
    if step < min_len:
        out[-1] = -np.inf
    if step >= max_len:
        out[:-1] = -np.inf
    return out


def generate_review(lm, context, params, grammar=None, rng=None, return_state=False,
                    suppress_unk=True):
    """Generate one review by penalized greedy decoding.

    Obfuscation is a separate pass (see ``reviewforge.obfuscation``). Returns the
    token list without EOS, plus the final ``PenaltyState`` if requested.
    """
    check_is_fitted(lm, "tables_")
    vocab = lm.vocabulary_
    grammar = GrammarSet.load() if grammar is None else grammar
    gmask = grammar.mask(vocab) if isinstance(grammar, GrammarSet) else np.asarray(grammar, dtype=bool)
    context = check_tokens(context)
    eos = vocab.eos_index
    state = PenaltyState(eos, params.b, params.seed if rng is None else rng)
    out = []
    while True:
        logp = lm.next_token_logprobs(context, out)
        logp = augment(logp, params, state, gmask)
        if suppress_unk:
            logp[vocab.unk_index] = -np.inf
        logp = enforce_length(logp, state.step, params.min_len, params.max_len)
        best = int(np.argmax(logp))
        if best == eos:
            break
        out.append(vocab.tokens[best])
        state.record(best)
    return (out, state) if return_state else out


class PenaltyDecoder(TransformerMixin, BaseEstimator):
    """Generate reviews for contexts with a fitted language model.

    ``transform`` maps an iterable of contexts to generated token lists. Review
    ``i`` uses an rng stream derived from ``(seed, i)``, so results do not depend
    on batching or ``n_jobs``.
    """

    def __init__(self, lm, b=0.3, lam=-5.0, alpha=2.0 / 3.0, min_len=10, max_len=50,
                 grammar=None, seed=0, n_jobs=1):
        self.lm = lm
        self.b = b
        self.lam = lam
        self.alpha = alpha
        self.min_len = min_len
        self.max_len = max_len
        self.grammar = grammar
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        check_is_fitted(self.lm, "tables_")
        self.params_ = GenerationParams(
            b=self.b, lam=self.lam, alpha=self.alpha,
            min_len=self.min_len, max_len=self.max_len, seed=self.seed,
        )
        grammar = self.grammar
        if grammar is None or isinstance(grammar, str):
            grammar = GrammarSet.load(grammar)
        self.grammar_ = grammar
        self.grammar_mask_ = grammar.mask(self.lm.vocabulary_)
        return self

    def _generate_one(self, index, context):
        tokens, state = generate_review(
            self.lm, context, self.params_, self.grammar_mask_,
            rng=item_rng(self.seed, index), return_state=True,
        )
        return tokens, state.mask_digest()

    def generate(self, contexts, return_digests=False):
        if not hasattr(self, "params_"):
            self.fit()
        contexts = check_documents(contexts)
        if self.n_jobs == 1 or len(contexts) < 2:
            results = [self._generate_one(i, c) for i, c in enumerate(contexts)]
        else:
            results = Parallel(n_jobs=self.n_jobs)(
                delayed(self._generate_one)(i, c) for i, c in enumerate(contexts)
            )
        reviews = [tokens for tokens, _ in results]
        if return_digests:
            return reviews, [digest for _, digest in results]
        return reviews

    def transform(self, X):
        return self.generate(X)
