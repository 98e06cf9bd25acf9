"""Input validation helpers used by the estimators."""

import hashlib
import numbers

import numpy as np


def check_probability(value, name):
    if not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")
    return float(value)


def check_non_positive(value, name):
    if not isinstance(value, numbers.Real) or value > 0 or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real <= 0, got {value!r}")
    return float(value)


def check_count(value, name, minimum=0):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_tokens(doc):
    """Coerce a document into a list of string tokens.

    Accepts a whitespace-tokenized string, any iterable of strings, or an object
    exposing a ``tokens`` attribute (``Context``).
    """
    if hasattr(doc, "tokens"):
        return list(doc.tokens)
    if isinstance(doc, str):
        return doc.split()
    tokens = list(doc)
    for tok in tokens:
        if not isinstance(tok, str):
            raise TypeError(f"tokens must be strings, got {type(tok).__name__}")
    return tokens


def check_documents(X):
    if isinstance(X, str):
        raise TypeError("expected a sequence of documents, got a single string")
    return [check_tokens(doc) for doc in X]


def resolve_rng(seed):
    """Return a numpy Generator; ints and SeedSequences are wrapped, Generators passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def item_rng(seed, index):
    """Independent stream for item ``index`` of a batch seeded with ``seed``.

    Streams depend only on (seed, index) so batches can be split across workers
    without changing any output.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def sha256_hex(*parts):
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, str):
            part = part.encode("utf-8")
        h.update(part)
        h.update(b"\x00")
    return h.hexdigest()
