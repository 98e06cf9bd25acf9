"""Review ingestion: cleaning, context construction, splits and vocabulary.

Reviews and their business metadata are turned into aligned
(context, review) token sequences. Both sides share a single vocabulary.
"""

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import IngestionError, ReviewForgeError
from .utils import check_count, check_tokens, sha256_hex

UNK = "<unk>"
EOS = "</s>"

DEFAULT_FIELD_MAP = {
    "review_text": "text",
    "rating": "stars",
    "business_name": "name",
    "city": "city",
    "state": "state",
    "tags": "categories",
}

_PRINTABLE = re.compile(r"[^\x20-\x7e]")
_WHITESPACE = re.compile(r"\s+")
_PUNCT = re.compile(r"([^A-Za-z0-9 ])")


def clean_text(raw, lowercase=True):
    """Normalize raw review text into space-separated tokens.

    Whitespace runs become single spaces, anything outside printable ASCII is
    dropped and every non-alphanumeric character is split off as its own token.

    >>> clean_text("Pricey, but worth it.")
    'pricey , but worth it .'
    """
    text = _WHITESPACE.sub(" ", raw)
    text = _PRINTABLE.sub("", text)
    if lowercase:
        text = text.lower()
    text = _PUNCT.sub(r" \1 ", text)
    return _WHITESPACE.sub(" ", text).strip()


def tokenize(raw, lowercase=True):
    return clean_text(raw, lowercase=lowercase).split()


def detokenize(tokens):
    return " ".join(tokens)


@dataclass(frozen=True)
class RawRecord:
    review_text: str
    rating: int
    business_name: str
    city: str
    state: str
    tags: tuple = ()

    def __post_init__(self):
        if isinstance(self.rating, bool) or self.rating not in (1, 2, 3, 4, 5):
            raise IngestionError(f"rating must be an integer 1-5, got {self.rating!r}", "rating")
        for name in ("review_text", "business_name", "city", "state"):
            if not isinstance(getattr(self, name), str):
                raise IngestionError(f"field {name!r} must be a string", name)
        object.__setattr__(self, "tags", tuple(self.tags))

    @classmethod
    def from_json(cls, obj, field_map=None):
        """Build a record from a decoded JSON object using ``field_map`` names."""
        field_map = {**DEFAULT_FIELD_MAP, **(field_map or {})}
        values = {}
        for ours, theirs in field_map.items():
            if theirs not in obj or obj[theirs] is None:
                if ours == "tags":
                    values[ours] = ()
                    continue
                raise IngestionError(f"missing field {ours!r} (source key {theirs!r})", ours)
            values[ours] = obj[theirs]
        tags = values["tags"]
        if isinstance(tags, str):
            tags = [t.strip() for t in tags.split(",") if t.strip()]
        values["tags"] = tuple(tags)
        rating = values["rating"]
        if isinstance(rating, float) and rating.is_integer():
            values["rating"] = int(rating)
        return cls(**values)

    def to_json(self, field_map=None):
        field_map = {**DEFAULT_FIELD_MAP, **(field_map or {})}
        out = {}
        for ours, theirs in field_map.items():
            value = getattr(self, ours)
            out[theirs] = list(value) if ours == "tags" else value
        return out


@dataclass(frozen=True)
class Context:
    """Conditioning metadata, serialized as rating, name, city, state, tags."""

    rating: int
    name: str
    city: str
    state: str
    tags: tuple = ()

    @property
    def tokens(self):
        return self.to_tokens()

    def to_tokens(self, lowercase=True):
        parts = [str(self.rating), self.name, self.city, self.state, *self.tags]
        return clean_text(" ".join(parts), lowercase=lowercase).split()

    def __str__(self):
        return detokenize(self.tokens)


def build_context(record):
    """Context for a record, in the fixed order rating, name, city, state, tags.

    >>> str(build_context(RawRecord("x", 5, "Public House", "Las Vegas", "NV",
    ...                             ("Gastropubs", "Restaurants"))))
    '5 public house las vegas nv gastropubs restaurants'
    """
    for name in ("business_name", "city", "state"):
        if not getattr(record, name, "").strip():
            raise IngestionError(f"missing metadata field {name!r}", name)
    return Context(record.rating, record.business_name, record.city, record.state, tuple(record.tags))


def read_records(path, field_map=None, keep_tags=("Restaurants",)):
    """Yield ``RawRecord`` objects from a JSON-lines file.

    Records whose tags share nothing with ``keep_tags`` (case-insensitive) are
    skipped; pass ``keep_tags=None`` to keep everything.
    """
    keep = None if keep_tags is None else {t.lower() for t in keep_tags}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            try:
                record = RawRecord.from_json(obj, field_map)
            except IngestionError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}", exc.field) from exc
            if keep is not None and not keep.intersection(t.lower() for t in record.tags):
                continue
            yield record


def write_records(records, path, field_map=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json(field_map), sort_keys=True) + "\n")


def load_field_map(path):
    with open(path, encoding="utf-8") as fh:
        mapping = json.load(fh)
    unknown = set(mapping) - set(DEFAULT_FIELD_MAP)
    if unknown:
        raise IngestionError(f"unknown fields in field map: {sorted(unknown)}")
    return mapping


def make_pairs(records, lowercase=True, max_length=50):
    """Turn records into (context tokens, review tokens) pairs.

    Reviews that are empty after cleaning or longer than ``max_length`` tokens
    are dropped.
    """
    pairs = []
    for record in records:
        context = build_context(record)
        review = tokenize(record.review_text, lowercase=lowercase)
        if not review or (max_length is not None and len(review) > max_length):
            continue
        pairs.append((tuple(context.to_tokens(lowercase)), tuple(review)))
    return pairs


@dataclass
class ParallelCorpus:
    """Aligned (context, review) pairs with disjoint train/val/test index sets."""

    pairs: list
    train_idx: np.ndarray
    val_idx: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    test_idx: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def _take(self, idx):
        return [self.pairs[i] for i in idx]

    @property
    def train(self):
        return self._take(self.train_idx)

    @property
    def val(self):
        return self._take(self.val_idx)

    @property
    def test(self):
        return self._take(self.test_idx)

    def split(self, name):
        return getattr(self, name)


def split_corpus(pairs, n_val, n_test, seed=0):
    """Randomly assign pairs to validation, test and (remaining) training sets.

    Each split keeps the original corpus order of its members.
    """
    n_val = check_count(n_val, "n_val")
    n_test = check_count(n_test, "n_test")
    pairs = list(pairs)
    if n_val + n_test >= len(pairs):
        raise ReviewForgeError(
            f"need more than n_val + n_test = {n_val + n_test} pairs, got {len(pairs)}"
        )
    perm = np.random.default_rng(seed).permutation(len(pairs))
    val_idx = np.sort(perm[:n_val])
    test_idx = np.sort(perm[n_val:n_val + n_test])
    train_idx = np.sort(perm[n_val + n_test:])
    return ParallelCorpus(pairs, train_idx, val_idx, test_idx)


def write_parallel(pairs, contexts_path, reviews_path):
    with open(contexts_path, "w", encoding="utf-8", newline="\n") as cf, \
            open(reviews_path, "w", encoding="utf-8", newline="\n") as rf:
        for context, review in pairs:
            cf.write(detokenize(context) + "\n")
            rf.write(detokenize(review) + "\n")


def read_parallel(contexts_path, reviews_path):
    with open(contexts_path, encoding="utf-8") as cf, open(reviews_path, encoding="utf-8") as rf:
        contexts = [line.split() for line in cf.read().splitlines()]
        reviews = [line.split() for line in rf.read().splitlines()]
    if len(contexts) != len(reviews):
        raise ReviewForgeError(
            f"misaligned parallel files: {len(contexts)} contexts vs {len(reviews)} reviews"
        )
    return [(tuple(c), tuple(r)) for c, r in zip(contexts, reviews)]


def read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh.read().splitlines()]


class Vocabulary:
    """Token/index bijection with frequency counts.

    Index 0 is ``UNK`` and the last index is ``EOS``; the tokens in between are
    ordered by decreasing frequency, ties broken alphabetically.
    """

    def __init__(self, tokens, counts):
        tokens = list(tokens)
        if len(tokens) < 2 or tokens[0] != UNK or tokens[-1] != EOS:
            raise ValueError("vocabulary must start with UNK and end with EOS")
        if len(set(tokens)) != len(tokens):
            raise ValueError("vocabulary tokens must be unique")
        self.tokens = tokens
        self.counts = [int(c) for c in counts]
        self.index = {tok: i for i, tok in enumerate(tokens)}

    unk_index = 0

    @property
    def eos_index(self):
        return len(self.tokens) - 1

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens and self.counts == other.counts

    def __repr__(self):
        return f"Vocabulary(size={len(self)})"

    def encode(self, tokens):
        unk = self.unk_index
        return [self.index.get(tok, unk) for tok in check_tokens(tokens)]

    def decode(self, ids):
        return [self.tokens[i] for i in ids]

    def words(self):
        """Non-reserved tokens."""
        return self.tokens[1:-1]

    def hash(self):
        return sha256_hex("\n".join(self.tokens))

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for tok, count in zip(self.tokens, self.counts):
                fh.write(f"{tok}\t{count}\n")

    @classmethod
    def load(cls, path):
        tokens, counts = [], []
        with open(path, encoding="utf-8") as fh:
            for line in fh.read().splitlines():
                tok, count = line.split("\t")
                tokens.append(tok)
                counts.append(int(count))
        return cls(tokens, counts)


def build_vocabulary(pairs, min_frequency=10):
    """Shared context/review vocabulary over training pairs.

    Tokens seen fewer than ``min_frequency`` times fold into ``UNK``; the UNK
    count is the total mass folded, the EOS count is the number of reviews.
    """
    min_frequency = check_count(min_frequency, "min_frequency", minimum=1)
    counter = Counter()
    n_reviews = 0
    for context, review in pairs:
        counter.update(check_tokens(context))
        counter.update(check_tokens(review))
        n_reviews += 1
    if n_reviews == 0:
        raise ReviewForgeError("cannot build a vocabulary from empty training data")
    for reserved in (UNK, EOS):
        counter.pop(reserved, None)
    kept = sorted(
        ((tok, c) for tok, c in counter.items() if c >= min_frequency),
        key=lambda item: (-item[1], item[0]),
    )
    unk_count = sum(c for c in counter.values() if c < min_frequency)
    tokens = [UNK] + [tok for tok, _ in kept] + [EOS]
    counts = [unk_count] + [c for _, c in kept] + [n_reviews]
    return Vocabulary(tokens, counts)


def load_pairs_from_jsonl(path, field_map=None, keep_tags=("Restaurants",), lowercase=True, max_length=50):
    return make_pairs(read_records(Path(path), field_map, keep_tags), lowercase=lowercase, max_length=max_length)
