import numpy as np
import pytest
from sklearn.base import BaseEstimator

from reviewforge.corpus import EOS, UNK, Vocabulary, make_pairs, split_corpus
from reviewforge.datasets import make_reviews
from reviewforge.lm import NGramLM


class TableLM(BaseEstimator):
    """Stub language model returning a fixed log-prob row per decoding step.

    ``rows[i]`` is used at step ``i``; the last row repeats.
    """

    def __init__(self, words, rows):
        self.words = words
        self.rows = [np.asarray(r, dtype=float) for r in rows]
        self.vocabulary_ = Vocabulary([UNK, *words, EOS], [1] * (len(words) + 2))
        self.tables_ = [None]

    def fit(self, *args):
        return self

    def next_token_logprobs(self, context, prefix=()):
        return self.rows[min(len(prefix), len(self.rows) - 1)].copy()


@pytest.fixture
def table_lm():
    return TableLM


@pytest.fixture(scope="session")
def small_corpus():
    pairs = make_pairs(make_reviews(4000, 60, seed=11))
    return split_corpus(pairs, n_val=200, n_test=1200, seed=11)


@pytest.fixture(scope="session")
def small_lm(small_corpus):
    train = small_corpus.train
    return NGramLM().fit([c for c, _ in train], [r for _, r in train])


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def acceptance(request):
    """Record the outcome of one part of an acceptance criterion.

    ``with acceptance(4) as rec: ...`` marks criterion 4 failed if the block
    raises; ``rec.detail`` is shown next to the verdict.
    """
    results = request.config.stash[_ACCEPTANCE_KEY]

    class _Recorder:
        def __init__(self, number, detail=""):
            self.number = number
            self.detail = detail

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            detail = self.detail
            if exc is not None:
                detail = f"{detail} [{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}]"
            results.setdefault(self.number, []).append((exc_type is None, detail.strip()))
            return False

    return _Recorder


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        parts = results[number]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(d for _, d in parts if d)
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {details}")
