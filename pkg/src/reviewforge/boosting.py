"""Discrete AdaBoost over shallow weighted-Gini decision trees.

Trees search every threshold of every feature exhaustively. Features are
binned by their distinct values once per boosting run; zero entries of sparse
count features are never materialized, which keeps a 200-round fit on a few
thousand documents within seconds.
"""

import csv
import io
import pickle
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .features import ReviewFeaturizer
from .exceptions import FeatureSpaceMismatchError, ModelFormatError, ReviewForgeError
from .utils import check_count

EPS_FLOOR = 1e-10


def _as_csc(X):
    if sp.issparse(X):
        return sp.csc_matrix(X, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {X.shape}")
    return sp.csc_matrix(X)


class _BinnedFeatures:
    """Distinct-value bins for every column of a CSC matrix."""

    def __init__(self, X):
        X = _as_csc(X)
        X.sum_duplicates()
        X.eliminate_zeros()
        n, F = X.shape
        self.n, self.F = n, F
        nnz_per_col = np.diff(X.indptr)
        entry_feat = np.repeat(np.arange(F), nnz_per_col)
        entry_rows = X.indices.astype(np.intp)
        entry_vals = X.data

        has_zero = nnz_per_col < n
        zero_feats = np.flatnonzero(has_zero)
        all_feat = np.concatenate([entry_feat, zero_feats])
        all_vals = np.concatenate([entry_vals, np.zeros(len(zero_feats))])
        order = np.lexsort((all_vals, all_feat))
        sf, sv = all_feat[order], all_vals[order]
        new_bin = np.ones(len(sf), dtype=bool)
        new_bin[1:] = (sf[1:] != sf[:-1]) | (sv[1:] != sv[:-1])
        bin_of_sorted = np.cumsum(new_bin) - 1
        bin_ids = np.empty(len(sf), dtype=np.intp)
        bin_ids[order] = bin_of_sorted

        self.B = int(new_bin.sum())
        self.bin_feature = sf[new_bin]
        self.bin_value = sv[new_bin]
        self.entry_rows = entry_rows
        self.entry_feat = entry_feat
        self.entry_bin = bin_ids[:len(entry_feat)]
        self.zero_feats = zero_feats
        self.zero_bins = bin_ids[len(entry_feat):]
        last = np.ones(self.B, dtype=bool)
        last[:-1] = self.bin_feature[1:] != self.bin_feature[:-1]
        self.last_bin = last
        first = np.ones(self.B, dtype=bool)
        first[1:] = last[:-1]
        self.first_bin_index = np.flatnonzero(first)
        self.X = X

    def bin_sums(self, q):
        """Per-bin sums of the per-sample quantity ``q``."""
        entry_q = q[self.entry_rows]
        sums = np.bincount(self.entry_bin, weights=entry_q, minlength=self.B)
        if len(self.zero_feats):
            nz = np.bincount(self.entry_feat, weights=entry_q, minlength=self.F)
            sums[self.zero_bins] += q.sum() - nz[self.zero_feats]
        return sums

    def left_cumulative(self, sums):
        """For each bin k, the sum over bins of the same feature up to and including k."""
        cs = np.cumsum(sums)
        base = np.zeros(self.F)
        starts = self.first_bin_index
        base[self.bin_feature[starts]] = np.where(starts > 0, cs[starts - 1], 0.0)
        return cs - base[self.bin_feature]

    def column(self, f):
        return self.X[:, f].toarray().ravel()


def _gini_sum(w, wp):
    """Weighted Gini impurity times node weight: 2 * pos * neg / total."""
    wn = np.clip(w - wp, 0.0, None)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(w > 0, 2.0 * wp * wn / w, 0.0)
    return g


class ShallowTree:
    """Depth-limited binary tree on {-1, +1} labels with weighted Gini splits.

    Impure nodes are always split while depth allows, even without impurity
    gain (a zero-gain first split is what lets depth 2 solve XOR). Ties are
    broken by lowest feature index, then lowest threshold. Samples with
    ``x <= threshold`` go left; thresholds are midpoints between adjacent
    distinct values present in the node.
    """

    def __init__(self, max_depth=2):
        self.max_depth = max_depth

    def fit(self, X, y, sample_weight=None, binned=None):
        binned = binned if binned is not None else _BinnedFeatures(X)
        y = np.asarray(y)
        w = np.full(binned.n, 1.0 / binned.n) if sample_weight is None else np.asarray(sample_weight, float)
        self.nodes_ = []
        self._grow(binned, y, w, np.ones(binned.n, dtype=bool), 0)
        return self

    def _leaf_value(self, y, w, mask):
        pos = w[mask & (y > 0)].sum()
        neg = w[mask & (y < 0)].sum()
        return 1.0 if pos > neg else -1.0

    def _grow(self, binned, y, w, mask, depth):
        node_id = len(self.nodes_)
        node = {"feature": -1, "threshold": 0.0, "left": -1, "right": -1,
                "value": self._leaf_value(y, w, mask)}
        self.nodes_.append(node)
        labels = y[mask]
        if depth >= self.max_depth or labels.size < 2 or np.all(labels == labels[0]):
            return node_id
        split = self._best_split(binned, y, w, mask)
        if split is None:
            return node_id
        f, thr = split
        col = binned.column(f)
        go_left = col <= thr
        node["feature"], node["threshold"] = int(f), float(thr)
        node["left"] = self._grow(binned, y, w, mask & go_left, depth + 1)
        node["right"] = self._grow(binned, y, w, mask & ~go_left, depth + 1)
        return node_id

    def _best_split(self, binned, y, w, mask):
        m = mask.astype(np.float64)
        wn = w * m
        wp = wn * (y > 0)
        cnt_bins = binned.bin_sums(m)
        L = binned.left_cumulative(binned.bin_sums(wn))
        Lp = binned.left_cumulative(binned.bin_sums(wp))
        Lc = binned.left_cumulative(cnt_bins)
        total, total_p, total_c = wn.sum(), wp.sum(), m.sum()
        valid = (~binned.last_bin) & (Lc > 0.5) & (total_c - Lc > 0.5)
        if not valid.any():
            return None
        imp = _gini_sum(L, Lp) + _gini_sum(total - L, total_p - Lp)
        imp = np.where(valid, imp, np.inf)
        k = int(np.argmin(imp))
        f = binned.bin_feature[k]
        j = k + 1
        while cnt_bins[j] < 0.5:
            j += 1
        return f, 0.5 * (binned.bin_value[k] + binned.bin_value[j])

    def apply_columns(self, column):
        """Predict with ``column(f)`` returning feature ``f`` for every sample."""
        cache = {}
        n = None
        out = None

        def visit(node_id, idx):
            nonlocal out
            node = self.nodes_[node_id]
            if node["feature"] < 0:
                out[idx] = node["value"]
                return
            f = node["feature"]
            if f not in cache:
                cache[f] = column(f)
            go_left = cache[f][idx] <= node["threshold"]
            visit(node["left"], idx[go_left])
            visit(node["right"], idx[~go_left])

        first = self.nodes_[0]
        if first["feature"] >= 0:
            cache[first["feature"]] = column(first["feature"])
            n = len(cache[first["feature"]])
        else:
            n = len(column(0))
        out = np.empty(n)
        visit(0, np.arange(n))
        return out

    def predict(self, X):
        X = _as_csc(X)
        return self.apply_columns(lambda f: X[:, f].toarray().ravel())

    @property
    def depth(self):
        def d(i):
            node = self.nodes_[i]
            return 0 if node["feature"] < 0 else 1 + max(d(node["left"]), d(node["right"]))
        return d(0)


class AdaBoostDetector(ClassifierMixin, BaseEstimator):
    """Discrete AdaBoost with depth-limited Gini trees.

    Each round fits a tree to the weighted sample, takes its weighted error
    ``eps``, sets the stage weight ``0.5 * ln((1 - eps) / eps)`` and reweights
    samples by ``exp(-alpha * y * h(x))``. A round with ``eps >= 0.5`` is
    discarded and stops training; ``eps == 0`` keeps the tree with ``eps``
    floored at 1e-10 and stops.

    The positive class is ``classes_[1]`` (``"machine"`` for human/machine labels);
    a zero vote goes to ``classes_[0]``.

    Attributes
    ----------
    estimators_ : list of ShallowTree
    estimator_weights_ : ndarray
    estimator_errors_ : ndarray
        Weighted training error of each kept tree.
    loss_bound_ : ndarray
        Running product of ``2 * sqrt(eps * (1 - eps))``, an upper bound on
        the training error after each round.
    train_error_ : ndarray
        Ensemble 0-1 training error after each round.
    sample_weight_ : ndarray
        Normalized sample weights after the last reweighting.
    """

    def __init__(self, n_estimators=200, max_depth=2):
        self.n_estimators = n_estimators
        self.max_depth = max_depth

    def fit(self, X, y, space_hash=None):
        check_count(self.n_estimators, "n_estimators", minimum=1)
        check_count(self.max_depth, "max_depth", minimum=1)
        y = np.asarray(y)
        classes = np.unique(y)
        if classes.size != 2:
            raise ReviewForgeError(f"need exactly two classes to train, got {classes.tolist()}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        self.classes_ = classes
        ys = np.where(y == classes[1], 1.0, -1.0)
        binned = _BinnedFeatures(X)
        self.n_features_in_ = binned.F
        self.space_hash_ = space_hash
        n = binned.n
        w = np.full(n, 1.0 / n)
        F = np.zeros(n)

        self.estimators_, weights, errors, bounds, train_err = [], [], [], [], []
        bound = 1.0
        self.stop_reason_ = "max_rounds"
        for _ in range(self.n_estimators):
            tree = ShallowTree(self.max_depth).fit(None, ys, w, binned=binned)
            h = tree.apply_columns(binned.column)
            eps = float(w[h != ys].sum())
            if eps >= 0.5:
                self.stop_reason_ = "weak_learner_no_better_than_chance"
                break
            perfect = eps <= 0.0
            eps_used = max(eps, EPS_FLOOR)
            alpha = 0.5 * np.log((1.0 - eps_used) / eps_used)
            bound *= 2.0 * np.sqrt(eps * (1.0 - eps))
            self.estimators_.append(tree)
            weights.append(alpha)
            errors.append(eps)
            bounds.append(bound)
            F += alpha * h
            train_err.append(float(np.mean(np.where(F > 0, 1.0, -1.0) != ys)))
            if perfect:
                self.stop_reason_ = "perfect_fit"
                break
            w = w * np.exp(-alpha * ys * h)
            w /= w.sum()
        if not self.estimators_:
            raise ReviewForgeError("no weak learner better than chance; nothing to boost")
        self.estimator_weights_ = np.array(weights)
        self.estimator_errors_ = np.array(errors)
        self.loss_bound_ = np.array(bounds)
        self.train_error_ = np.array(train_err)
        self.sample_weight_ = w
        return self

    def decision_function(self, X):
        """Normalized weighted vote in [-1, 1]; positive favours ``classes_[1]``."""
        check_is_fitted(self, "estimators_")
        X = _as_csc(X)
        if X.shape[1] != self.n_features_in_:
            raise FeatureSpaceMismatchError(
                f"model expects {self.n_features_in_} features, got {X.shape[1]}"
            )
        cache = {}

        def column(f):
            if f not in cache:
                cache[f] = X[:, f].toarray().ravel()
            return cache[f]

        votes = np.zeros(X.shape[0])
        for alpha, tree in zip(self.estimator_weights_, self.estimators_):
            votes += alpha * tree.apply_columns(column)
        return votes / self.estimator_weights_.sum()

    def predict(self, X):
        margin = self.decision_function(X)
        return np.where(margin > 0, self.classes_[1], self.classes_[0])


def classify(ensemble, X, space_hash=None):
    """Labels and margins; refuses features from a different feature space."""
    check_is_fitted(ensemble, "estimators_")
    if space_hash is not None and ensemble.space_hash_ is not None and space_hash != ensemble.space_hash_:
        raise FeatureSpaceMismatchError("features come from a different feature space than the model")
    margin = ensemble.decision_function(X)
    return np.where(margin > 0, ensemble.classes_[1], ensemble.classes_[0]), margin


@dataclass
class ClassificationReport:
    labels: tuple
    precision: dict
    recall: dict
    f_score: dict
    support: dict
    meta: dict = field(default_factory=dict)

    @property
    def macro_f(self):
        """Class-averaged F-score."""
        return float(np.mean([self.f_score[c] for c in self.labels]))

    def rows(self):
        return [
            (c, self.precision[c], self.recall[c], self.f_score[c], self.support[c])
            for c in self.labels
        ]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["class", "precision", "recall", "f_score", "support"])
        for c, p, r, f, s in self.rows():
            writer.writerow([c, f"{p:.6f}", f"{r:.6f}", f"{f:.6f}", s])
        writer.writerow(["macro_avg", "", "", f"{self.macro_f:.6f}", sum(self.support.values())])
        return buf.getvalue()

    def __str__(self):
        lines = [f"{'class':<12}{'precision':>10}{'recall':>10}{'f-score':>10}{'support':>9}"]
        for c, p, r, f, s in self.rows():
            lines.append(f"{c:<12}{p:>10.1%}{r:>10.1%}{f:>10.1%}{s:>9d}")
        lines.append(f"{'macro avg':<12}{'':>10}{'':>10}{self.macro_f:>10.1%}"
                     f"{sum(self.support.values()):>9d}")
        return "\n".join(lines)


def classification_report(y_true, y_pred, labels=("human", "machine")):
    """Per-class precision, recall, F and support; 0/0 is reported as 0."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    P, R, Fs, S = {}, {}, {}, {}
    for c in labels:
        tp = int(np.sum((y_pred == c) & (y_true == c)))
        pred = int(np.sum(y_pred == c))
        true = int(np.sum(y_true == c))
        p = tp / pred if pred else 0.0
        r = tp / true if true else 0.0
        P[c], R[c], S[c] = p, r, true
        Fs[c] = 2 * p * r / (p + r) if p + r else 0.0
    return ClassificationReport(tuple(labels), P, R, Fs, S)


def evaluate(model, X, y_true, labels=("human", "machine")):
    return classification_report(y_true, model.predict(X), labels)


_DET_MAGIC = b"RFDT"
_DET_VERSION = 1


class FakeReviewDetector(ClassifierMixin, BaseEstimator):
    """Featurizer plus boosted trees, trained on tokenized reviews."""

    def __init__(self, groups=("readability", "pos_unigrams", "pos_ngrams", "word_unigrams"),
                 min_df=2, max_features=2000, n_estimators=200, max_depth=2):
        self.groups = groups
        self.min_df = min_df
        self.max_features = max_features
        self.n_estimators = n_estimators
        self.max_depth = max_depth

    def fit(self, X, y):
        self.featurizer_ = ReviewFeaturizer(
            groups=tuple(self.groups), min_df=self.min_df, max_features=self.max_features
        )
        Xf = self.featurizer_.fit_transform(X)
        self.booster_ = AdaBoostDetector(self.n_estimators, self.max_depth).fit(
            Xf, y, space_hash=self.featurizer_.space_hash_
        )
        self.classes_ = self.booster_.classes_
        return self

    def decision_function(self, X):
        check_is_fitted(self, "booster_")
        return self.booster_.decision_function(self.featurizer_.transform(X))

    def predict(self, X):
        check_is_fitted(self, "booster_")
        labels, _ = classify(self.booster_, self.featurizer_.transform(X), self.featurizer_.space_hash_)
        return labels

    def save(self, path):
        check_is_fitted(self, "booster_")
        payload = zlib.compress(pickle.dumps(self, protocol=4), 6)
        with open(path, "wb") as fh:
            fh.write(_DET_MAGIC + struct.pack("<H", _DET_VERSION))
            fh.write(bytes.fromhex(self.featurizer_.space_hash_))
            fh.write(payload)

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            blob = fh.read()
        if blob[:4] != _DET_MAGIC:
            raise ModelFormatError(f"{path}: not a detector file")
        (version,) = struct.unpack("<H", blob[4:6])
        if version != _DET_VERSION:
            raise ModelFormatError(f"{path}: unsupported detector version {version}")
        try:
            model = pickle.loads(zlib.decompress(blob[38:]))
        except (zlib.error, pickle.UnpicklingError) as exc:
            raise ModelFormatError(f"{path}: corrupt payload") from exc
        header_hash = blob[6:38].hex()
        if model.featurizer_.space_hash_ != header_hash or model.booster_.space_hash_ != header_hash:
            raise FeatureSpaceMismatchError(f"{path}: feature-space hash mismatch")
        return model
