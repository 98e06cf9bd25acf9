"""End-to-end experiments, from parameter sweeps to detector transfer.

Everything is driven by one JSON-serializable config and a seed; re-running a
config reproduces every output file byte for byte.
"""

import copy
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .boosting import FakeReviewDetector, classification_report
from .corpus import detokenize, load_pairs_from_jsonl, make_pairs, split_corpus, write_parallel
from .datasets import make_reviews
from .decoding import GenerationParams, PenaltyDecoder
from .exceptions import ReviewForgeError
from .lm import NGramLM
from .obfuscation import Obfuscator
from .utils import sha256_hex

logger = logging.getLogger(__name__)

SWEEP_CELLS = ((0.3, -3.0), (0.3, -5.0), (0.5, -4.0), (0.7, -3.0), (0.7, -5.0), (0.9, -4.0))
GREEDY = "greedy"
NMT_FAKE_STAR_CELL = (0.3, -5.0)
NMT_FAKE_STAR = "b0.3_lam-5"

DEFAULT_CONFIG = {
    "seed": 0,
    "corpus": {
        "path": None,
        "field_map": None,
        "keep_tags": ["Restaurants"],
        "synthetic": {"n_reviews": 60000, "n_businesses": 400},
        "max_length": 50,
        "n_val": 500,
        "n_test": 3500,
    },
    "lm": {"order": 4, "discount": 0.75, "min_frequency": 10},
    "generation": {"alpha": 2.0 / 3.0, "min_len": 10, "max_len": 50},
    "obfuscation": {"enabled": False, "p_typo": 0.01, "p_spell": 0.01},
    "sweep": {"cells": [list(c) for c in SWEEP_CELLS], "reviews_per_cell": 200},
    "detector": {
        "categories": [NMT_FAKE_STAR],
        "n_train": 1000,
        "n_test": 500,
        "groups": ["readability", "pos_unigrams", "pos_ngrams", "word_unigrams"],
        "n_estimators": 200,
        "max_depth": 2,
        "min_df": 2,
        "max_features": 2000,
        "max_imbalance": 1.5,
        "bins": 20,
    },
    "transfer": {
        "categories": [GREEDY, NMT_FAKE_STAR],
        "n_train": 1000,
        "n_test": 500,
        "groups": ["char_ngrams"],
    },
}


def cell_name(b, lam):
    if b == 0 and lam == 0:
        return GREEDY
    return f"b{float(b):g}_lam{float(lam):g}"


def cell_params(name):
    """Inverse of ``cell_name``."""
    if name == GREEDY:
        return 0.0, 0.0
    b, lam = name[1:].split("_lam")
    return float(b), float(lam)


def cell_label(b, lam):
    if (b, lam) == NMT_FAKE_STAR_CELL:
        return "NMT-Fake*"
    return "greedy-fake" if (b, lam) == (0.0, 0.0) else "NMT-Fake"


def merge_config(overrides=None):
    """Deep-merge ``overrides`` into the defaults."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)

    def merge(dst, src):
        for k, v in src.items():
            if isinstance(v, dict) and isinstance(dst.get(k), dict):
                merge(dst[k], v)
            else:
                dst[k] = copy.deepcopy(v)

    merge(cfg, overrides or {})
    for b, lam in cfg["sweep"]["cells"]:
        GenerationParams(b=b, lam=lam, alpha=cfg["generation"]["alpha"])
    return cfg


def config_hash(cfg):
    return sha256_hex(json.dumps(cfg, sort_keys=True))[:16]


# --- diversity -----------------------------------------------------------------


@dataclass
class CellDiversity:
    cell: str
    label: str
    n_reviews: int
    distinct_openings: int
    top_opening: str
    max_opening_share: float
    distinct_1: float
    distinct_2: float
    mean_length: float


def diversity(cell, label, reviews):
    """Opening-bigram concentration and distinct-n ratios of a set of reviews."""
    n = len(reviews)
    if n == 0:
        return CellDiversity(cell, label, 0, 0, "", 0.0, 0.0, 0.0, 0.0)
    openings = Counter(tuple(r[:2]) for r in reviews)
    (top, top_count), = sorted(openings.items(), key=lambda kv: (-kv[1], kv[0]))[:1]
    unigrams = [t for r in reviews for t in r]
    bigrams = [tuple(r[i:i + 2]) for r in reviews for i in range(len(r) - 1)]
    return CellDiversity(
        cell=cell,
        label=label,
        n_reviews=n,
        distinct_openings=len(openings),
        top_opening=" ".join(top),
        max_opening_share=top_count / n,
        distinct_1=len(set(unigrams)) / max(len(unigrams), 1),
        distinct_2=len(set(bigrams)) / max(len(bigrams), 1),
        mean_length=float(np.mean([len(r) for r in reviews])),
    )


@dataclass
class DiversityReport:
    cells: list = field(default_factory=list)

    def __getitem__(self, name):
        for c in self.cells:
            if c.cell == name:
                return c
        raise KeyError(name)

    def to_csv(self):
        cols = list(CellDiversity.__dataclass_fields__)
        lines = [",".join(cols)]
        for c in self.cells:
            row = asdict(c)
            lines.append(",".join(
                f"{row[k]:.6f}" if isinstance(row[k], float) else f'"{row[k]}"' if k == "top_opening" else str(row[k])
                for k in cols
            ))
        return "\n".join(lines) + "\n"

    def __str__(self):
        lines = [f"{'cell':<16}{'label':<12}{'n':>5}{'openings':>10}{'max share':>11}"
                 f"{'dist-1':>8}{'dist-2':>8}{'len':>7}  top opening"]
        for c in self.cells:
            lines.append(f"{c.cell:<16}{c.label:<12}{c.n_reviews:>5}{c.distinct_openings:>10}"
                         f"{c.max_opening_share:>11.1%}{c.distinct_1:>8.3f}{c.distinct_2:>8.3f}"
                         f"{c.mean_length:>7.1f}  {c.top_opening}")
        return "\n".join(lines)


# --- generation ----------------------------------------------------------------


def generate_cell(lm, contexts, b, lam, generation, seed, n_jobs=1, return_digests=False):
    decoder = PenaltyDecoder(lm, b=b, lam=lam, alpha=generation["alpha"], min_len=generation["min_len"],
                             max_len=generation["max_len"], seed=seed, n_jobs=n_jobs)
    return decoder.fit().generate(contexts, return_digests=return_digests)


@dataclass
class SweepResult:
    reviews: dict
    report: DiversityReport


def run_sweep(lm, contexts, cells=SWEEP_CELLS, reviews_per_cell=200, generation=None, seed=0, n_jobs=1):
    """Generate ``reviews_per_cell`` reviews for the greedy baseline and every cell.

    Contexts are cycled if fewer than ``reviews_per_cell`` are given.
    """
    generation = {**DEFAULT_CONFIG["generation"], **(generation or {})}
    contexts = list(contexts)
    if reviews_per_cell and not contexts:
        raise ReviewForgeError("sweep needs at least one context")
    ctx = [contexts[i % len(contexts)] for i in range(reviews_per_cell)]
    reviews = {}
    report = DiversityReport()
    for b, lam in [(0.0, 0.0)] + [tuple(c) for c in cells]:
        name = cell_name(b, lam)
        reviews[name] = generate_cell(lm, ctx, b, lam, generation, seed, n_jobs) if ctx else []
        report.cells.append(diversity(name, cell_label(b, lam), reviews[name]))
    return SweepResult(reviews, report)


# --- detection -----------------------------------------------------------------


def split_class(docs, n_train, n_test, seed):
    """Shuffle ``docs`` with ``seed`` and cut train/test slices."""
    docs = list(docs)
    if len(docs) < n_train + n_test:
        raise ReviewForgeError(f"need {n_train + n_test} reviews per class, got {len(docs)}")
    perm = np.random.default_rng(seed).permutation(len(docs))
    return [docs[i] for i in perm[:n_train]], [docs[i] for i in perm[n_train:n_train + n_test]]


def score_histogram(margins, labels, bins=20):
    """Counts of ``(margin + 1) / 2`` per class over equal bins on [0, 1].

    ``bins`` must be even so the 0.5 decision threshold is a bin edge.
    """
    if bins % 2:
        raise ValueError("bins must be even so that 0.5 is a bin edge")
    scores = (np.asarray(margins) + 1.0) / 2.0
    labels = np.asarray(labels)
    edges = np.linspace(0.0, 1.0, bins + 1)
    h, _ = np.histogram(scores[labels == "human"], edges)
    m, _ = np.histogram(scores[labels == "machine"], edges)
    return [(float(edges[i]), float(edges[i + 1]), int(h[i]), int(m[i])) for i in range(bins)]


def histogram_csv(rows):
    lines = ["bin_left,bin_right,count_human,count_machine"]
    lines += [f"{a:.4f},{b:.4f},{h},{m}" for a, b, h, m in rows]
    return "\n".join(lines) + "\n"


@dataclass
class DetectorResult:
    report: object
    histogram: list
    model: FakeReviewDetector
    margins: np.ndarray
    y_test: np.ndarray


def _detector(cfg):
    return FakeReviewDetector(
        groups=tuple(cfg.get("groups", DEFAULT_CONFIG["detector"]["groups"])),
        min_df=cfg.get("min_df", 2),
        max_features=cfg.get("max_features", 2000),
        n_estimators=cfg.get("n_estimators", 200),
        max_depth=cfg.get("max_depth", 2),
    )


def detector_experiment(human, machine, detector_cfg=None, seed=0, shuffle_labels=False):
    """Train on a human/machine split and evaluate on the held-out part.

    With ``shuffle_labels`` both the training and the test labels are permuted,
    which is the null case: the report should sit at chance.
    """
    cfg = {**DEFAULT_CONFIG["detector"], **(detector_cfg or {})}
    n_train, n_test = cfg["n_train"], cfg["n_test"]
    h_tr, h_te = split_class(human, n_train, n_test, seed)
    m_tr, m_te = split_class(machine, n_train, n_test, seed + 1)
    X = h_tr + m_tr
    y = np.array(["human"] * len(h_tr) + ["machine"] * len(m_tr))
    if shuffle_labels:
        y = np.random.default_rng(seed + 2).permutation(y)
    model = _detector(cfg).fit(X, y)
    X_te = h_te + m_te
    y_te = np.array(["human"] * len(h_te) + ["machine"] * len(m_te))
    if shuffle_labels:
        y_te = np.random.default_rng(seed + 3).permutation(y_te)
    margins = model.decision_function(X_te)
    pred = np.where(margins > 0, "machine", "human")
    report = classification_report(y_te, pred)
    ratio = max(len(human), len(machine)) / max(min(len(human), len(machine)), 1)
    if ratio > cfg["max_imbalance"]:
        report.meta["warning"] = f"class imbalance {ratio:.2f} exceeds {cfg['max_imbalance']}"
        logger.warning(report.meta["warning"])
    return DetectorResult(report, score_histogram(margins, y_te, cfg["bins"]), model, margins, y_te)


@dataclass
class TransferMatrix:
    categories: list
    macro_f: np.ndarray
    machine_recall: np.ndarray

    def to_csv(self):
        lines = ["train_category,eval_category,macro_f,machine_recall"]
        for i, a in enumerate(self.categories):
            for j, b in enumerate(self.categories):
                lines.append(f"{a},{b},{self.macro_f[i, j]:.6f},{self.machine_recall[i, j]:.6f}")
        return "\n".join(lines) + "\n"

    def __str__(self):
        w = max(12, max(len(c) for c in self.categories) + 2)
        head = "train \\ eval".ljust(w) + "".join(c.rjust(w) for c in self.categories)
        lines = ["machine-class recall", head]
        for i, a in enumerate(self.categories):
            lines.append(a.ljust(w) + "".join(f"{v:.1%}".rjust(w) for v in self.machine_recall[i]))
        lines += ["", "class-averaged F", head]
        for i, a in enumerate(self.categories):
            lines.append(a.ljust(w) + "".join(f"{v:.1%}".rjust(w) for v in self.macro_f[i]))
        return "\n".join(lines)


def transfer_experiment(human, categories, transfer_cfg=None, seed=0):
    """Cross-category detection.

    For each training category, fit a detector against human reviews and score
    it on every category's held-out reviews paired with the same held-out
    human reviews. Splits match ``detector_experiment`` for the same seed, so
    the diagonal equals that experiment's result.
    """
    cfg = {**DEFAULT_CONFIG["detector"], **DEFAULT_CONFIG["transfer"], **(transfer_cfg or {})}
    names = list(categories)
    if len(names) < 2:
        raise ReviewForgeError("transfer needs at least two machine categories")
    n_train, n_test = cfg["n_train"], cfg["n_test"]
    h_tr, h_te = split_class(human, n_train, n_test, seed)
    splits = {name: split_class(categories[name], n_train, n_test, seed + 1) for name in names}
    k = len(names)
    F = np.zeros((k, k))
    R = np.zeros((k, k))
    for i, a in enumerate(names):
        y = np.array(["human"] * n_train + ["machine"] * n_train)
        model = _detector(cfg).fit(h_tr + splits[a][0], y)
        for j, b in enumerate(names):
            y_te = np.array(["human"] * n_test + ["machine"] * n_test)
            rep = classification_report(y_te, model.predict(h_te + splits[b][1]))
            F[i, j] = rep.macro_f
            R[i, j] = rep.recall["machine"]
    return TransferMatrix(names, F, R)


# --- full pipeline -------------------------------------------------------------


def load_corpus(cfg):
    ccfg = cfg["corpus"]
    if ccfg.get("path"):
        pairs = load_pairs_from_jsonl(ccfg["path"], ccfg.get("field_map"), ccfg.get("keep_tags"),
                                      max_length=ccfg["max_length"])
    else:
        syn = ccfg["synthetic"]
        records = make_reviews(syn["n_reviews"], syn["n_businesses"], seed=cfg["seed"])
        pairs = make_pairs(records, max_length=ccfg["max_length"])
    return split_corpus(pairs, ccfg["n_val"], ccfg["n_test"], seed=cfg["seed"])


def train_lm(corpus, cfg):
    lcfg = cfg["lm"]
    train = corpus.train
    lm = NGramLM(order=lcfg["order"], discount=lcfg["discount"], min_frequency=lcfg["min_frequency"])
    return lm.fit([c for c, _ in train], [r for _, r in train])


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_experiment(cfg, out_dir, n_jobs=1, stages=("sweep", "detector", "transfer")):
    """Run the configured stages and write reviews/, models/ and reports/ under ``out_dir``.

    Returns a summary dict (also written to ``reports/summary.json``).
    """
    cfg = merge_config(cfg)
    out = Path(out_dir)
    chash = config_hash(cfg)
    seed = cfg["seed"]
    _write(out / "config.json", json.dumps(cfg, indent=2, sort_keys=True) + "\n")

    corpus = load_corpus(cfg)
    (out / "data").mkdir(parents=True, exist_ok=True)
    write_parallel(corpus.train, out / "data" / "context-train.txt", out / "data" / "reviews-train.txt")
    write_parallel(corpus.val, out / "data" / "context-val.txt", out / "data" / "reviews-val.txt")
    write_parallel(corpus.test, out / "data" / "context-tst.txt", out / "data" / "reviews-tst.txt")
    lm = train_lm(corpus, cfg)
    (out / "models").mkdir(parents=True, exist_ok=True)
    lm.save(out / "models" / "lm.bin")
    lm.vocabulary_.save(out / "models" / "vocab.tsv")
    val = corpus.val
    summary = {
        "config_hash": chash,
        "n_train": len(corpus.train_idx),
        "vocabulary_size": len(lm.vocabulary_),
        "perplexity_val": lm.perplexity([c for c, _ in val], [r for _, r in val]) if val else None,
    }
    test = corpus.test
    gen = cfg["generation"]

    def publish(name, reviews):
        _write(out / "reviews" / f"{name}.txt", "".join(detokenize(r) + "\n" for r in reviews))

    if "sweep" in stages:
        n = cfg["sweep"]["reviews_per_cell"]
        sweep = run_sweep(lm, [c for c, _ in test], cfg["sweep"]["cells"], n, gen, seed, n_jobs)
        for name, reviews in sweep.reviews.items():
            publish(f"sweep_{name}", reviews)
        _write(out / "reports" / "diversity.csv", sweep.report.to_csv())
        _write(out / "reports" / "diversity.txt", f"config {chash}\n{sweep.report}\n")
        base = sweep.report[GREEDY].max_opening_share
        summary["diversity"] = {c.cell: c.max_opening_share for c in sweep.report.cells}
        summary["baseline_share_exceeds_all_cells"] = bool(
            all(base > c.max_opening_share for c in sweep.report.cells if c.cell != GREEDY)
        )

    det_cfg = cfg["detector"]
    tr_cfg = {**det_cfg, **cfg["transfer"]}
    needed = []
    if "detector" in stages:
        needed += det_cfg["categories"]
    if "transfer" in stages:
        needed += tr_cfg["categories"]
    n_cls = max(det_cfg["n_train"] + det_cfg["n_test"], tr_cfg["n_train"] + tr_cfg["n_test"])
    if needed and len(test) < n_cls:
        raise ReviewForgeError(f"test split has {len(test)} pairs; detection needs {n_cls}")
    human = [list(r) for _, r in test[:n_cls]]
    contexts = [c for c, _ in test[:n_cls]]
    generated = {}
    for name in dict.fromkeys(needed):
        b, lam = cell_params(name)
        reviews = generate_cell(lm, contexts, b, lam, gen, seed, n_jobs)
        ocfg = cfg["obfuscation"]
        if ocfg["enabled"]:
            obf = Obfuscator(p_typo=ocfg["p_typo"], p_spell=ocfg["p_spell"],
                             dictionary=lm.vocabulary_, seed=seed)
            reviews = obf.fit().transform(reviews)
        generated[name] = reviews
        publish(name, reviews)

    if "detector" in stages:
        summary["detector"] = {}
        for name in det_cfg["categories"]:
            res = detector_experiment(human, generated[name], det_cfg, seed)
            res.model.save(out / "models" / f"detector_{name}.bin")
            _write(out / "reports" / f"detector_{name}.csv", res.report.to_csv())
            _write(out / "reports" / f"detector_{name}.txt",
                   f"config {chash}\nhuman vs {name}\n{res.report}\n")
            _write(out / "reports" / f"histogram_{name}.csv", histogram_csv(res.histogram))
            summary["detector"][name] = {
                "macro_f": res.report.macro_f,
                "machine_recall": res.report.recall["machine"],
                **res.report.meta,
            }

    if "transfer" in stages:
        cats = {name: generated[name] for name in tr_cfg["categories"]}
        matrix = transfer_experiment(human, cats, tr_cfg, seed)
        _write(out / "reports" / "transfer.csv", matrix.to_csv())
        _write(out / "reports" / "transfer.txt", f"config {chash}\n{matrix}\n")
        summary["transfer"] = {
            "categories": matrix.categories,
            "machine_recall": matrix.machine_recall.round(6).tolist(),
            "macro_f": matrix.macro_f.round(6).tolist(),
        }

    _write(out / "reports" / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
