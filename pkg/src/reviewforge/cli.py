"""Command-line entry point.

Every subcommand writes into the directory given by ``--out``. A
``manifest.json`` recording the resolved flags and input hashes is
written there before any other output, and completed with output hashes once
the run finishes. ``reviewforge replay`` re-runs a manifest.

Exit codes: 0 on success, 1 on usage errors, 2 on data or model errors.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .boosting import FakeReviewDetector, classification_report
from .corpus import (
    Vocabulary,
    build_vocabulary,
    detokenize,
    load_field_map,
    load_pairs_from_jsonl,
    read_lines,
    read_parallel,
    split_corpus,
    tokenize,
    write_parallel,
    write_records,
)
from .datasets import make_reviews
from .decoding import GenerationParams, PenaltyDecoder
from .exceptions import ReviewForgeError
from .features import FEATURE_GROUPS
from .harness import run_experiment
from .lm import NGramLM
from .obfuscation import KeyboardWeights, Obfuscator, SpellingRuleSet
from .utils import sha256_hex

SEED_ENV = "REVIEWFORGE_SEED"
MANIFEST = "manifest.json"
LABELS = ("human", "machine")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _file_hash(path):
    try:
        with open(path, "rb") as fh:
            return sha256_hex(fh.read())
    except OSError:
        return None


def _default_jobs():
    return os.cpu_count() or 1


# --- subcommands ---------------------------------------------------------------
# Each returns a list of output paths relative to the run directory.


def cmd_make_corpus(args, out):
    records = make_reviews(args.n_reviews, args.n_businesses, seed=args.seed)
    write_records(records, out / "reviews.jsonl")
    return ["reviews.jsonl"]


def cmd_preprocess(args, out):
    field_map = load_field_map(args.field_map) if args.field_map else None
    keep = None if args.keep_tags == "" else args.keep_tags.split(",")
    pairs = load_pairs_from_jsonl(args.input, field_map, keep, max_length=args.max_length)
    corpus = split_corpus(pairs, args.n_val, args.n_test, seed=args.seed)
    outputs = []
    for split, tag in (("train", "train"), ("val", "val"), ("test", "tst")):
        write_parallel(corpus.split(split), out / f"context-{tag}.txt", out / f"reviews-{tag}.txt")
        outputs += [f"context-{tag}.txt", f"reviews-{tag}.txt"]
    build_vocabulary(corpus.train, args.min_frequency).save(out / "vocab.tsv")
    return outputs + ["vocab.tsv"]


def cmd_train_lm(args, out):
    pairs = read_parallel(args.contexts, args.reviews)
    vocab = Vocabulary.load(args.vocab) if args.vocab else None
    lm = NGramLM(order=args.order, discount=args.discount, min_frequency=args.min_frequency,
                 vocabulary=vocab)
    lm.fit([c for c, _ in pairs], [r for _, r in pairs])
    lm.save(out / "lm.bin")
    lm.vocabulary_.save(out / "vocab.tsv")
    stats = {"n_pairs": len(pairs), "vocabulary_size": len(lm.vocabulary_)}
    if args.val_contexts and args.val_reviews:
        val = read_parallel(args.val_contexts, args.val_reviews)
        stats["perplexity_val"] = lm.perplexity([c for c, _ in val], [r for _, r in val])
    with open(out / "lm.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    return ["lm.bin", "vocab.tsv", "lm.json"]


def _obfuscator(args, dictionary):
    rules = SpellingRuleSet.load(args.rules) if args.rules else None
    weights = KeyboardWeights.load(args.weights) if args.weights else None
    return Obfuscator(p_typo=args.p_typo, p_spell=args.p_spell, rules=rules, weights=weights,
                      dictionary=dictionary, seed=args.seed).fit()


def cmd_generate(args, out):
    lm = NGramLM.load(args.lm)
    contexts = read_lines(args.contexts)
    decoder = PenaltyDecoder(lm, b=args.b, lam=args.lam, alpha=args.alpha, min_len=args.min_len,
                             max_len=args.max_len, grammar=args.grammar, seed=args.seed,
                             n_jobs=args.jobs).fit()
    reviews, digests = decoder.generate(contexts, return_digests=True)
    if args.p_typo > 0 or args.p_spell > 0:
        reviews = _obfuscator(args, lm.vocabulary_).transform(reviews)
    with open(out / "reviews.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(detokenize(r) + "\n" for r in reviews)
    meta = {
        "seed": args.seed,
        "params": decoder.params_.to_dict(),
        "obfuscation": {"p_typo": args.p_typo, "p_spell": args.p_spell},
        "mask_digests": digests,
    }
    with open(out / "reviews.meta.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return ["reviews.txt", "reviews.meta.json"]


def cmd_obfuscate(args, out):
    dictionary = Vocabulary.load(args.dictionary).words() if args.dictionary else ()
    reviews = read_lines(args.input)
    result = _obfuscator(args, dictionary).transform(reviews)
    with open(out / "reviews.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(detokenize(r) + "\n" for r in result)
    return ["reviews.txt"]


def read_labeled(path, require_labels=True):
    """Read "label<TAB>text" lines. Unlabeled lines are allowed unless ``require_labels``."""
    labels, docs = [], []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, 1):
        label, sep, text = line.partition("\t")
        if not sep:
            if require_labels:
                raise ReviewForgeError(f"{path}:{lineno}: expected label<TAB>text")
            label, text = None, line
        elif label not in LABELS:
            raise ReviewForgeError(f"{path}:{lineno}: label must be one of {LABELS}, got {label!r}")
        labels.append(label)
        docs.append(tokenize(text))
    return labels, docs


def cmd_train_detector(args, out):
    labels, docs = read_labeled(args.input)
    model = FakeReviewDetector(groups=tuple(args.groups.split(",")), min_df=args.min_df,
                               max_features=args.max_features, n_estimators=args.n_estimators,
                               max_depth=args.max_depth)
    model.fit(docs, labels)
    model.save(out / "detector.bin")
    report = classification_report(labels, model.predict(docs))
    with open(out / "train_report.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_csv())
    with open(out / "train_report.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"training set ({model.booster_.stop_reason_}, "
                 f"{len(model.booster_.estimators_)} rounds)\n{report}\n")
    return ["detector.bin", "train_report.csv", "train_report.txt"]


def cmd_detect(args, out):
    model = FakeReviewDetector.load(args.model)
    labels, docs = read_labeled(args.input, require_labels=False)
    margins = model.decision_function(docs)
    pred = np.where(margins > 0, model.classes_[1], model.classes_[0])
    with open(out / "predictions.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("line,label,margin\n")
        fh.writelines(f"{i},{p},{m:.6f}\n" for i, (p, m) in enumerate(zip(pred, margins), 1))
    outputs = ["predictions.csv"]
    if docs and all(label is not None for label in labels):
        report = classification_report(labels, pred)
        with open(out / "report.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_csv())
        with open(out / "report.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{report}\n")
        outputs += ["report.csv", "report.txt"]
    return outputs


def _experiment(stages):
    def run(args, out):
        with open(args.config, encoding="utf-8") as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ReviewForgeError(f"{args.config}: invalid JSON ({exc.msg})") from exc
        if args.seed is not None:
            cfg["seed"] = args.seed
        run_experiment(cfg, out, n_jobs=args.jobs, stages=stages)
        return sorted(str(p.relative_to(out)) for p in out.rglob("*")
                      if p.is_file() and p.name != MANIFEST)
    return run


def cmd_replay(args, out):
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = replay_argv(manifest, out)
    code = dispatch(argv)
    if code:
        raise ReviewForgeError(f"replayed run exited with {code}")
    return []


def replay_argv(manifest, out_dir):
    """Command line that re-runs ``manifest`` into ``out_dir``."""
    return list(manifest["argv"]) + ["--out", str(out_dir)]


# --- parser --------------------------------------------------------------------


def _add_common(p, seed=True, jobs=False):
    p.add_argument("--out", required=True, help="run directory for all outputs (created if needed)")
    if seed:
        p.add_argument("--seed", type=int, default=None,
                       help=f"random seed (default: ${SEED_ENV}, then the config's seed or 0)")
    if jobs:
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel workers (default: available cores); outputs do not depend on it")


def _add_obfuscation(p, default=0.0):
    p.add_argument("--p-typo", type=float, default=default, help="per-word keyboard typo probability")
    p.add_argument("--p-spell", type=float, default=default, help="per-word common misspelling probability")
    p.add_argument("--rules", help='spelling rules file, "correct<TAB>misspelled" lines (default: bundled)')
    p.add_argument("--weights", help="keyboard edit-cost JSON (default: bundled QWERTY weights)")


def build_parser():
    parser = _Parser(prog="reviewforge", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"reviewforge {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    sub.required = True
    parser.commands = sub.choices

    p = sub.add_parser("make-corpus", help="write a synthetic restaurant review corpus as JSON lines")
    p.add_argument("--n-reviews", type=int, default=60000, help="number of reviews (default: 60000)")
    p.add_argument("--n-businesses", type=int, default=400, help="number of businesses (default: 400)")
    _add_common(p)
    p.set_defaults(func=cmd_make_corpus)

    p = sub.add_parser("preprocess", help="clean JSON-lines reviews into aligned train/val/test files")
    p.add_argument("--input", required=True, help="JSON-lines review file")
    p.add_argument("--field-map", help="JSON map from record fields to input keys")
    p.add_argument("--keep-tags", default="Restaurants",
                   help='comma-separated business tags to keep; "" keeps all (default: Restaurants)')
    p.add_argument("--max-length", type=int, default=50, help="drop reviews longer than this many tokens")
    p.add_argument("--n-val", type=int, default=500, help="validation pairs (default: 500)")
    p.add_argument("--n-test", type=int, default=3500, help="test pairs (default: 3500)")
    p.add_argument("--min-frequency", type=int, default=10, help="vocabulary cutoff (default: 10)")
    _add_common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train-lm", help="fit the conditional n-gram language model")
    p.add_argument("--contexts", required=True, help="context file, one per line")
    p.add_argument("--reviews", required=True, help="review file aligned with --contexts")
    p.add_argument("--vocab", help="fixed vocabulary file (default: built from the training pairs)")
    p.add_argument("--order", type=int, default=4, help="n-gram order (default: 4)")
    p.add_argument("--discount", type=float, default=0.75, help="absolute discount D (default: 0.75)")
    p.add_argument("--min-frequency", type=int, default=10, help="vocabulary cutoff (default: 10)")
    p.add_argument("--val-contexts", help="validation contexts for a perplexity report")
    p.add_argument("--val-reviews", help="validation reviews for a perplexity report")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("generate", help="generate one review per context with penalized greedy decoding")
    p.add_argument("--lm", required=True, help="model file written by train-lm")
    p.add_argument("--contexts", required=True, help="context file, one per line")
    p.add_argument("--b", type=float, default=0.3, help="Bernoulli mask probability b (default: 0.3)")
    p.add_argument("--lambda", dest="lam", type=float, default=-5.0,
                   help="log-likelihood penalty lambda <= 0 (default: -5)")
    p.add_argument("--alpha", type=float, default=2.0 / 3.0,
                   help="start-penalty decay per step (default: 2/3)")
    p.add_argument("--min-len", type=int, default=10, help="minimum review length in tokens (default: 10)")
    p.add_argument("--max-len", type=int, default=50, help="maximum review length in tokens (default: 50)")
    p.add_argument("--grammar", help="grammar token file receiving half penalties (default: bundled)")
    _add_obfuscation(p)
    _add_common(p, jobs=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("obfuscate", help="inject misspellings and keyboard typos into a review file")
    p.add_argument("--input", required=True, help="review file, one tokenized review per line")
    p.add_argument("--dictionary", help="vocabulary file whose words get the real-word bonus")
    _add_obfuscation(p, default=0.01)
    _add_common(p)
    p.set_defaults(func=cmd_obfuscate)

    p = sub.add_parser("train-detector", help="train the boosted-tree detector on label<TAB>text data")
    p.add_argument("--input", required=True, help='TSV of "label<TAB>text", labels human/machine')
    p.add_argument("--groups", default="readability,pos_unigrams,pos_ngrams,word_unigrams",
                   help=f"comma-separated feature groups from {','.join(FEATURE_GROUPS)}")
    p.add_argument("--n-estimators", type=int, default=200, help="boosting rounds (default: 200)")
    p.add_argument("--max-depth", type=int, default=2, help="tree depth (default: 2)")
    p.add_argument("--min-df", type=int, default=2, help="minimum document frequency (default: 2)")
    p.add_argument("--max-features", type=int, default=2000, help="columns per n-gram group (default: 2000)")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_train_detector)

    p = sub.add_parser("detect", help="label reviews with a trained detector")
    p.add_argument("--model", required=True, help="detector file written by train-detector")
    p.add_argument("--input", required=True,
                   help='TSV of "label<TAB>text" or plain text lines; labels enable a report')
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_detect)

    for name, stages, text in (
        ("sweep", ("sweep",), "generate every (b, lambda) cell and report diversity"),
        ("transfer", ("transfer",), "cross-category detection matrix"),
        ("report", ("sweep", "detector", "transfer"), "run every experiment stage and write reports"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="experiment JSON config")
        _add_common(p, jobs=True)
        p.set_defaults(func=_experiment(stages))

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("--manifest", required=True, help="manifest.json of an earlier run")
    p.add_argument("--out", required=True, help="run directory for the replayed outputs")
    p.set_defaults(func=cmd_replay)
    return parser


def _validate(args):
    """Range checks that argparse types cannot express; failures are usage errors."""
    try:
        if args.command == "generate":
            GenerationParams(b=args.b, lam=args.lam, alpha=args.alpha,
                             min_len=args.min_len, max_len=args.max_len)
        for name in ("p_typo", "p_spell"):
            value = getattr(args, name, None)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"--{name.replace('_', '-')} must be in [0, 1]")
        if getattr(args, "groups", None):
            bad = set(args.groups.split(",")) - set(FEATURE_GROUPS)
            if bad:
                raise ValueError(f"unknown feature groups {sorted(bad)}")
        if getattr(args, "jobs", 1) < 1:
            raise ValueError("--jobs must be positive")
    except ValueError as exc:
        raise UsageError(f"reviewforge {args.command}: error: {exc}") from exc


def _resolve(args):
    if hasattr(args, "seed") and args.seed is None:
        env = os.environ.get(SEED_ENV)
        if env:
            try:
                args.seed = int(env)
            except ValueError as exc:
                raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
        elif not hasattr(args, "config"):
            args.seed = 0
        # experiment commands without an explicit seed use the config's
    if getattr(args, "jobs", 0) is None:
        args.jobs = _default_jobs()


_INPUT_FLAGS = ("input", "contexts", "reviews", "vocab", "val_contexts", "val_reviews", "lm",
                "model", "config", "field_map", "grammar", "rules", "weights", "dictionary")
# flags that never change outputs and are left out of the replay command line
_RUNTIME_FLAGS = ("out", "jobs", "func", "command")


def _manifest(args, argv):
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    inputs = {}
    for name in _INPUT_FLAGS:
        path = getattr(args, name, None)
        if path:
            inputs[name] = {"path": str(Path(path).resolve()), "sha256": _file_hash(path)}
    replay = [args.command]
    for action in build_parser().commands[args.command]._actions:
        dest = action.dest
        if not action.option_strings or dest in _RUNTIME_FLAGS or dest == "help":
            continue
        value = getattr(args, dest, None)
        if value is None:
            continue
        if dest in _INPUT_FLAGS:
            value = str(Path(value).resolve())
        replay += [action.option_strings[0], str(value)]
    return {
        "tool": "reviewforge",
        "version": __version__,
        "subcommand": args.command,
        "argv": replay,
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "outputs": {},
        "status": "running",
    }


def _write_manifest(out, manifest):
    with open(out / MANIFEST, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def dispatch(argv=None):
    """Run one subcommand and return its exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _resolve(args)
        _validate(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    out = Path(args.out)
    try:
        if args.command == "replay":
            args.func(args, out)
            return 0
        manifest = _manifest(args, argv)
        out.mkdir(parents=True, exist_ok=True)
        _write_manifest(out, manifest)
        outputs = args.func(args, out)
        manifest["outputs"] = {name: _file_hash(out / name) for name in outputs}
        manifest["status"] = "ok"
        _write_manifest(out, manifest)
    except (ReviewForgeError, OSError, ValueError) as exc:
        print(f"reviewforge {args.command}: {exc}", file=sys.stderr)
        if args.command != "replay" and (out / MANIFEST).exists():
            manifest["status"] = f"error: {exc}"
            _write_manifest(out, manifest)
        return 2
    return 0


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
