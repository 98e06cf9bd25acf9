import json
import subprocess
import sys

import pytest

from reviewforge.cli import MANIFEST, build_parser, dispatch
from reviewforge.utils import sha256_hex


def run(*argv):
    return dispatch([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """A tiny make-corpus -> preprocess -> train-lm chain shared by the tests below."""
    root = tmp_path_factory.mktemp("cli")
    assert run("make-corpus", "--n-reviews", 2500, "--n-businesses", 30, "--seed", 3, "--out", root / "c") == 0
    assert run("preprocess", "--input", root / "c" / "reviews.jsonl", "--n-val", 50, "--n-test", 200,
               "--min-frequency", 3, "--out", root / "p") == 0
    assert run("train-lm", "--contexts", root / "p" / "context-train.txt",
               "--reviews", root / "p" / "reviews-train.txt", "--vocab", root / "p" / "vocab.tsv",
               "--val-contexts", root / "p" / "context-val.txt", "--val-reviews", root / "p" / "reviews-val.txt",
               "--out", root / "m") == 0
    return root


def manifest(path):
    return json.loads((path / MANIFEST).read_text())


class TestUsage:
    def test_help_lists_subcommands(self, capsys):
        assert run("--help") == 0
        text = capsys.readouterr().out
        for name in ("preprocess", "train-lm", "generate", "obfuscate", "train-detector", "detect",
                     "sweep", "transfer", "report"):
            assert name in text

    def test_subcommand_help(self, capsys):
        assert run("generate", "--help") == 0
        assert "--lambda" in capsys.readouterr().out

    def test_unknown_subcommand(self, tmp_path):
        assert run("frobnicate", "--out", tmp_path / "x") == 1
        assert not (tmp_path / "x").exists()

    def test_missing_flag(self, tmp_path):
        assert run("generate", "--contexts", "c.txt", "--out", tmp_path / "x") == 1
        assert not (tmp_path / "x").exists()

    @pytest.mark.parametrize("flags", [["--b", 1.5], ["--lambda", 2], ["--min-len", 60], ["--p-typo", 2]])
    def test_out_of_range(self, tmp_path, flags):
        assert run("generate", "--lm", "m.bin", "--contexts", "c.txt", *flags, "--out", tmp_path / "x") == 1
        assert not (tmp_path / "x").exists()

    def test_bad_groups(self, tmp_path):
        assert run("train-detector", "--input", "x.tsv", "--groups", "liwc", "--out", tmp_path / "x") == 1

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "reviewforge.cli", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("reviewforge ")

    def test_every_subcommand_has_out(self):
        for name, sub in build_parser().commands.items():
            assert any(a.dest == "out" for a in sub._actions), name


class TestDataErrors:
    def test_missing_model(self, tmp_path):
        (tmp_path / "c.txt").write_text("5 some place az\n")
        code = run("generate", "--lm", tmp_path / "nope.bin", "--contexts", tmp_path / "c.txt",
                   "--out", tmp_path / "x")
        assert code == 2
        m = manifest(tmp_path / "x")
        assert m["status"].startswith("error")
        assert m["inputs"]["lm"]["sha256"] is None

    def test_bad_label(self, tmp_path):
        (tmp_path / "d.tsv").write_text("human\tgood food .\nrobot\tfood good .\n")
        assert run("train-detector", "--input", tmp_path / "d.tsv", "--out", tmp_path / "x") == 2
        assert "line" not in manifest(tmp_path / "x")["outputs"]


class TestPipeline:
    def test_preprocess_outputs(self, pipeline):
        p = pipeline / "p"
        for tag in ("train", "val", "tst"):
            c = (p / f"context-{tag}.txt").read_text().splitlines()
            r = (p / f"reviews-{tag}.txt").read_text().splitlines()
            assert len(c) == len(r) > 0
        assert len((p / "context-tst.txt").read_text().splitlines()) == 200
        assert (p / "vocab.tsv").read_text().splitlines()[0].split("\t")[0] == "<unk>"

    def test_manifest_records_inputs_and_outputs(self, pipeline):
        m = manifest(pipeline / "m")
        assert m["status"] == "ok" and m["subcommand"] == "train-lm"
        assert m["inputs"]["contexts"]["sha256"] == sha256_hex((pipeline / "p" / "context-train.txt").read_bytes())
        assert set(m["outputs"]) == {"lm.bin", "vocab.tsv", "lm.json"}
        assert m["outputs"]["lm.bin"] == sha256_hex((pipeline / "m" / "lm.bin").read_bytes())
        assert "perplexity_val" in json.loads((pipeline / "m" / "lm.json").read_text())

    def test_generate_contract(self, pipeline, tmp_path):
        ctx = pipeline / "p" / "context-tst.txt"
        assert run("generate", "--lm", pipeline / "m" / "lm.bin", "--contexts", ctx,
                   "--seed", 4, "--out", tmp_path / "g") == 0
        lines = (tmp_path / "g" / "reviews.txt").read_text().splitlines()
        assert len(lines) == 200
        meta = json.loads((tmp_path / "g" / "reviews.meta.json").read_text())
        assert meta["seed"] == 4 and meta["params"]["b"] == 0.3 and meta["params"]["lam"] == -5.0
        assert len(meta["mask_digests"]) == 200
        assert manifest(tmp_path / "g")["argv"][0] == "generate"

    def test_seed_env_fallback(self, pipeline, tmp_path, monkeypatch):
        ctx = pipeline / "p" / "context-val.txt"
        lm = pipeline / "m" / "lm.bin"
        assert run("generate", "--lm", lm, "--contexts", ctx, "--seed", 7, "--out", tmp_path / "a") == 0
        monkeypatch.setenv("REVIEWFORGE_SEED", "7")
        assert run("generate", "--lm", lm, "--contexts", ctx, "--out", tmp_path / "b") == 0
        assert manifest(tmp_path / "b")["seed"] == 7
        assert (tmp_path / "a" / "reviews.txt").read_bytes() == (tmp_path / "b" / "reviews.txt").read_bytes()
        monkeypatch.setenv("REVIEWFORGE_SEED", "seven")
        assert run("generate", "--lm", lm, "--contexts", ctx, "--out", tmp_path / "c") == 1

    def test_jobs_do_not_change_output(self, pipeline, tmp_path):
        ctx = pipeline / "p" / "context-val.txt"
        lm = pipeline / "m" / "lm.bin"
        assert run("generate", "--lm", lm, "--contexts", ctx, "--jobs", 1, "--out", tmp_path / "a") == 0
        assert run("generate", "--lm", lm, "--contexts", ctx, "--jobs", 2, "--out", tmp_path / "b") == 0
        assert (tmp_path / "a" / "reviews.txt").read_bytes() == (tmp_path / "b" / "reviews.txt").read_bytes()

    def test_detector_round_trip(self, pipeline, tmp_path):
        human = (pipeline / "p" / "reviews-tst.txt").read_text().splitlines()
        assert run("generate", "--lm", pipeline / "m" / "lm.bin", "--contexts", pipeline / "p" / "context-tst.txt",
                   "--out", tmp_path / "g") == 0
        fake = (tmp_path / "g" / "reviews.txt").read_text().splitlines()
        rows = [f"human\t{t}" for t in human[:150]] + [f"machine\t{t}" for t in fake[:150]]
        (tmp_path / "train.tsv").write_text("\n".join(rows) + "\n")
        assert run("train-detector", "--input", tmp_path / "train.tsv", "--n-estimators", 20,
                   "--out", tmp_path / "d") == 0
        held = [f"human\t{t}" for t in human[150:]] + [f"machine\t{t}" for t in fake[150:]]
        (tmp_path / "held.tsv").write_text("\n".join(held) + "\n")
        assert run("detect", "--model", tmp_path / "d" / "detector.bin", "--input", tmp_path / "held.tsv",
                   "--out", tmp_path / "e") == 0
        pred = (tmp_path / "e" / "predictions.csv").read_text().splitlines()
        assert pred[0] == "line,label,margin" and len(pred) == 101
        assert (tmp_path / "e" / "report.csv").exists()
        # unlabeled input gives predictions only
        (tmp_path / "raw.txt").write_text("\n".join(fake[150:]) + "\n")
        assert run("detect", "--model", tmp_path / "d" / "detector.bin", "--input", tmp_path / "raw.txt",
                   "--out", tmp_path / "f") == 0
        assert not (tmp_path / "f" / "report.csv").exists()

    def test_obfuscate_zero_is_identity(self, pipeline, tmp_path):
        src = pipeline / "p" / "reviews-val.txt"
        assert run("obfuscate", "--input", src, "--p-typo", 0, "--p-spell", 0, "--out", tmp_path / "o") == 0
        assert (tmp_path / "o" / "reviews.txt").read_bytes() == src.read_bytes()

    def test_replay(self, pipeline, tmp_path):
        assert run("replay", "--manifest", pipeline / "m" / MANIFEST, "--out", tmp_path / "r") == 0
        for name in ("lm.bin", "vocab.tsv", "lm.json"):
            assert (tmp_path / "r" / name).read_bytes() == (pipeline / "m" / name).read_bytes()
        assert manifest(tmp_path / "r")["argv"] == manifest(pipeline / "m")["argv"]
