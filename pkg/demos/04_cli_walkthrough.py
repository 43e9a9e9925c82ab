"""The command-line workflow on a generated corpus, in a temporary directory.

Equivalent shell session::

    sentimix preprocess --input train.txt --output train.clean.txt
    sentimix train --train train.txt --valid valid.txt --embeddings emb.txt --out runs --seed 0
    sentimix eval --checkpoint runs/<stamp>-seed0/model.ckpt --test test.txt --embeddings emb.txt
    sentimix predict --checkpoint ... --input unseen.txt --output labeled.txt --embeddings emb.txt
    sentimix grid --model lstm_char --set 'grid.lr=[0.003,0.01]' ...

Run with ``python demos/04_cli_walkthrough.py``.
"""
import contextlib
import io
import json
import tempfile
from pathlib import Path

from sentimix.cli import main
from sentimix.corpus import save_dataset
from sentimix.features import write_embeddings
from sentimix.synthetic import make_corpus, make_unseen


def run(*argv):
    print("$ sentimix", " ".join(argv))
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(out):
        code = main(list(argv))
    text = out.getvalue()
    print(text if len(text) < 2000 else text[:2000] + "...\n", end="")
    print(f"(exit {code})\n")
    return text


with tempfile.TemporaryDirectory() as tmp:
    d = Path(tmp)
    train, valid, test, emb = make_corpus(0)
    for name, ds in (("train", train), ("valid", valid), ("test", test), ("unseen", make_unseen(5))):
        save_dataset(ds, d / f"{name}.txt")
    (d / "emb.txt").write_text(write_embeddings(emb), encoding="utf-8")
    (d / "config.json").write_text(json.dumps({
        "paths": {"train": str(d / "train.txt"), "valid": str(d / "valid.txt"),
                  "test": str(d / "test.txt"), "embeddings": str(d / "emb.txt"), "output_dir": str(d / "runs")},
        "model": {"spec": {"embed_dim": 64, "hidden": 32, "fc_hidden": 32}},
        "train": {"lr": 0.003, "epochs": 15, "word_dropout": 0.3},
    }), encoding="utf-8")
    cfg = ["--config", str(d / "config.json")]

    run("preprocess", *cfg, "--output", str(d / "train.clean.txt"))
    out = run("train", *cfg, "--seed", "0")
    ckpt = out.split("run_dir=")[1].split()[0] + "/model.ckpt"
    run("eval", *cfg, "--checkpoint", ckpt)
    run("predict", *cfg, "--checkpoint", ckpt, "--input", str(d / "unseen.txt"), "--output", str(d / "labeled.txt"))
    print((d / "labeled.txt").read_text(encoding="utf-8"))

    # a classical baseline through the same interface, overriding the config file
    out = run("train", *cfg, "--model", "logistic", "--set", "train={\"lr\": 2.0, \"epochs\": 300}")
    run("eval", *cfg, "--checkpoint", out.split("run_dir=")[1].split()[0] + "/model.ckpt")

    run("grid", *cfg, "--model", "lstm_char", "--set", "grid.lr=[0.003, 0.01]",
        "--set", "grid.n_layers=[1]", "--set", "grid.epochs=[3]")

    # errors are one line on stderr with a nonzero exit
    run("eval", *cfg, "--checkpoint", str(d / "missing.ckpt"))
