"""Train, evaluate and apply sentiment models for code-mixed tweets.

Subcommands: ``preprocess``, ``train``, ``eval``, ``predict`` and ``grid``.

Settings come from, in increasing precedence: built-in defaults, the JSON
file given by ``--config``, ``--set section.key=value`` overrides, and the
dedicated flags (``--seed``, ``--train``, ``--epochs``, ...).
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import autodiff as ad
from . import classical
from .corpus import Dataset, LABELS, SentimentLabel, Split, read_dataset, save_dataset, write_dataset
from .features import TfIdfModel, Vocabulary, featurize, fit_tfidf, read_embeddings
from .metrics import evaluate, results_records, results_table
from .neural import ModelSpec, NeuralTrainConfig, SsLstmModel, grid_search, train_model
from .preprocess import PreprocessConfig, clean_dataset

log = logging.getLogger("sentimix")

NEURAL_KINDS = {"ss_lstm": ("char", "word"), "lstm_char": ("char",), "lstm_word": ("word",)}
CLASSICAL_KINDS = {"logistic", "svm", "mlp"}
REPRESENTATION_NAMES = {"tfidf": "TF-IDF avg", "embedding_mean": "Glove avg",
                        "tfidf_embedding": "TF-IDF and Glove avg"}

DEFAULTS = {
    "seed": 0,
    "paths": {"train": None, "valid": None, "test": None, "embeddings": None,
              "stopwords": None, "output_dir": "runs"},
    "preprocess": {},
    "model": {"kind": "ss_lstm", "representation": "tfidf", "spec": {}},
    "train": {},
    "grid": {"lr": [1e-3, 3e-3], "n_layers": [1, 2], "epochs": [10, 20]},
}


class CliError(Exception):
    pass


# configuration

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set_path(cfg: dict, dotted: str, value):
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise CliError(f"--set {dotted}: {k!r} is not a section")
    node[keys[-1]] = value


def load_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = _merge(cfg, json.load(fh))
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.config}: invalid JSON ({exc})") from None
    for item in args.set or []:
        if "=" not in item:
            raise CliError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        _set_path(cfg, key, _parse_value(value))
    flag_paths = {"seed": "seed", "train": "paths.train", "valid": "paths.valid", "test": "paths.test",
                  "embeddings": "paths.embeddings", "stopwords": "paths.stopwords",
                  "out": "paths.output_dir", "model": "model.kind", "representation": "model.representation",
                  "epochs": "train.epochs", "lr": "train.lr"}
    for attr, dotted in flag_paths.items():
        value = getattr(args, attr, None)
        if value is not None:
            _set_path(cfg, dotted, value)
    seed = cfg["seed"]
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise CliError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return cfg


def preprocess_config(cfg: dict) -> PreprocessConfig:
    d = dict(cfg["preprocess"])
    if cfg["paths"].get("stopwords"):
        d["stopwords_file"] = cfg["paths"]["stopwords"]
    try:
        return PreprocessConfig.from_dict(d)
    except TypeError as exc:
        raise CliError(f"preprocess section: {exc}") from None


def preprocess_to_dict(p: PreprocessConfig) -> dict:
    d = asdict(p)
    d["stopwords"] = sorted(p.stopwords)
    return d


def _known_fields(cls, d: dict, section: str) -> dict:
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise CliError(f"{section} section: unknown keys {sorted(unknown)}")
    return d


def _path(cfg, key, required=True):
    p = cfg["paths"].get(key)
    if p is None:
        if required:
            raise CliError(f"no {key} file configured (paths.{key} or --{key})")
        return None
    if not Path(p).exists():
        raise CliError(f"{key} file not found: {p}")
    return p


def _load(cfg, key, pcfg, expect_labels=True, split=None) -> Dataset:
    return clean_dataset(read_dataset(_path(cfg, key), expect_labels, split), pcfg)


def _embeddings(cfg, required: bool):
    p = _path(cfg, "embeddings", required)
    return read_embeddings(p) if p else None


def run_dir(cfg) -> Path:
    base = Path(cfg["paths"]["output_dir"])
    stamp = time.strftime("%Y%m%d-%H%M%S")
    d = base / f"{stamp}-seed{cfg['seed']}"
    n = 1
    while d.exists():
        d = base / f"{stamp}-seed{cfg['seed']}-{n}"
        n += 1
    d.mkdir(parents=True)
    return d


# model construction

def _neural_parts(cfg):
    kind = cfg["model"]["kind"]
    spec_d = dict(cfg["model"].get("spec", {}))
    spec_d["branches"] = NEURAL_KINDS[kind]
    spec = ModelSpec.from_dict(spec_d)
    train_d = _known_fields(NeuralTrainConfig, dict(cfg["train"]), "train")
    tcfg = NeuralTrainConfig(**{**train_d, "seed": cfg["seed"]})
    return spec, tcfg


def _classical_features(cfg, tfidf, emb, tweets):
    rep = cfg["model"]["representation"]
    if rep not in REPRESENTATION_NAMES:
        raise CliError(f"unknown representation {rep!r}")
    if rep != "tfidf" and emb is None:
        raise CliError(f"representation {rep!r} needs an embedding file")
    return featurize(tweets, rep, tfidf, emb)


def _vocab_meta(v: Vocabulary) -> dict:
    toks = v.tokens
    return {"tokens": toks, "df": [v.document_frequency[t] for t in toks], "n_documents": v.n_documents}


def _vocab_from_meta(d: dict) -> Vocabulary:
    return Vocabulary({t: i for i, t in enumerate(d["tokens"])}, dict(zip(d["tokens"], d["df"])),
                      d["n_documents"])


def train_from_config(cfg: dict):
    """Train the configured model; returns ``(checkpoint bytes, metrics log text, valid metrics)``."""
    kind = cfg["model"]["kind"]
    pcfg = preprocess_config(cfg)
    train = _load(cfg, "train", pcfg, split=Split.TRAIN)
    valid = _load(cfg, "valid", pcfg, split=Split.VALID)
    meta_pre = preprocess_to_dict(pcfg)
    if kind in NEURAL_KINDS:
        spec, tcfg = _neural_parts(cfg)
        emb = _embeddings(cfg, "word" in spec.branches)
        model, hist = train_model(spec, train, valid, tcfg, emb if "word" in spec.branches else None)
        meta = model.checkpoint_meta()
        meta["preprocess"] = meta_pre
        blob = ad.dump_checkpoint(model.state_dict(), meta)
        vm = hist.epochs[hist.best_epoch].valid if hist.epochs else evaluate(
            list(model.predict(valid.tweets)), valid.labels)
        return blob, hist.log_text(), vm
    if kind in CLASSICAL_KINDS:
        rep = cfg["model"]["representation"]
        emb = _embeddings(cfg, rep != "tfidf")
        tfidf = fit_tfidf(train.tweets)
        X = _classical_features(cfg, tfidf, emb, train.tweets)
        y = np.array([tw.label.index for tw in train.tweets])
        tcfg = classical.TrainConfig(**{**_known_fields(classical.TrainConfig, dict(cfg["train"]), "train"),
                                        "seed": cfg["seed"]})
        model, hist = classical.fit(kind, X, y, tcfg)
        vm = evaluate(classical.predict(model, _classical_features(cfg, tfidf, emb, valid.tweets)), valid.labels)
        meta = classical.checkpoint_meta(model, {
            "representation": rep, "vocabulary": _vocab_meta(tfidf.vocabulary), "preprocess": meta_pre,
            "embeddings": None if emb is None else {"dim": emb.dim, "fingerprint": emb.fingerprint()},
        })
        blob = ad.dump_checkpoint(model.params(), meta)
        log_text = "".join(f"epoch={i} train_loss={loss:.6f}\n" for i, loss in enumerate(hist.loss))
        log_text += (f"final valid_precision={vm.weighted_precision:.4f} valid_recall={vm.weighted_recall:.4f} "
                     f"valid_f1={vm.weighted_f1:.4f} valid_macro_f1={vm.macro_f1:.4f}\n")
        return blob, log_text, vm
    raise CliError(f"unknown model kind {kind!r}")


class LoadedModel:
    """A checkpoint plus everything needed to score raw tweets with it."""

    def __init__(self, path, cfg):
        try:
            params, meta = ad.load_checkpoint(path)
        except OSError as exc:
            raise CliError(f"cannot read checkpoint: {exc}") from None
        self.meta = meta
        self.pcfg = PreprocessConfig.from_dict(meta.get("preprocess", {}))
        if meta.get("kind") == "neural":
            spec = ModelSpec.from_dict(meta["spec"])
            emb = _embeddings(cfg, "word" in spec.branches)
            self.model = SsLstmModel.from_checkpoint(params, meta, emb)
            self.name = {("char", "word"): "SS-LSTM"}.get(spec.branches, "LSTM")
            self.representation = {("char", "word"): "FastText and 1D-CNN", ("char",): "1D-CNN",
                                   ("word",): "FastText"}[spec.branches]
        elif meta.get("kind") == "classical":
            self.model = classical.model_from_checkpoint(params, meta)
            self.tfidf = fit_tfidf(_vocab_from_meta(meta["vocabulary"]))
            self.emb = None
            if meta.get("embeddings"):
                self.emb = _embeddings(cfg, True)
                if self.emb.fingerprint() != meta["embeddings"]["fingerprint"]:
                    raise CliError("embedding table does not match the one the checkpoint was trained with")
            self.name = {"logistic": "OvRLR", "svm": "SVM", "mlp": "MLP"}[meta["model"]]
            self.representation = REPRESENTATION_NAMES[meta["representation"]]
        else:
            raise CliError(f"unrecognized checkpoint kind {meta.get('kind')!r}")

    def predict_proba(self, d: Dataset) -> np.ndarray:
        tweets = clean_dataset(d, self.pcfg).tweets
        if self.meta["kind"] == "neural":
            return self.model.predict_proba(tweets)
        X = featurize(tweets, self.meta["representation"], self.tfidf, self.emb)
        if self.meta["model"] == "svm":
            # one-hot on the winning score: the hinge model has no probabilities
            return np.eye(len(LABELS))[np.argmax(self.model.scores(X), axis=1)]
        return self.model.predict_proba(X)


# subcommands

def cmd_preprocess(args, cfg):
    pcfg = preprocess_config(cfg)
    src = args.input or _path(cfg, "train")
    d = read_dataset(src, expect_labels=False)
    cleaned = clean_dataset(d, pcfg)
    before = sum(tw.n_tokens for tw in d.tweets)
    after = sum(tw.n_tokens for tw in cleaned.tweets)
    text = write_dataset(cleaned)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"tweets={len(d)} tokens_before={before} tokens_after={after}", file=sys.stderr)
    return {"tweets": len(d), "tokens_before": before, "tokens_after": after}


def cmd_train(args, cfg):
    blob, log_text, vm = train_from_config(cfg)
    out = run_dir(cfg)
    (out / "model.ckpt").write_bytes(blob)
    (out / "metrics.log").write_text(log_text, encoding="utf-8")
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"run_dir={out}")
    print(f"valid weighted_f1={vm.weighted_f1:.4f} macro_f1={vm.macro_f1:.4f}")
    return out


def cmd_eval(args, cfg):
    lm = LoadedModel(args.checkpoint, cfg)
    test = read_dataset(args.input or _path(cfg, "test"), expect_labels=True, split=Split.TEST)
    probs = lm.predict_proba(test)
    m = evaluate(list(np.argmax(probs, axis=1)), test.labels)
    rows = [(lm.name, lm.representation, m)]
    print(results_table(rows), end="")
    print(f"weighted_f1={m.weighted_f1:.4f} macro_f1={m.macro_f1:.4f} accuracy={m.accuracy:.4f}")
    for flag in m.flags:
        print(f"note: {flag}")
    if args.rows:
        Path(args.rows).write_text(results_records(rows), encoding="utf-8")
    return m


def cmd_predict(args, cfg):
    lm = LoadedModel(args.checkpoint, cfg)
    src = args.input or _path(cfg, "test")
    d = read_dataset(src, expect_labels=False)
    probs = lm.predict_proba(d)
    labeled = Dataset(tuple(
        type(tw)(tw.id, tw.tokens, SentimentLabel.from_index(int(i)))
        for tw, i in zip(d.tweets, np.argmax(probs, axis=1))), d.split)
    if args.output:
        save_dataset(labeled, args.output)
    else:
        sys.stdout.write(write_dataset(labeled))
    return probs


def cmd_grid(args, cfg):
    kind = cfg["model"]["kind"]
    if kind not in NEURAL_KINDS:
        raise CliError("grid search is defined for the LSTM models (ss_lstm, lstm_char, lstm_word)")
    pcfg = preprocess_config(cfg)
    train = _load(cfg, "train", pcfg, split=Split.TRAIN)
    valid = _load(cfg, "valid", pcfg, split=Split.VALID)
    spec, tcfg = _neural_parts(cfg)
    emb = _embeddings(cfg, "word" in spec.branches)
    space = {k: v for k, v in cfg["grid"].items() if k in ("lr", "n_layers", "epochs")}
    if not space or any(not v for v in space.values()):
        raise CliError("grid search space is empty")
    res = grid_search(space, spec, train, valid, tcfg, emb if "word" in spec.branches else None,
                      n_jobs=int(cfg["grid"].get("n_jobs", 1)))
    out = run_dir(cfg)
    (out / "grid.tsv").write_text(res.report(), encoding="utf-8")
    meta = res.best_model.checkpoint_meta()
    meta["preprocess"] = preprocess_to_dict(pcfg)
    ad.save_checkpoint(out / "model.ckpt", res.best_model.state_dict(), meta)
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(res.report(), end="")
    b = res.best
    print(f"best cell={b.index} lr={b.lr:g} n_layers={b.n_layers} epochs={b.epochs} "
          f"valid_f1={b.valid.weighted_f1:.4f}")
    print(f"run_dir={out}")
    return res


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    common.add_argument("--out", help="parent directory for run directories")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry, e.g. train.lr=0.003 (repeatable)")
    common.add_argument("--train", help="training file")
    common.add_argument("--valid", help="validation file")
    common.add_argument("--test", help="test file")
    common.add_argument("--embeddings", help="word2vec text-format vectors")
    common.add_argument("--stopwords", help="stopword list, one per line")
    common.add_argument("--model", help="ss_lstm, lstm_char, lstm_word, logistic, svm or mlp")
    common.add_argument("--representation", help="tfidf, embedding_mean or tfidf_embedding")
    common.add_argument("--epochs", type=int)
    common.add_argument("--lr", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sentimix", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("preprocess", parents=[common], help="clean a tweet file")
    sp.add_argument("--input")
    sp.add_argument("--output")
    sub.add_parser("train", parents=[common], help="train a model")
    sp = sub.add_parser("eval", parents=[common], help="score a checkpoint on labeled data")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--input", help="labeled file (default: paths.test)")
    sp.add_argument("--rows", help="also write one JSON record per model here")
    sp = sub.add_parser("predict", parents=[common], help="label an unlabeled file")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--input")
    sp.add_argument("--output")
    sub.add_parser("grid", parents=[common], help="grid search over lr, n_layers and epochs")
    return p


COMMANDS = {"preprocess": cmd_preprocess, "train": cmd_train, "eval": cmd_eval,
            "predict": cmd_predict, "grid": cmd_grid}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
        COMMANDS[args.command](args, cfg)
    except (CliError, ValueError, OSError, KeyError, IndexError, ad.CheckpointError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"sentimix {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
