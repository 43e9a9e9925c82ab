"""Mini-batch training with early stopping, and grid search over hyperparameters."""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .. import autodiff as ad
from ..corpus import Dataset
from ..features import EmbeddingTable
from ..metrics import Metrics, evaluate
from .model import CharVocab, ModelSpec, SsLstmModel, drop_words

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NeuralTrainConfig:
    lr: float = 1e-3
    epochs: int = 30
    batch_size: int = 32
    patience: int = 5
    clip_norm: float = 5.0
    dropout: float = 0.0
    word_dropout: float = 0.0
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0 or self.epochs < 0 or self.batch_size < 1 or self.patience < 0:
            raise ValueError(f"invalid training configuration {self}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    valid: Metrics

    def log_line(self) -> str:
        v = self.valid
        return (f"epoch={self.epoch} train_loss={self.train_loss:.6f} "
                f"valid_precision={v.weighted_precision:.4f} valid_recall={v.weighted_recall:.4f} "
                f"valid_f1={v.weighted_f1:.4f} valid_macro_f1={v.macro_f1:.4f}")


@dataclass
class History:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1  # 0-based; -1 when no epoch ran

    def log_text(self) -> str:
        return "".join(rec.log_line() + "\n" for rec in self.epochs)


def _labels(d: Dataset) -> list:
    if any(tw.label is None for tw in d.tweets):
        raise ValueError("training and validation data must be labeled")
    return [tw.label.index for tw in d.tweets]


def evaluate_model(model: SsLstmModel, d: Dataset, batch_size: int = 64) -> Metrics:
    return evaluate(list(model.predict(d.tweets, batch_size)), _labels(d))


def train_model(spec: ModelSpec, train: Dataset, valid: Dataset, cfg: NeuralTrainConfig,
                embeddings: EmbeddingTable | None = None) -> tuple[SsLstmModel, History]:
    """Train from scratch; the returned model holds the best-validation parameters.

    Early stopping tracks validation macro-F1 and stops once ``patience``
    epochs in a row fail to improve on the best.
    """
    if len(train) == 0 or len(valid) == 0:
        raise ValueError("training and validation sets must be non-empty")
    gold = np.array(_labels(train))
    _labels(valid)
    rng = np.random.default_rng(cfg.seed)
    init_seed = int(rng.integers(2 ** 63))
    model = SsLstmModel(spec, CharVocab.build(train.tweets), embeddings, seed=init_seed)
    params = model.parameters()
    opt = ad.make_optimizer(cfg.optimizer, params, cfg.lr)
    history = History()
    best_f1, best_state, stale = -1.0, None, 0
    tweets = train.tweets
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(tweets))
        total, count = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            batch = model.encode([tweets[i] for i in idx], gold[idx])
            batch = drop_words(batch, cfg.word_dropout, rng)
            loss = model.loss(batch, cfg.dropout, rng)
            ad.zero_grad(params)
            loss.backward()
            if cfg.clip_norm:
                ad.clip_grad_norm(params, cfg.clip_norm)
            opt.step()
            total += loss.item() * len(idx)
            count += len(idx)
        rec = EpochRecord(epoch, total / count, evaluate_model(model, valid))
        history.epochs.append(rec)
        log.info(rec.log_line())
        if rec.valid.macro_f1 > best_f1:
            best_f1, best_state, stale = rec.valid.macro_f1, model.state_dict(), 0
            history.best_epoch = epoch
        else:
            stale += 1
            if stale > cfg.patience:
                break
    if best_state is not None:
        model.load_state_dict(best_state)
    ad.zero_grad(params)
    return model, history


@dataclass
class GridCell:
    index: int
    lr: float
    n_layers: int
    epochs: int
    seed: int
    valid: Metrics | None = None
    best_epoch: int = -1

    def row(self) -> str:
        v = self.valid
        return (f"{self.index}\t{self.lr:g}\t{self.n_layers}\t{self.epochs}\t{self.seed}\t"
                f"{v.weighted_precision:.4f}\t{v.weighted_recall:.4f}\t{v.weighted_f1:.4f}\t"
                f"{v.macro_f1:.4f}")


GRID_HEADER = "cell\tlr\tn_layers\tepochs\tseed\tvalid_precision\tvalid_recall\tvalid_f1\tvalid_macro_f1"


@dataclass
class GridResult:
    cells: list[GridCell]
    best: GridCell
    best_model: SsLstmModel

    def report(self) -> str:
        return GRID_HEADER + "\n" + "".join(c.row() + "\n" for c in self.cells)


def cell_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)[0])


def grid_search(space: dict[str, Sequence], spec: ModelSpec, train: Dataset, valid: Dataset,
                cfg: NeuralTrainConfig, embeddings: EmbeddingTable | None = None,
                n_jobs: int = 1) -> GridResult:
    """Train every combination of ``space['lr']``, ``['n_layers']`` and ``['epochs']``.

    Missing keys fall back to the base spec/config. The winner has the best
    validation weighted F1; ties go to the earlier cell.
    """
    lrs = list(space.get("lr", [cfg.lr]))
    layers = list(space.get("n_layers", [spec.n_layers]))
    epochs = list(space.get("epochs", [cfg.epochs]))
    combos = list(itertools.product(lrs, layers, epochs))
    if not combos:
        raise ValueError("grid search space is empty")
    cells = [GridCell(i, lr, nl, ep, cell_seed(cfg.seed, i)) for i, (lr, nl, ep) in enumerate(combos)]

    def run(cell: GridCell):
        # patience is lifted so each cell trains for its stated epoch budget
        ccfg = replace(cfg, lr=cell.lr, epochs=cell.epochs, seed=cell.seed, patience=cell.epochs)
        model, hist = train_model(replace(spec, n_layers=cell.n_layers), train, valid, ccfg, embeddings)
        cell.valid = evaluate_model(model, valid)
        cell.best_epoch = hist.best_epoch
        return model

    if embeddings is not None:
        embeddings.index  # build the lookup once, before any worker thread
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            models = list(pool.map(run, cells))
    else:
        models = [run(c) for c in cells]
    best = max(cells, key=lambda c: (c.valid.weighted_f1, -c.index))
    return GridResult(cells, best, models[best.index])
