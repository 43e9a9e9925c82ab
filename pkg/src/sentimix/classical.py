"""Classical baselines over fixed tweet vectors: one-vs-rest logistic
regression, a linear one-vs-rest SVM (hinge loss) and a one-hidden-layer MLP.

Linear models are trained by mini-batch (sub)gradient descent with closed-form
gradients; the MLP goes through the autodiff engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, glorot_uniform
from .corpus import LABELS, SentimentLabel
from .features import FeatureVector

KINDS = ("logistic", "svm", "mlp")
N_CLASSES = len(LABELS)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.1
    epochs: int = 100
    batch_size: int = 32
    l2_penalty: float = 0.0
    seed: int = 0
    hidden: int = 100  # MLP only

    def __post_init__(self):
        if self.lr <= 0 or self.epochs < 1 or self.batch_size < 1 or self.l2_penalty < 0:
            raise ValueError(f"invalid training configuration {self}")


@dataclass
class TrainHistory:
    loss: list[float] = field(default_factory=list)
    weight_norm: list[float] = field(default_factory=list)


def _softmax(z):
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


class LinearModel:
    """Three one-vs-rest scorers ``W @ x + b``."""

    def __init__(self, kind: str, W: np.ndarray, b: np.ndarray):
        if kind not in ("logistic", "svm"):
            raise ValueError(f"not a linear model kind: {kind!r}")
        self.kind, self.W, self.b = kind, W, b

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.W.T + self.b

    def predict_proba(self, X):
        if self.kind == "svm":
            raise TypeError("the hinge-loss SVM does not produce probabilities")
        return _softmax(self.scores(X))

    def params(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b}


class MlpModel:
    """``d -> hidden (relu) -> 3`` with softmax output."""

    kind = "mlp"

    def __init__(self, W1, b1, W2, b2):
        self.W1 = Parameter(W1, "W1")
        self.b1 = Parameter(b1, "b1")
        self.W2 = Parameter(W2, "W2")
        self.b2 = Parameter(b2, "b2")

    @property
    def dim(self) -> int:
        return self.W1.shape[0]

    def parameters(self):
        return [self.W1, self.b1, self.W2, self.b2]

    def logits(self, X) -> ad.Tensor:
        return ad.relu(ad.Tensor(X) @ self.W1 + self.b1) @ self.W2 + self.b2

    def scores(self, X):
        return self.logits(X).data

    def predict_proba(self, X):
        return _softmax(self.scores(X))

    def params(self):
        return {p.name: p.data for p in self.parameters()}


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, FeatureVector):
        return x.values[None, :]
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


def _check_dim(model, X):
    if X.shape[1] != model.dim:
        raise ValueError(f"feature vector has length {X.shape[1]}, model expects {model.dim}")


def predict_proba(model, f) -> np.ndarray:
    """Class probabilities, ``[3]`` for one vector or ``[n, 3]`` for a matrix."""
    X = _as_matrix(f)
    _check_dim(model, X)
    p = model.predict_proba(X)
    return p[0] if np.ndim(getattr(f, "values", f)) == 1 else p


def predict(model, f):
    """Highest-scoring class; ties go to the lower class index."""
    X = _as_matrix(f)
    _check_dim(model, X)
    idx = np.argmax(model.scores(X), axis=1)
    if np.ndim(getattr(f, "values", f)) == 1:
        return SentimentLabel.from_index(int(idx[0]))
    return [SentimentLabel.from_index(int(i)) for i in idx]


def _targets(y: np.ndarray) -> np.ndarray:
    """``[n, 3]`` one-vs-rest targets in {0, 1}."""
    return (y[:, None] == np.arange(N_CLASSES)[None, :]).astype(float)


def linear_loss_and_grad(kind: str, W, b, X, y, weights=None, l2: float = 0.0):
    """Objective and (sub)gradient of a one-vs-rest linear model.

    The data term is the weighted mean of per-example losses summed over the
    three binary problems; ``l2 / 2 * ||W||^2`` is added.
    """
    n = X.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    w = w / w.sum()
    Y = _targets(y)
    S = X @ W.T + b
    if kind == "logistic":
        sign = 2.0 * Y - 1.0
        # log(1 + exp(-m)) computed stably
        m = sign * S
        per = np.logaddexp(0.0, -m)
        prob = np.where(S >= 0, 1.0 / (1.0 + np.exp(-np.abs(S))), np.exp(-np.abs(S)) / (1.0 + np.exp(-np.abs(S))))
        dS = prob - Y
    elif kind == "svm":
        sign = 2.0 * Y - 1.0
        margin = sign * S
        per = np.maximum(0.0, 1.0 - margin)
        dS = np.where(margin < 1.0, -sign, 0.0)
    else:
        raise ValueError(f"unknown linear model kind {kind!r}")
    loss = float(w @ per.sum(axis=1)) + 0.5 * l2 * float(np.sum(W * W))
    dS = dS * w[:, None]
    return loss, dS.T @ X + l2 * W, dS.sum(axis=0)


def _mlp_loss(model: MlpModel, X, y, weights, l2):
    loss = ad.softmax_cross_entropy(model.logits(X), y, weights)
    if l2:
        loss = loss + 0.5 * l2 * (ad.sum(model.W1 * model.W1) + ad.sum(model.W2 * model.W2))
    return loss


def _unpack(features) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([f.values if isinstance(f, FeatureVector) else np.asarray(f, dtype=float)
                  for f, _ in features])
    y = np.array([lab.index if isinstance(lab, SentimentLabel) else int(lab) for _, lab in features],
                 dtype=np.intp)
    return X, y


def train_classical(kind: str, features: Sequence, cfg: TrainConfig = TrainConfig(),
                    sample_weight: Sequence[float] | None = None):
    """Fit a model on ``(feature vector, label)`` pairs.

    Returns ``(model, history)``; ``history.loss`` holds the full-data
    objective after each epoch.
    """
    if not features:
        raise ValueError("no training examples")
    X, y = _unpack(features)
    if X.ndim != 2:
        raise ValueError("feature vectors differ in length")
    return fit(kind, X, y, cfg, sample_weight)


def fit(kind: str, X: np.ndarray, y: np.ndarray, cfg: TrainConfig = TrainConfig(),
        sample_weight=None):
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    present = np.unique(y)
    if len(present) < 2:
        raise ValueError(f"class absent: training data has only {len(present)} distinct label(s)")
    n, d = X.shape
    sw = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    hist = TrainHistory()
    if kind == "mlp":
        h = cfg.hidden
        model = MlpModel(glorot_uniform(rng, (d, h), d, h), np.zeros(h),
                         glorot_uniform(rng, (h, N_CLASSES), h, N_CLASSES), np.zeros(N_CLASSES))
        params = model.parameters()
        for _ in range(cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                ad.zero_grad(params)
                _mlp_loss(model, X[idx], y[idx], sw[idx], cfg.l2_penalty).backward()
                ad.sgd_step(params, cfg.lr)
            hist.loss.append(_mlp_loss(model, X, y, sw, cfg.l2_penalty).item())
            hist.weight_norm.append(float(np.sqrt(np.sum(model.W1.data ** 2) + np.sum(model.W2.data ** 2))))
        ad.zero_grad(params)
        return model, hist

    W = glorot_uniform(rng, (N_CLASSES, d), d, N_CLASSES)
    b = np.zeros(N_CLASSES)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, gW, gb = linear_loss_and_grad(kind, W, b, X[idx], y[idx], sw[idx], cfg.l2_penalty)
            W -= cfg.lr * gW
            b -= cfg.lr * gb
        loss, _, _ = linear_loss_and_grad(kind, W, b, X, y, sw, cfg.l2_penalty)
        hist.loss.append(loss)
        hist.weight_norm.append(float(np.linalg.norm(W)))
    return LinearModel(kind, W, b), hist


def checkpoint_meta(model, extra: dict | None = None) -> dict:
    meta = {"kind": "classical", "model": model.kind, "feature_dim": model.dim}
    if extra:
        meta.update(extra)
    return meta


def save_model(model, path, extra: dict | None = None):
    ad.save_checkpoint(path, model.params(), checkpoint_meta(model, extra))


def model_from_checkpoint(params: dict, meta: dict):
    if meta.get("kind") != "classical":
        raise ValueError(f"checkpoint holds a {meta.get('kind')!r} model, not a classical one")
    if meta["model"] == "mlp":
        model = MlpModel(params["W1"], params["b1"], params["W2"], params["b2"])
    else:
        model = LinearModel(meta["model"], params["W"], params["b"])
    if model.dim != meta["feature_dim"]:
        raise ValueError("checkpoint feature dimension does not match its parameters")
    return model


def load_model(path):
    params, meta = ad.load_checkpoint(path)
    return model_from_checkpoint(params, meta), meta
