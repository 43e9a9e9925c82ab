"""Character-CNN and word-embedding LSTM branches and the dual-branch classifier.

Each branch turns a tweet of T tokens into a ``[T, d]`` embedding sequence
(the transpose of a d x T matrix), runs it through a stack of LSTM layers and
keeps the last hidden state. The dual model concatenates both final states
and classifies with a one-hidden-layer feed-forward head.

Batches pad tweets to the longest one and carry a 0/1 mask; a masked step
copies the previous hidden and cell state unchanged.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Parameter, Tensor, glorot_uniform
from ..corpus import Tweet
from ..features import EmbeddingTable

BRANCHES = ("char", "word")
PAD_CHAR, UNK_CHAR = 0, 1


@dataclass(frozen=True)
class CharCnnConfig:
    char_emb_dim: int = 32
    filter_widths: tuple[int, ...] = (2, 3, 4)
    filters_per_width: tuple[int, ...] | None = None

    def filter_counts(self, output_dim: int) -> tuple[int, ...]:
        """Filters per width; by default ``output_dim`` split as evenly as possible."""
        if self.filters_per_width is not None:
            counts = tuple(self.filters_per_width)
        else:
            q, r = divmod(output_dim, len(self.filter_widths))
            counts = tuple(q + (i < r) for i in range(len(self.filter_widths)))
        if len(counts) != len(self.filter_widths) or sum(counts) != output_dim:
            raise ValueError(f"filter counts {counts} must sum to the embedding dimension {output_dim}")
        if min(self.filter_widths) < 1 or min(counts) < 1:
            raise ValueError("filter widths and counts must be >= 1")
        return counts


@dataclass(frozen=True)
class ModelSpec:
    branches: tuple[str, ...] = BRANCHES
    embed_dim: int = 256
    hidden: int = 128
    n_layers: int = 1
    fc_hidden: int = 64
    n_classes: int = 3
    char: CharCnnConfig = field(default_factory=CharCnnConfig)
    freeze_embeddings: bool = True

    def __post_init__(self):
        if not self.branches or any(b not in BRANCHES for b in self.branches):
            raise ValueError(f"branches must be a non-empty subset of {BRANCHES}")
        object.__setattr__(self, "branches", tuple(b for b in BRANCHES if b in self.branches))
        if self.n_layers < 1:
            raise ValueError("n_layers must be >= 1")
        self.char.filter_counts(self.embed_dim)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["branches"] = list(self.branches)
        d["char"]["filter_widths"] = list(self.char.filter_widths)
        if self.char.filters_per_width is not None:
            d["char"]["filters_per_width"] = list(self.char.filters_per_width)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        d = dict(d)
        char = dict(d.pop("char", {}))
        for key in ("filter_widths", "filters_per_width"):
            if char.get(key) is not None:
                char[key] = tuple(char[key])
        if "branches" in d:
            d["branches"] = tuple(d["branches"])
        return cls(char=CharCnnConfig(**char), **d)


class CharVocab:
    """Characters seen in training; index 0 pads, index 1 stands for any unseen character."""

    def __init__(self, chars: Sequence[str]):
        self.chars = list(chars)
        self.index = {c: i + 2 for i, c in enumerate(self.chars)}

    @classmethod
    def build(cls, tweets: Sequence[Tweet]) -> "CharVocab":
        return cls(sorted({c for tw in tweets for tok in tw.tokens for c in tok.text}))

    def __len__(self):
        return len(self.chars) + 2

    def encode(self, text: str) -> list[int]:
        return [self.index.get(c, UNK_CHAR) for c in text]


class LstmLayer:
    """Gate order in the fused weights: input, forget, output, candidate."""

    def __init__(self, name: str, input_dim: int, hidden: int, rng: np.random.Generator):
        H = hidden
        self.hidden = H
        self.W = Parameter(glorot_uniform(rng, (input_dim, 4 * H), input_dim, H), f"{name}.W", "glorot")
        self.U = Parameter(glorot_uniform(rng, (H, 4 * H), H, H), f"{name}.U", "glorot")
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0  # forget gate
        self.b = Parameter(b, f"{name}.b", "forget_bias_1")

    def parameters(self) -> list[Parameter]:
        return [self.W, self.U, self.b]

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> tuple[list[Tensor], Tensor]:
        """Run over ``x`` of shape ``[B, T, d]``; returns per-step hidden states and the last one."""
        B, T, d = x.shape
        H = self.hidden
        xw = ad.reshape(ad.reshape(x, (B * T, d)) @ self.W + self.b, (B, T, 4 * H))
        h = Tensor(np.zeros((B, H)))
        c = Tensor(np.zeros((B, H)))
        states = []
        for t in range(T):
            z = xw[:, t, :] + h @ self.U
            i = ad.sigmoid(z[:, :H])
            f = ad.sigmoid(z[:, H:2 * H])
            o = ad.sigmoid(z[:, 2 * H:3 * H])
            g = ad.tanh(z[:, 3 * H:])
            c_new = f * c + i * g
            h_new = o * ad.tanh(c_new)
            if mask is not None and not mask[:, t].all():
                m = mask[:, t:t + 1]
                keep = 1.0 - m
                c_new = c_new * m + c * keep
                h_new = h_new * m + h * keep
            h, c = h_new, c_new
            states.append(h)
        return states, h


@dataclass
class Batch:
    word_chars: np.ndarray  # [U, L] char ids of the distinct words in the batch
    word_lengths: np.ndarray  # [U]
    positions: np.ndarray  # [B, T] row of word_chars for each token
    word_ids: np.ndarray  # [B, T] embedding row, -1 when out of vocabulary
    mask: np.ndarray  # [B, T] 1.0 for real tokens
    gold: np.ndarray | None = None


class SsLstmModel:
    def __init__(self, spec: ModelSpec, char_vocab: CharVocab | None = None,
                 embeddings: EmbeddingTable | None = None, seed: int = 0):
        self.spec = spec
        self.char_vocab = char_vocab or CharVocab([])
        self.embeddings = embeddings
        rng = np.random.default_rng(seed)
        d, H = spec.embed_dim, spec.hidden
        self.params: dict[str, Parameter] = {}

        def add(p):
            self.params[p.name] = p
            return p

        if "char" in spec.branches:
            cc = spec.char
            e = cc.char_emb_dim
            add(Parameter(rng.uniform(-0.5, 0.5, (len(self.char_vocab), e)), "char.emb", "uniform"))
            self.filters = []
            for w, n in zip(cc.filter_widths, cc.filter_counts(d)):
                self.filters.append(add(Parameter(glorot_uniform(rng, (n, e, w), e * w, n),
                                                  f"char.conv{w}", "glorot")))
            add(Parameter(np.zeros(d), "char.conv_bias", "zeros"))
            self.char_lstm = self._stack("char.lstm", rng)
            for layer in self.char_lstm:
                for p in layer.parameters():
                    add(p)
        if "word" in spec.branches:
            if embeddings is None:
                raise ValueError("the word branch needs an embedding table")
            e = embeddings.dim
            if spec.freeze_embeddings:
                self.word_table = Tensor(embeddings.matrix)
            else:
                self.word_table = add(Parameter(embeddings.matrix.copy(), "word.table", "pretrained"))
            add(Parameter(rng.normal(0.0, 0.1, e), "word.unk", "normal"))
            if e != d:
                add(Parameter(glorot_uniform(rng, (e, d), e, d), "word.proj", "glorot"))
            self.word_lstm = self._stack("word.lstm", rng)
            for layer in self.word_lstm:
                for p in layer.parameters():
                    add(p)
        width = H * len(spec.branches)
        add(Parameter(glorot_uniform(rng, (width, spec.fc_hidden), width, spec.fc_hidden), "head.W1", "glorot"))
        add(Parameter(np.zeros(spec.fc_hidden), "head.b1", "zeros"))
        add(Parameter(glorot_uniform(rng, (spec.fc_hidden, spec.n_classes), spec.fc_hidden, spec.n_classes),
                      "head.W2", "glorot"))
        add(Parameter(np.zeros(spec.n_classes), "head.b2", "zeros"))

    def _stack(self, name, rng):
        layers, dim = [], self.spec.embed_dim
        for k in range(self.spec.n_layers):
            layers.append(LstmLayer(f"{name}{k}", dim, self.spec.hidden, rng))
            dim = self.spec.hidden
        return layers

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]):
        if set(state) != set(self.params):
            missing = sorted(set(self.params) - set(state))
            extra = sorted(set(state) - set(self.params))
            raise ValueError(f"parameter mismatch: missing {missing}, unexpected {extra}")
        for name, p in self.params.items():
            if state[name].shape != p.shape:
                raise ValueError(f"{name}: shape {state[name].shape} != {p.shape}")
            p.data[...] = state[name]

    # encoding

    def encode(self, tweets: Sequence[Tweet], gold=None) -> Batch:
        B = len(tweets)
        if B == 0:
            raise ValueError("empty batch")
        T = max(tw.n_tokens for tw in tweets)
        if T < 1:
            raise ValueError("tweets must have at least one token")
        words: dict[str, int] = {}
        positions = np.zeros((B, T), dtype=np.intp)
        word_ids = np.full((B, T), -1, dtype=np.intp)
        mask = np.zeros((B, T))
        index = self.embeddings.index if self.embeddings is not None else {}
        for b, tw in enumerate(tweets):
            for t, text in enumerate(tw.texts):
                positions[b, t] = words.setdefault(text, len(words))
                word_ids[b, t] = index.get(text, -1)
                mask[b, t] = 1.0
        L = max(len(w) for w in words)
        chars = np.full((len(words), L), PAD_CHAR, dtype=np.intp)
        lengths = np.zeros(len(words), dtype=np.intp)
        for w, u in words.items():
            ids = self.char_vocab.encode(w)
            chars[u, :len(ids)] = ids
            lengths[u] = len(ids)
        if gold is not None:
            gold = np.array([g.index if hasattr(g, "index") else int(g) for g in gold], dtype=np.intp)
        return Batch(chars, lengths, positions, word_ids, mask, gold)

    # branches

    def char_sequence(self, batch: Batch) -> Tensor:
        """``[B, T, d]`` character-CNN embeddings."""
        emb = ad.take_rows(self.params["char.emb"], batch.word_chars)  # [U, L, e]
        real = (batch.word_chars != PAD_CHAR).astype(float)[..., None]
        x = ad.transpose(emb * real, (0, 2, 1))  # [U, e, L]
        pooled = [ad.maxpool_time(ad.conv1d(x, f), batch.word_lengths) for f in self.filters]
        words = ad.tanh(ad.concat(pooled, axis=1) + self.params["char.conv_bias"])  # [U, d]
        return ad.take_rows(words, batch.positions)

    def word_sequence(self, batch: Batch) -> Tensor:
        """``[B, T, d]`` pretrained word embeddings, projected to d when needed."""
        known = (batch.word_ids >= 0).astype(float)[..., None]
        rows = np.where(batch.word_ids >= 0, batch.word_ids, 0)
        if isinstance(self.word_table, Parameter):
            vecs = ad.take_rows(self.word_table, rows) * known
        else:
            vecs = Tensor(self.word_table.data[rows] * known)
        vecs = vecs + (1.0 - known) * self.params["word.unk"]
        proj = self.params.get("word.proj")
        if proj is not None:
            B, T, e = vecs.shape
            vecs = ad.reshape(ad.reshape(vecs, (B * T, e)) @ proj, (B, T, self.spec.embed_dim))
        return vecs

    def run_lstm(self, seq: Tensor, layers: Sequence[LstmLayer], mask=None) -> Tensor:
        last = None
        for layer in layers:
            states, last = layer(seq, mask)
            seq = ad.stack(states, axis=1)
        return last

    def branch_outputs(self, batch: Batch, dropout: float = 0.0, rng=None) -> dict[str, Tensor]:
        out = {}
        if "char" in self.spec.branches:
            seq = _dropout(self.char_sequence(batch), dropout, rng)
            out["char"] = self.run_lstm(seq, self.char_lstm, batch.mask)
        if "word" in self.spec.branches:
            seq = _dropout(self.word_sequence(batch), dropout, rng)
            out["word"] = self.run_lstm(seq, self.word_lstm, batch.mask)
        return out

    def logits(self, batch: Batch, branch_mask: dict[str, float] | None = None,
               dropout: float = 0.0, rng: np.random.Generator | None = None) -> Tensor:
        """Class scores; ``dropout`` > 0 (training only) needs ``rng``."""
        outs = self.branch_outputs(batch, dropout, rng)
        parts = []
        for name in self.spec.branches:
            v = outs[name]
            if branch_mask and name in branch_mask:
                v = v * branch_mask[name]
            parts.append(v)
        o = parts[0] if len(parts) == 1 else ad.concat(parts, axis=1)
        o = _dropout(o, dropout, rng)
        p = self.params
        hidden = ad.relu(o @ p["head.W1"] + p["head.b1"])
        return hidden @ p["head.W2"] + p["head.b2"]

    def forward(self, batch: Batch, branch_mask=None) -> Tensor:
        return ad.softmax(self.logits(batch, branch_mask))

    def loss(self, batch: Batch, dropout: float = 0.0, rng=None) -> Tensor:
        if batch.gold is None:
            raise ValueError("batch has no gold labels; pass them to encode()")
        return ad.softmax_cross_entropy(self.logits(batch, dropout=dropout, rng=rng), batch.gold)

    def predict_proba(self, tweets: Sequence[Tweet], batch_size: int = 64) -> np.ndarray:
        out = []
        for start in range(0, len(tweets), batch_size):
            out.append(self.forward(self.encode(tweets[start:start + batch_size])).data)
        return np.concatenate(out) if out else np.zeros((0, self.spec.n_classes))

    def predict(self, tweets: Sequence[Tweet], batch_size: int = 64) -> np.ndarray:
        return np.argmax(self.predict_proba(tweets, batch_size), axis=1)

    # checkpoints

    def checkpoint_meta(self) -> dict:
        meta = {"kind": "neural", "spec": self.spec.to_dict(), "char_vocab": self.char_vocab.chars}
        if self.embeddings is not None:
            meta["embeddings"] = {"dim": self.embeddings.dim, "size": len(self.embeddings),
                                  "fingerprint": self.embeddings.fingerprint()}
        return meta

    def save(self, path):
        ad.save_checkpoint(path, self.state_dict(), self.checkpoint_meta())

    @classmethod
    def load(cls, path, embeddings: EmbeddingTable | None = None) -> "SsLstmModel":
        state, meta = ad.load_checkpoint(path)
        return cls.from_checkpoint(state, meta, embeddings)

    @classmethod
    def from_checkpoint(cls, state, meta, embeddings=None) -> "SsLstmModel":
        if meta.get("kind") != "neural":
            raise ValueError(f"checkpoint holds a {meta.get('kind')!r} model, not a neural one")
        spec = ModelSpec.from_dict(meta["spec"])
        if "word" in spec.branches:
            if embeddings is None:
                raise ValueError("this checkpoint has a word branch; an embedding file is required")
            want = meta["embeddings"]["fingerprint"]
            if embeddings.fingerprint() != want:
                raise ValueError("embedding table does not match the one the checkpoint was trained with")
        model = cls(spec, CharVocab(meta["char_vocab"]), embeddings if "word" in spec.branches else None)
        model.load_state_dict(state)
        return model


def _dropout(x: Tensor, rate: float, rng) -> Tensor:
    if rate <= 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * keep


def drop_words(batch: Batch, rate: float, rng: np.random.Generator) -> Batch:
    """Copy of ``batch`` with each in-vocabulary token sent to UNK with probability ``rate``."""
    if rate <= 0.0:
        return batch
    hit = rng.random(batch.word_ids.shape) < rate
    return replace(batch, word_ids=np.where(hit, -1, batch.word_ids))


# single-tweet views

def embed_chars(t: Tweet, model: SsLstmModel) -> Tensor:
    """The ``[d, T]`` character-CNN matrix of one tweet."""
    return ad.transpose(model.char_sequence(model.encode([t]))[0])


def embed_words(t: Tweet, model: SsLstmModel) -> Tensor:
    """The ``[d, T]`` word-embedding matrix of one tweet."""
    return ad.transpose(model.word_sequence(model.encode([t]))[0])


def lstm_last_hidden(m: Tensor, layers: Sequence[LstmLayer]) -> Tensor:
    """Final top-layer hidden state for a ``[d, T]`` matrix."""
    seq = ad.reshape(ad.transpose(m), (1, m.shape[1], m.shape[0]))
    last = None
    for layer in layers:
        states, last = layer(seq)
        seq = ad.stack(states, axis=1)
    return last[0]


def ss_lstm_forward(t: Tweet, model: SsLstmModel) -> np.ndarray:
    return model.forward(model.encode([t])).data[0]
