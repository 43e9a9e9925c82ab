"""Vocabularies, tf-idf weighting, pretrained embedding tables and tweet vectors."""
from __future__ import annotations

import enum
import hashlib
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .corpus import Tweet


class EmbeddingFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class UnkPolicy(enum.Enum):
    ZERO = "zero"
    MEAN_OF_ALL = "mean"
    TRAINABLE = "trainable"


class Provenance(enum.Enum):
    TFIDF_SPARSE = "tfidf"
    EMBEDDING_MEAN = "embedding_mean"
    TFIDF_WEIGHTED_EMBEDDING = "tfidf_embedding"


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    provenance: Provenance

    def __len__(self):
        return len(self.values)


@dataclass
class Vocabulary:
    index: dict[str, int]
    document_frequency: dict[str, int]
    n_documents: int

    def __len__(self):
        return len(self.index)

    def __contains__(self, token):
        return token in self.index

    @property
    def tokens(self) -> list[str]:
        return sorted(self.index, key=self.index.__getitem__)

    def to_lines(self) -> str:
        """``#n_documents N`` then one ``token<TAB>index<TAB>df`` line per entry."""
        lines = [f"#n_documents\t{self.n_documents}"]
        lines += [f"{tok}\t{self.index[tok]}\t{self.document_frequency[tok]}"
                  for tok in self.tokens]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_lines(cls, text: str) -> "Vocabulary":
        n_docs = None
        index, df = {}, {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line:
                continue
            fields = line.split("\t")
            if fields[0] == "#n_documents":
                n_docs = int(fields[1])
                continue
            if len(fields) != 3:
                raise ValueError(f"line {lineno}: expected token, index, df")
            index[fields[0]] = int(fields[1])
            df[fields[0]] = int(fields[2])
        if n_docs is None:
            raise ValueError("missing #n_documents line")
        if sorted(index.values()) != list(range(len(index))):
            raise ValueError("vocabulary indices are not dense")
        return cls(index, df, n_docs)


def build_vocabulary(corpus: Sequence[Tweet]) -> Vocabulary:
    """Index distinct token texts in order of first appearance."""
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    index: dict[str, int] = {}
    df: Counter = Counter()
    for tw in corpus:
        for text in tw.texts:
            index.setdefault(text, len(index))
        df.update(set(tw.texts))
    return Vocabulary(index, dict(df), len(corpus))


@dataclass
class TfIdfModel:
    vocabulary: Vocabulary
    idf: np.ndarray

    def idf_of(self, token: str) -> float:
        i = self.vocabulary.index.get(token)
        return 0.0 if i is None else float(self.idf[i])


def smoothed_idf(df: int, n_documents: int) -> float:
    return math.log((1 + n_documents) / (1 + df)) + 1.0


def fit_tfidf(corpus: Sequence[Tweet] | Vocabulary) -> TfIdfModel:
    vocab = corpus if isinstance(corpus, Vocabulary) else build_vocabulary(corpus)
    idf = np.empty(len(vocab))
    for tok, i in vocab.index.items():
        idf[i] = smoothed_idf(vocab.document_frequency[tok], vocab.n_documents)
    return TfIdfModel(vocab, idf)


def tfidf_weight(model: TfIdfModel, token: str, tweet: Tweet) -> float:
    """Raw count of ``token`` in ``tweet`` times its idf; 0 when unseen."""
    idf = model.idf_of(token)
    if idf == 0.0:
        return 0.0
    return tweet.texts.count(token) * idf


def tfidf_sparse_vector(t: Tweet, m: TfIdfModel) -> FeatureVector:
    v = np.zeros(len(m.vocabulary))
    for tok, n in Counter(t.texts).items():
        i = m.vocabulary.index.get(tok)
        if i is not None:
            v[i] = n * m.idf[i]
    norm = np.linalg.norm(v)
    if norm > 0:
        v /= norm
    return FeatureVector(v, Provenance.TFIDF_SPARSE)


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]
    unk_policy: UnkPolicy = UnkPolicy.ZERO
    unk_vector: np.ndarray | None = None
    _matrix: np.ndarray | None = field(default=None, repr=False)
    _index: dict[str, int] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("embedding dimension must be positive")
        for tok, v in self.vectors.items():
            if v.shape != (self.dim,):
                raise ValueError(f"vector for {tok!r} has shape {v.shape}, expected ({self.dim},)")

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, token):
        return token in self.vectors

    def oov_vector(self) -> np.ndarray:
        if self.unk_policy is UnkPolicy.MEAN_OF_ALL and self.vectors:
            return self.matrix.mean(axis=0)
        if self.unk_policy is UnkPolicy.TRAINABLE and self.unk_vector is not None:
            return self.unk_vector
        return np.zeros(self.dim)

    def lookup(self, token: str) -> np.ndarray:
        v = self.vectors.get(token)
        return self.oov_vector() if v is None else v

    @property
    def matrix(self) -> np.ndarray:
        """Rows in insertion order; see ``index``."""
        if self._matrix is None:
            self._index = {tok: i for i, tok in enumerate(self.vectors)}
            self._matrix = (np.stack(list(self.vectors.values())) if self.vectors
                            else np.zeros((0, self.dim)))
        return self._matrix

    @property
    def index(self) -> dict[str, int]:
        self.matrix
        return self._index

    def fingerprint(self) -> str:
        h = hashlib.sha256(f"{self.dim}\n".encode())
        for tok, v in self.vectors.items():
            h.update(tok.encode("utf-8") + b"\0")
            h.update(np.ascontiguousarray(v, dtype="<f8").tobytes())
        return h.hexdigest()[:16]


def load_embeddings(stream: str | TextIO, unk_policy: UnkPolicy = UnkPolicy.ZERO) -> EmbeddingTable:
    """Read word2vec text format, with or without the ``<count> <dim>`` header."""
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()
    dim = None
    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines, start=1):
        fields = line.rstrip().split(" ")
        if not line.strip():
            continue
        if lineno == 1 and len(fields) == 2 and all(f.isdigit() for f in fields):
            dim = int(fields[1])
            continue
        tok, vals = fields[0], fields[1:]
        if dim is None:
            dim = len(vals)
            if dim == 0:
                raise EmbeddingFormatError(lineno, f"no vector values for {tok!r}")
        if len(vals) != dim:
            raise EmbeddingFormatError(
                lineno, f"vector for {tok!r} has {len(vals)} values, expected {dim}")
        try:
            v = np.array([float(x) for x in vals])
        except ValueError:
            raise EmbeddingFormatError(lineno, f"non-numeric value in vector for {tok!r}") from None
        if tok in vectors:
            warnings.warn(f"line {lineno}: duplicate token {tok!r}, keeping the last vector")
        vectors[tok] = v
    if dim is None:
        raise EmbeddingFormatError(1, "empty embedding file")
    return EmbeddingTable(dim, vectors, unk_policy)


def read_embeddings(path: str | Path, unk_policy: UnkPolicy = UnkPolicy.ZERO) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        return load_embeddings(fh, unk_policy)


def write_embeddings(e: EmbeddingTable, header: bool = True) -> str:
    lines = [f"{len(e.vectors)} {e.dim}"] if header else []
    lines += [tok + " " + " ".join(repr(float(x)) for x in v) for tok, v in e.vectors.items()]
    return "\n".join(lines) + "\n"


def tweet_vector_mean(t: Tweet, e: EmbeddingTable) -> FeatureVector:
    if t.n_tokens == 0:
        raise ValueError("tweet has no tokens")
    total = np.zeros(e.dim)
    for text in t.texts:
        total += e.lookup(text)
    return FeatureVector(total / t.n_tokens, Provenance.EMBEDDING_MEAN)


def tweet_vector_tfidf_weighted(t: Tweet, e: EmbeddingTable, m: TfIdfModel,
                                weight=None) -> FeatureVector:
    """Sum of tfidf(token) * e(token) over token positions, divided by N.

    ``weight(token, tweet)`` overrides the tf-idf weight.
    """
    if t.n_tokens == 0:
        raise ValueError("tweet has no tokens")
    if weight is None:
        counts = Counter(t.texts)
        weight = lambda tok, _tw: counts[tok] * m.idf_of(tok)  # noqa: E731
    total = np.zeros(e.dim)
    for text in t.texts:
        total += weight(text, t) * e.lookup(text)
    return FeatureVector(total / t.n_tokens, Provenance.TFIDF_WEIGHTED_EMBEDDING)


def featurize(tweets: Iterable[Tweet], representation: str, tfidf: TfIdfModel | None = None,
              embeddings: EmbeddingTable | None = None) -> np.ndarray:
    """Stack tweet vectors into an ``[n, dim]`` matrix.

    ``representation`` is one of ``tfidf``, ``embedding_mean``, ``tfidf_embedding``.
    """
    rep = Provenance(representation)
    rows = []
    for tw in tweets:
        if rep is Provenance.TFIDF_SPARSE:
            rows.append(tfidf_sparse_vector(tw, tfidf).values)
        elif rep is Provenance.EMBEDDING_MEAN:
            rows.append(tweet_vector_mean(tw, embeddings).values)
        else:
            rows.append(tweet_vector_tfidf_weighted(tw, embeddings, tfidf).values)
    return np.array(rows)
