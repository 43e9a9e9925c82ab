"""Reading and writing the token-per-line, language-tagged tweet format.

A file is a sequence of records separated by blank lines. Each record is a
header line ``meta <id> [<label>]`` followed by one ``<token>\\t<tag>`` line
per token::

    meta	1	positive
    All	Eng
    the	Eng
    best	Eng

    meta	2
    ...

Tags are ``Hin``, ``Eng`` and ``O``. Labels are ``positive``, ``negative`` and
``neutral``; test files may leave them out.
"""
from __future__ import annotations

import enum
import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO


class CorpusFormatError(ValueError):
    """Malformed input, reported with the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class LangTag(enum.Enum):
    HIN = "Hin"
    ENG = "Eng"
    OTHER = "O"

    @classmethod
    def parse(cls, text: str) -> "LangTag":
        for tag in cls:
            if tag.value == text:
                return tag
        raise ValueError(f"unknown language tag {text!r}")


class SentimentLabel(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    @property
    def index(self) -> int:
        return _LABEL_INDEX[self]

    @classmethod
    def from_index(cls, i: int) -> "SentimentLabel":
        return LABELS[i]

    @classmethod
    def parse(cls, text: str) -> "SentimentLabel":
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"unknown sentiment label {text!r}") from None


# class order used everywhere a label becomes an index
LABELS = (SentimentLabel.POSITIVE, SentimentLabel.NEGATIVE, SentimentLabel.NEUTRAL)
_LABEL_INDEX = {lab: i for i, lab in enumerate(LABELS)}


class Split(enum.Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"
    OTHER = "other"


@dataclass(frozen=True)
class Token:
    text: str
    lang: LangTag

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text is empty")
        if any(ch.isspace() for ch in self.text):
            raise ValueError(f"token text {self.text!r} contains whitespace")


@dataclass(frozen=True)
class Tweet:
    id: str
    tokens: tuple[Token, ...]
    label: SentimentLabel | None = None

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.id or any(ch.isspace() for ch in self.id):
            raise ValueError(f"invalid tweet id {self.id!r}")

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)

    @property
    def texts(self) -> list[str]:
        return [tok.text for tok in self.tokens]


@dataclass(frozen=True)
class Dataset:
    tweets: tuple[Tweet, ...] = field(default_factory=tuple)
    split: Split = Split.OTHER

    def __post_init__(self):
        if not isinstance(self.tweets, tuple):
            object.__setattr__(self, "tweets", tuple(self.tweets))
        seen = set()
        for tw in self.tweets:
            if tw.id in seen:
                raise ValueError(f"duplicate tweet id {tw.id!r}")
            seen.add(tw.id)
            if tw.label is None and self.split is not Split.TEST:
                raise ValueError(f"tweet {tw.id!r} has no label in a {self.split.value} split")

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self):
        return iter(self.tweets)

    @property
    def labels(self) -> list[SentimentLabel | None]:
        return [tw.label for tw in self.tweets]

    def with_tweets(self, tweets: Iterable[Tweet]) -> "Dataset":
        return Dataset(tuple(tweets), self.split)


def parse_dataset(text: str | TextIO, expect_labels: bool = True,
                  split: Split | None = None) -> Dataset:
    """Parse records from a string or text stream.

    With ``expect_labels`` every header must carry a label. Without it labels
    are optional and the split defaults to ``Split.TEST``.
    """
    if not isinstance(text, str):
        text = text.read()
    if split is None:
        split = Split.OTHER if expect_labels else Split.TEST

    tweets: list[Tweet] = []
    seen: dict[str, int] = {}
    header = None  # (lineno, id, label)
    tokens: list[Token] = []

    def close_record():
        lineno, tid, label = header
        if not tokens:
            raise CorpusFormatError(lineno, f"tweet {tid!r} has an empty body")
        tweets.append(Tweet(tid, tuple(tokens), label))

    lines = text.split("\n")
    for lineno, line in enumerate(lines, start=1):
        if line.endswith("\r"):
            line = line[:-1]
        if not line.strip():
            if header is not None:
                close_record()
                header, tokens = None, []
            continue
        if header is None:
            fields = line.split()
            if fields[0] != "meta" or len(fields) not in (2, 3):
                raise CorpusFormatError(lineno, f"malformed header {line!r}")
            tid = fields[1]
            if tid in seen:
                raise CorpusFormatError(
                    lineno, f"duplicate tweet id {tid!r} (first at line {seen[tid]})")
            seen[tid] = lineno
            label = None
            if len(fields) == 3:
                try:
                    label = SentimentLabel.parse(fields[2])
                except ValueError as exc:
                    raise CorpusFormatError(lineno, str(exc)) from None
            elif expect_labels:
                raise CorpusFormatError(lineno, f"tweet {tid!r} has no label")
            header = (lineno, tid, label)
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or any(c.isspace() for c in fields[0]):
            raise CorpusFormatError(lineno, f"malformed token line {line!r}")
        try:
            lang = LangTag.parse(fields[1])
        except ValueError as exc:
            raise CorpusFormatError(lineno, str(exc)) from None
        tokens.append(Token(fields[0], lang))
    if header is not None:
        close_record()
    try:
        return Dataset(tuple(tweets), split)
    except ValueError as exc:
        raise CorpusFormatError(len(lines), str(exc)) from None


def write_dataset(d: Dataset) -> str:
    """Serialize to the canonical form: tab-separated fields, LF endings."""
    out = io.StringIO()
    for i, tw in enumerate(d.tweets):
        if i:
            out.write("\n")
        out.write(f"meta\t{tw.id}")
        if tw.label is not None:
            out.write(f"\t{tw.label.value}")
        out.write("\n")
        for tok in tw.tokens:
            out.write(f"{tok.text}\t{tok.lang.value}\n")
    return out.getvalue()


def read_dataset(path: str | Path, expect_labels: bool = True,
                 split: Split | None = None) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_dataset(fh, expect_labels, split)


def save_dataset(d: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_dataset(d))


def class_distribution(d: Dataset) -> dict[SentimentLabel, int]:
    counts = Counter()
    for tw in d.tweets:
        if tw.label is None:
            raise ValueError(f"tweet {tw.id!r} is unlabeled")
        counts[tw.label] += 1
    return {lab: counts[lab] for lab in LABELS}
