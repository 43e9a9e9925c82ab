"""A generated Hinglish-style sentiment corpus with a known labelling rule.

A polar tweet carries one sentiment word from a small lexicon; neutral tweets
carry none. Some polar tweets put a negator right before the sentiment word,
which flips the class. Sentiment words are sometimes elongated ("gooood") or
misspelled ("bekr"), the way they would appear on social media. A matching
"pretrained" embedding table covers the clean vocabulary only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Dataset, LangTag, SentimentLabel, Split, Token, Tweet
from .features import EmbeddingTable

ENG, HIN, OTH = LangTag.ENG, LangTag.HIN, LangTag.OTHER

POSITIVE_WORDS = {
    "good": ENG, "great": ENG, "love": ENG, "best": ENG, "happy": ENG, "awesome": ENG,
    "acha": HIN, "badhiya": HIN, "pyaar": HIN, "khush": HIN, "mast": HIN, "shandaar": HIN,
}
NEGATIVE_WORDS = {
    "bad": ENG, "worst": ENG, "hate": ENG, "sad": ENG, "angry": ENG, "boring": ENG,
    "bura": HIN, "bekar": HIN, "ghatiya": HIN, "dukhi": HIN, "bakwas": HIN, "gussa": HIN,
}
NEGATORS = {"not": ENG, "never": ENG, "nahi": HIN, "mat": HIN}
FILLER = {
    "match": ENG, "team": ENG, "india": ENG, "movie": ENG, "today": ENG, "sir": ENG,
    "pm": ENG, "phone": ENG, "game": ENG, "news": ENG, "time": ENG, "song": ENG,
    "aaj": HIN, "kal": HIN, "ghar": HIN, "yaar": HIN, "bhai": HIN, "log": HIN,
    "dekha": HIN, "gaya": HIN, "raha": HIN, "wala": HIN, "abhi": HIN, "phir": HIN,
    "sab": HIN, "kuch": HIN, "jeet": HIN, "khel": HIN, "dobara": HIN, "ji": HIN,
}
PUNCT = [".", "!", "?", ",", "..."]


@dataclass(frozen=True)
class SyntheticConfig:
    n_train: int = 600
    n_valid: int = 150
    n_test: int = 150
    negation_rate: float = 0.3  # fraction of polar tweets
    variant_rate: float = 0.3
    min_filler: int = 2
    max_filler: int = 8
    embed_dim: int = 300


def elongate(word: str, rng: np.random.Generator) -> str:
    vowels = [i for i, c in enumerate(word) if c in "aeiou"]
    i = int(rng.choice(vowels)) if vowels else len(word) - 1
    return word[:i + 1] + word[i] * int(rng.integers(2, 5)) + word[i + 1:]


def misspell(word: str, rng: np.random.Generator) -> str:
    """A romanization-style respelling that keeps the consonant skeleton.

    One of: drop a vowel (pyaar -> pyar), double a vowel (acha -> achaa),
    swap a vowel for a near one (pyaar -> peyar), or insert a vowel after the
    first consonant (pyar -> piyar).
    """
    vowels = [i for i, c in enumerate(word) if c in "aeiou"]
    near = {"a": "e", "e": "i", "i": "e", "o": "u", "u": "o"}
    for _ in range(10):
        kind = int(rng.integers(4))
        if kind == 0 and len(vowels) > 1:
            i = vowels[int(rng.integers(len(vowels)))]
            out = word[:i] + word[i + 1:]
        elif kind == 1 and vowels:
            i = vowels[int(rng.integers(len(vowels)))]
            out = word[:i] + word[i] + word[i:]
        elif kind == 2 and vowels:
            i = vowels[int(rng.integers(len(vowels)))]
            out = word[:i] + near[word[i]] + word[i + 1:]
        elif kind == 3 and len(word) > 1 and word[0] not in "aeiou" and word[1] not in "aeiou":
            out = word[0] + "ie"[int(rng.integers(2))] + word[1:]
        else:
            continue
        if out != word and out not in POSITIVE_WORDS and out not in NEGATIVE_WORDS:
            return out
    return word + word[-1]


def variant(word: str, rng: np.random.Generator) -> str:
    return elongate(word, rng) if rng.random() < 0.5 else misspell(word, rng)


def _pick(words: dict, rng) -> tuple[str, LangTag]:
    keys = sorted(words)
    w = keys[int(rng.integers(len(keys)))]
    return w, words[w]


def make_tweet(tid: str, label: SentimentLabel, rng: np.random.Generator,
               cfg: SyntheticConfig = SyntheticConfig()) -> Tweet:
    n_fill = int(rng.integers(cfg.min_filler, cfg.max_filler + 1))
    tokens = [Token(*_pick(FILLER, rng)) for _ in range(n_fill)]
    if label is not SentimentLabel.NEUTRAL:
        negate = rng.random() < cfg.negation_rate
        want_positive = label is SentimentLabel.POSITIVE
        lexicon = POSITIVE_WORDS if want_positive != negate else NEGATIVE_WORDS
        word, lang = _pick(lexicon, rng)
        if rng.random() < cfg.variant_rate:
            word = variant(word, rng)
        phrase = [Token(word, lang)]
        if negate:
            phrase.insert(0, Token(*_pick(NEGATORS, rng)))
        at = int(rng.integers(len(tokens) + 1))
        tokens[at:at] = phrase
    if rng.random() < 0.5:
        tokens.append(Token(PUNCT[int(rng.integers(len(PUNCT)))], OTH))
    if rng.random() < 0.15:
        tokens.insert(0, Token("@user" + str(int(rng.integers(100))), OTH))
    return Tweet(tid, tuple(tokens), label)


def make_split(n: int, split: Split, rng, cfg: SyntheticConfig, prefix: str) -> Dataset:
    labels = [SentimentLabel.POSITIVE, SentimentLabel.NEGATIVE, SentimentLabel.NEUTRAL]
    tweets = [make_tweet(f"{prefix}{i}", labels[i % 3], rng, cfg) for i in range(n)]
    order = rng.permutation(n)
    return Dataset(tuple(tweets[i] for i in order), split)


def make_embeddings(dim: int, rng: np.random.Generator, group_weight: float = 0.6) -> EmbeddingTable:
    """Vectors for every clean word, sorted for stable ordering.

    Like real pretrained vectors, related words sit near each other: each
    vector is its group's centre (positive, negative, negator, filler,
    punctuation) plus word-specific noise, scaled to unit norm.
    """
    groups = [sorted(POSITIVE_WORDS), sorted(NEGATIVE_WORDS), sorted(NEGATORS), sorted(FILLER), PUNCT]
    centres = [rng.normal(size=dim) / np.sqrt(dim) for _ in groups]
    noise_weight = np.sqrt(1.0 - group_weight ** 2)
    vectors = {}
    for centre, words in zip(centres, groups):
        for w in words:
            v = group_weight * centre + noise_weight * rng.normal(size=dim) / np.sqrt(dim)
            vectors[w] = v / np.linalg.norm(v)
    return EmbeddingTable(dim, dict(sorted(vectors.items())))


def make_corpus(seed: int = 0, cfg: SyntheticConfig = SyntheticConfig()):
    """Return ``(train, valid, test, embeddings)``."""
    rng = np.random.default_rng(seed)
    train = make_split(cfg.n_train, Split.TRAIN, rng, cfg, "tr")
    valid = make_split(cfg.n_valid, Split.VALID, rng, cfg, "va")
    test = make_split(cfg.n_test, Split.TEST, rng, cfg, "te")
    return train, valid, test, make_embeddings(cfg.embed_dim, rng)


def make_unseen(n: int, seed: int = 0) -> Dataset:
    """Unlabeled tweets built only from words and characters absent from ``make_corpus``."""
    rng = np.random.default_rng(seed)
    pool = ["नमस्ते", "खुश", "प्यार",
            "\U0001F600", "\U0001F621\U0001F621", "❤️", "zxqv", "qwzy", "jjjxk",
            "été", "üßq", "fjordz", "xylqz"]
    langs = [HIN, HIN, HIN, OTH, OTH, OTH, ENG, ENG, ENG, ENG, ENG, ENG, ENG]
    tweets = []
    for i in range(n):
        k = int(rng.integers(1, 8))
        picks = rng.integers(len(pool), size=k)
        tweets.append(Tweet(f"u{i}", tuple(Token(pool[j], langs[j]) for j in picks)))
    return Dataset(tuple(tweets), Split.TEST)
