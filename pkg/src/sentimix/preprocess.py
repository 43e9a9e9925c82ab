"""Token-level cleaning of noisy code-mixed tweets.

``clean_tweet`` applies a fixed sequence of single-step functions; each step
maps a token list to a token list and can be used on its own.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from .corpus import Dataset, LangTag, Token, Tweet

EMPTY_TOKEN = "<empty>"
USER_TOKEN = "<user>"
EMOJI_TOKEN = "<emoji>"

# Negations are deliberately absent: they flip polarity and must survive.
DEFAULT_STOPWORDS = frozenset("""
a an the and or but if of to in on at by for from with as is am are was were be
been being it its this that these those i me my we our you your he him his she
her they them their what which who whom so than too very just do does did have
has had will would shall should can could ok
hai hain ho hoga hogi tha thi the ka ke ki ko se me mein par pe bhi to toh hi
aur ya ek yeh ye woh wo kya kuch koi apna apne apni
""".split())

EMOJI_POLICIES = ("keep", "drop", "placeholder")

_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),  # mahjong .. symbols & pictographs ext-A
    (0x2600, 0x27BF),  # misc symbols, dingbats
    (0x2B00, 0x2BFF),
    (0x1F1E6, 0x1F1FF),  # regional indicators
)
_EMOJI_JOINERS = {0x200D, 0xFE0F, 0xFE0E, 0x20E3}


@dataclass(frozen=True)
class PreprocessConfig:
    lowercase: bool = True
    drop_urls: bool = True
    mention_placeholder: str | None = USER_TOKEN
    strip_hash_prefix: bool = True
    emoji_policy: str = "placeholder"
    emoji_placeholder: str = EMOJI_TOKEN
    drop_punct_tokens: bool = True
    drop_devanagari: bool = False
    max_char_run: int | None = 2
    contractions: dict[str, str] = field(default_factory=dict)
    stopwords: frozenset[str] = DEFAULT_STOPWORDS

    def __post_init__(self):
        if self.max_char_run is not None and self.max_char_run < 1:
            raise ValueError("max_char_run must be >= 1 (or None for no limit)")
        if self.emoji_policy not in EMOJI_POLICIES:
            raise ValueError(f"emoji_policy must be one of {EMOJI_POLICIES}")
        for ph in (self.mention_placeholder, self.emoji_placeholder):
            if ph is not None and (not ph or any(c.isspace() for c in ph)):
                raise ValueError(f"invalid placeholder {ph!r}")
        if not isinstance(self.stopwords, frozenset):
            object.__setattr__(self, "stopwords", frozenset(self.stopwords))

    @classmethod
    def identity(cls) -> "PreprocessConfig":
        """A configuration under which cleaning changes nothing."""
        return cls(lowercase=False, drop_urls=False, mention_placeholder=None,
                   strip_hash_prefix=False, emoji_policy="keep", drop_punct_tokens=False,
                   drop_devanagari=False, max_char_run=None, stopwords=frozenset())

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessConfig":
        d = dict(d)
        if "stopwords_file" in d:
            path = d.pop("stopwords_file")
            if path is not None:
                d["stopwords"] = load_stopwords(path)
        if "stopwords" in d:
            d["stopwords"] = frozenset(d["stopwords"])
        return cls(**d)


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One token per line; blank lines and ``#`` comments are skipped."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line)
    return frozenset(words)


def is_url(text: str) -> bool:
    return text.startswith(("http://", "https://", "www."))


def is_mention(text: str) -> bool:
    return text.startswith("@") and len(text) > 1


def is_punct_only(text: str) -> bool:
    return bool(text) and all(unicodedata.category(c)[0] in "PS" for c in text)


def is_emoji_char(ch: str) -> bool:
    cp = ord(ch)
    if cp in _EMOJI_JOINERS or 0x1F3FB <= cp <= 0x1F3FF:
        return True
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def has_devanagari(text: str) -> bool:
    return any(0x0900 <= ord(c) <= 0x097F for c in text)


_RUN = {}


def normalize_elongation(token_text: str, max_char_run: int | None) -> str:
    """Truncate every run of one repeated character to ``max_char_run``."""
    if max_char_run is None:
        return token_text
    if max_char_run < 1:
        raise ValueError("max_char_run must be >= 1")
    pat = _RUN.get(max_char_run)
    if pat is None:
        pat = _RUN[max_char_run] = re.compile(r"(.)\1{%d,}" % max_char_run, re.DOTALL)
    return pat.sub(lambda m: m.group(1) * max_char_run, token_text)


# Each step takes and returns a list of tokens.

def step_lowercase(tokens: list[Token], cfg: PreprocessConfig) -> list[Token]:
    if not cfg.lowercase:
        return tokens
    return [Token(t.text.lower(), t.lang) for t in tokens]


def step_drop_urls(tokens, cfg):
    if not cfg.drop_urls:
        return tokens
    # "htttp://..." only becomes a URL after elongation; catch it here so that
    # a second cleaning pass has nothing left to do.
    return [t for t in tokens
            if not (is_url(t.text) or is_url(normalize_elongation(t.text, cfg.max_char_run)))]


def step_drop_devanagari(tokens, cfg):
    if not cfg.drop_devanagari:
        return tokens
    return [t for t in tokens if not has_devanagari(t.text)]


def step_mentions(tokens, cfg):
    if cfg.mention_placeholder is None:
        return tokens
    return [Token(cfg.mention_placeholder, t.lang) if is_mention(t.text) else t for t in tokens]


def step_strip_hash(tokens, cfg):
    if not cfg.strip_hash_prefix:
        return tokens
    out = []
    for t in tokens:
        stripped = t.text.lstrip("#")
        # leave "#@x" and "#http..." alone, stripping would expose a new
        # mention or URL for the next pass
        if stripped and stripped != t.text and not (is_mention(stripped) or is_url(stripped)):
            t = Token(stripped, t.lang)
        out.append(t)
    return out


def step_emoji(tokens, cfg):
    if cfg.emoji_policy == "keep":
        return tokens
    # Only tokens made of emoji (plus punctuation) are touched; "good😀" is
    # left whole for the character branch.
    out = []
    for t in tokens:
        if not is_emoji_token(t.text):
            out.append(t)
        elif cfg.emoji_policy == "placeholder":
            out.append(Token(cfg.emoji_placeholder, t.lang))
    return out


def is_emoji_token(text: str) -> bool:
    rest = "".join(c for c in text if not is_emoji_char(c))
    return len(rest) < len(text) and (not rest or is_punct_only(rest))


def step_drop_punct(tokens, cfg):
    if not cfg.drop_punct_tokens:
        return tokens
    # emoji are symbol-class too; they are the emoji step's business
    return [t for t in tokens if not is_punct_only(t.text) or is_emoji_token(t.text)]


def step_elongation(tokens, cfg):
    if cfg.max_char_run is None:
        return tokens
    return [Token(normalize_elongation(t.text, cfg.max_char_run), t.lang) for t in tokens]


def step_contractions(tokens, cfg):
    if not cfg.contractions:
        return tokens
    return [Token(cfg.contractions.get(t.text, t.text), t.lang) for t in tokens]


def step_stopwords(tokens, cfg):
    if not cfg.stopwords:
        return tokens
    return [t for t in tokens if t.text not in cfg.stopwords]


STEPS: tuple[Callable[[list[Token], PreprocessConfig], list[Token]], ...] = (
    step_lowercase,
    step_drop_urls,
    step_drop_devanagari,
    step_mentions,
    step_strip_hash,
    step_emoji,
    step_drop_punct,
    step_elongation,
    step_contractions,
    step_stopwords,
)


def clean_tokens(tokens: list[Token], cfg: PreprocessConfig) -> list[Token]:
    for step in STEPS:
        tokens = step(tokens, cfg)
    if not tokens:
        tokens = [Token(EMPTY_TOKEN, LangTag.OTHER)]
    return tokens


def clean_tweet(t: Tweet, cfg: PreprocessConfig | None = None) -> Tweet:
    cfg = cfg or PreprocessConfig()
    return replace(t, tokens=tuple(clean_tokens(list(t.tokens), cfg)))


def clean_dataset(d: Dataset, cfg: PreprocessConfig | None = None) -> Dataset:
    cfg = cfg or PreprocessConfig()
    return d.with_tweets(clean_tweet(tw, cfg) for tw in d.tweets)
