import numpy as np
import pytest
from hypothesis import settings, strategies as st

from sentimix.corpus import Dataset, LangTag, SentimentLabel, Split, Token, Tweet
from sentimix.features import EmbeddingTable
from sentimix.neural import CharVocab, ModelSpec, SsLstmModel
from sentimix.neural.model import CharCnnConfig

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# a typical code-mixed tweet with its language tags
HINGLISH_TWEET = [
    ("Congratulations", "Eng"), ("Sir", "Eng"), ("Ji", "Hin"), ("Dobara", "Hin"), ("PM", "Eng"),
    ("banee", "Hin"), ("ki", "Hin"), ("hardik", "Hin"), ("subhkamnaye", "Hin"), ("aapko", "Hin"),
    (".", "O"),
]

ALPHABET = "abcdefghijklmnopqrstuvwxyzABC!?.#@:/0123éअकम😀"

token_text = st.text(alphabet=ALPHABET, min_size=1, max_size=8)
tokens = st.builds(Token, token_text, st.sampled_from(list(LangTag)))
labels = st.sampled_from(list(SentimentLabel))


@st.composite
def tweets(draw, labeled=True, max_tokens=12):
    toks = draw(st.lists(tokens, min_size=1, max_size=max_tokens))
    tid = draw(st.text(alphabet="abcdef0123456789", min_size=1, max_size=6))
    return Tweet(tid, tuple(toks), draw(labels) if labeled else None)


@st.composite
def datasets(draw, labeled=True, max_size=8):
    n = draw(st.integers(0, max_size))
    out = []
    for i in range(n):
        t = draw(tweets(labeled))
        out.append(Tweet(f"{i}-{t.id}", t.tokens, t.label))
    return Dataset(tuple(out), Split.OTHER if labeled else Split.TEST)


def random_tweet(rng, T, tid="t", label=None, vocab=("acha", "good", "bura", "नमस्ते", "😀", "zz", "x")):
    words = [vocab[int(i)] for i in rng.integers(len(vocab), size=T)]
    return Tweet(tid, tuple(Token(w, LangTag.OTHER) for w in words), label)


def small_table(rng, dim=6, words=("acha", "good", "bura", "bad", "x")):
    return EmbeddingTable(dim, {w: rng.normal(size=dim) for w in words})


def small_model(branches=("char", "word"), n_layers=1, seed=0, dim=5, emb_dim=6, hidden=4):
    rng = np.random.default_rng(seed)
    spec = ModelSpec(branches, embed_dim=dim, hidden=hidden, n_layers=n_layers, fc_hidden=3,
                     char=CharCnnConfig(char_emb_dim=3, filter_widths=(1, 2, 3)))
    table = small_table(rng, emb_dim) if "word" in branches else None
    vocab = CharVocab(sorted(set("acghoodbur")))
    return SsLstmModel(spec, vocab, table, seed=seed)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance summary lines, printed after the run so they survive output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
