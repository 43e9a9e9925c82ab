"""What cleaning does to a noisy tweet, and the features built from it.

Run with ``python demos/03_preprocess_and_features.py``.
"""
import numpy as np

from sentimix.corpus import parse_dataset, write_dataset
from sentimix.features import build_vocabulary, fit_tfidf, tfidf_weight, tweet_vector_mean
from sentimix.preprocess import PreprocessConfig, clean_dataset
from sentimix.synthetic import make_embeddings

RAW = """meta 1 positive
@rohit\tO
yaaar\tHin
the\tEng
match\tEng
was\tEng
sooooo\tEng
GOOD\tEng
#india\tEng
😍\tO
https://t.co/xyz\tO

meta 2 negative
not\tEng
good\tEng
yaar\tHin
!!!\tO
"""

raw = parse_dataset(RAW)
cleaned = clean_dataset(raw)
for before, after in zip(raw.tweets, cleaned.tweets):
    print(" ".join(before.texts))
    print("  ->", " ".join(after.texts))

# negations survive stopword removal; emoji can be dropped instead of replaced
quiet = clean_dataset(raw, PreprocessConfig(emoji_policy="drop"))
print("emoji dropped:", " ".join(quiet.tweets[0].texts))

# %% tf-idf over the cleaned pair.
vocab = build_vocabulary(cleaned.tweets)
tfidf = fit_tfidf(cleaned.tweets)
print("\ndocument frequencies:", vocab.document_frequency)
for tok in ("good", "match", "yaar"):
    print(f"tfidf({tok!r}, tweet 1) = {tfidf_weight(tfidf, tok, cleaned.tweets[0]):.4f}")

# %% Averaged word vectors from the synthetic embedding table.
emb = make_embeddings(8, np.random.default_rng(0))
print("\nmean vector of tweet 2:", np.round(tweet_vector_mean(cleaned.tweets[1], emb).values, 3))

print("\ncanonical file form:")
print(write_dataset(cleaned), end="")
