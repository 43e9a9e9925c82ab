"""Generate a Hinglish-style corpus, train every model and print a results table.

The corpus has a known rule: polar tweets carry one lexicon word, which a
preceding negator flips. Some lexicon words are elongated or misspelled. Bag-of-words
baselines cannot see negation scope; the character branch copes with the
spelling variants that the word vectors have never seen.

Run with ``python demos/02_synthetic_end_to_end.py`` (about half a minute).
"""
import time

import numpy as np

from sentimix import classical
from sentimix.corpus import class_distribution
from sentimix.features import featurize, fit_tfidf
from sentimix.metrics import evaluate, results_table
from sentimix.neural import ModelSpec, NeuralTrainConfig, evaluate_model, train_model
from sentimix.preprocess import clean_dataset
from sentimix.synthetic import make_corpus

SEED = 0
train, valid, test, emb = make_corpus(SEED)
print("train classes:", {k.value: v for k, v in class_distribution(train).items()})
print("example:", " ".join(train.tweets[0].texts), "->", train.tweets[0].label.value)

train, valid, test = (clean_dataset(d) for d in (train, valid, test))
print("cleaned:", " ".join(train.tweets[0].texts))

rows = []

# %% Neural models. A narrower spec than the default keeps the demo quick.
spec = ModelSpec(embed_dim=64, hidden=32, fc_hidden=32)
cfg = NeuralTrainConfig(lr=3e-3, epochs=20, word_dropout=0.3, seed=SEED)
for name, rep, branches in (("SS-LSTM", "FastText and 1D-CNN", ("char", "word")),
                            ("LSTM", "1D-CNN", ("char",)),
                            ("LSTM", "FastText", ("word",))):
    t0 = time.perf_counter()
    model, hist = train_model(ModelSpec(**{**spec.__dict__, "branches": branches}), train, valid, cfg, emb)
    print(f"{name:8s} {rep:20s} best epoch {hist.best_epoch:2d}, {time.perf_counter() - t0:.1f}s")
    rows.append((name, rep, evaluate_model(model, test)))

# %% Classical baselines on three representations.
tfidf = fit_tfidf(train.tweets)
y = np.array([tw.label.index for tw in train.tweets])
for rep, label in (("tfidf", "TF-IDF avg"), ("embedding_mean", "Glove avg"),
                   ("tfidf_embedding", "TF-IDF weighted Glove")):
    X, Xt = (featurize(d.tweets, rep, tfidf, emb) for d in (train, test))
    for kind, name in (("logistic", "OvRLR"), ("svm", "SVM"), ("mlp", "MLP")):
        model, _ = classical.fit(kind, X, y, classical.TrainConfig(lr=2.0 if rep == "tfidf" else 0.5,
                                                                    epochs=300, seed=SEED))
        rows.append((name, label, evaluate(classical.predict(model, Xt), test.labels)))

print()
print(results_table(rows))
