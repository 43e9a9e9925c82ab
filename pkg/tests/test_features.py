import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sentimix.corpus import LangTag, Token, Tweet
from sentimix.features import (
    EmbeddingFormatError, EmbeddingTable, Provenance, UnkPolicy, Vocabulary, build_vocabulary,
    featurize, fit_tfidf, load_embeddings, smoothed_idf, tfidf_sparse_vector, tfidf_weight,
    tweet_vector_mean, tweet_vector_tfidf_weighted, write_embeddings,
)


def tw(text, tid="t"):
    return Tweet(tid, tuple(Token(w, LangTag.ENG) for w in text.split()))


def random_corpus(rng, n, vocab=8, max_len=7):
    return [tw(" ".join(f"w{i}" for i in rng.integers(vocab, size=rng.integers(1, max_len + 1))), str(k))
            for k in range(n)]


# vocabulary and tf-idf

def test_vocabulary_two_tweets():
    v = build_vocabulary([tw("a b"), tw("b c")])
    assert len(v) == 3 and v.document_frequency == {"a": 1, "b": 2, "c": 1}
    assert sorted(v.index.values()) == [0, 1, 2]


def test_df_counts_documents_not_occurrences():
    v = build_vocabulary([tw("a a a")])
    assert len(v) == 1 and v.document_frequency["a"] == 1


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        build_vocabulary([])


def test_df_matches_recount():
    rng = np.random.default_rng(3)
    corpus = random_corpus(rng, 100)
    v = build_vocabulary(corpus)
    for tok in v.index:
        assert v.document_frequency[tok] == sum(tok in t.texts for t in corpus)
    assert set(v.index) == {w for t in corpus for w in t.texts}
    assert all(df <= v.n_documents for df in v.document_frequency.values())


def test_vocabulary_text_round_trip():
    v = build_vocabulary(random_corpus(np.random.default_rng(0), 20))
    back = Vocabulary.from_lines(v.to_lines())
    assert back == v


def test_tfidf_hand_example():
    m = fit_tfidf([tw("a b"), tw("b")])
    assert tfidf_weight(m, "b", tw("b")) == pytest.approx(1.0, abs=1e-15)
    assert m.idf_of("a") == pytest.approx(math.log(3 / 2) + 1)
    assert tfidf_weight(m, "zzz", tw("zzz")) == 0.0


def test_identical_docs_give_tf_proportional_weights():
    m = fit_tfidf([tw("x"), tw("x"), tw("x")])
    assert tfidf_weight(m, "x", tw("x x x")) == pytest.approx(3 * tfidf_weight(m, "x", tw("x")))


def test_tfidf_weight_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(100):
        corpus = random_corpus(rng, int(rng.integers(1, 10)))
        m = fit_tfidf(corpus)
        q = random_corpus(rng, 1, vocab=10)[0]
        n = len(corpus)
        for tok in set(q.texts):
            df = sum(tok in t.texts for t in corpus)
            want = 0.0 if df == 0 else q.texts.count(tok) * (math.log((1 + n) / (1 + df)) + 1)
            assert abs(tfidf_weight(m, tok, q) - want) <= 1e-12


@given(st.integers(1, 1000), st.data())
def test_idf_monotone_and_positive(n, data):
    a = data.draw(st.integers(1, n))
    b = data.draw(st.integers(a, n))
    assert smoothed_idf(b, n) <= smoothed_idf(a, n)
    assert smoothed_idf(n, n) > 0


# embeddings

def test_load_small_table():
    e = load_embeddings("2 3\na 1 0 0\nb 0 1 0")
    assert e.dim == 3 and len(e) == 2
    np.testing.assert_array_equal(e.lookup("b"), [0, 1, 0])


def test_load_without_header():
    e = load_embeddings("a 1 2\nb 3 4\n")
    assert e.dim == 2 and len(e) == 2


@pytest.mark.parametrize("text, line", [
    ("2 3\na 1 0 0\nb 0 1\n", 3),
    ("a 1 0\nb 1 x\n", 2),
])
def test_load_errors_report_line(text, line):
    with pytest.raises(EmbeddingFormatError) as exc:
        load_embeddings(text)
    assert exc.value.lineno == line and f"line {line}" in str(exc.value)


def test_duplicate_token_last_wins():
    with pytest.warns(UserWarning, match="duplicate"):
        e = load_embeddings("a 1 0\na 0 1\n")
    np.testing.assert_array_equal(e.lookup("a"), [0, 1])


def test_thousand_row_round_trip():
    rng = np.random.default_rng(0)
    gen = {f"tok{i}": rng.normal(size=5) for i in range(1000)}
    e = load_embeddings(write_embeddings(EmbeddingTable(5, gen)))
    assert set(e.vectors) == set(gen)
    for tok, v in gen.items():
        np.testing.assert_array_equal(e.lookup(tok), v)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        load_embeddings(write_embeddings(EmbeddingTable(5, gen), header=False))


def test_unk_policies():
    vec = {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 3.0])}
    np.testing.assert_array_equal(EmbeddingTable(2, vec).lookup("z"), [0, 0])
    np.testing.assert_array_equal(EmbeddingTable(2, vec, UnkPolicy.MEAN_OF_ALL).lookup("z"), [0.5, 1.5])
    t = EmbeddingTable(2, vec, UnkPolicy.TRAINABLE, np.array([7.0, 7.0]))
    np.testing.assert_array_equal(t.lookup("z"), [7, 7])


def test_table_rejects_wrong_length():
    with pytest.raises(ValueError):
        EmbeddingTable(3, {"a": np.zeros(2)})


# tweet vectors

def test_mean_of_constant_vectors():
    e = EmbeddingTable(2, {"a": np.array([2.0, -1.0]), "b": np.array([2.0, -1.0])})
    np.testing.assert_array_equal(tweet_vector_mean(tw("a b a"), e).values, [2, -1])


def test_mean_two_tokens():
    e = EmbeddingTable(2, {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])})
    f = tweet_vector_mean(tw("a b"), e)
    np.testing.assert_array_equal(f.values, [0.5, 0.5])
    assert f.provenance is Provenance.EMBEDDING_MEAN


def test_zero_token_tweet_rejected():
    # the Tweet type itself allows an empty token tuple; the featurizers refuse it
    e = EmbeddingTable(2, {})
    empty = Tweet("e", ())
    with pytest.raises(ValueError):
        tweet_vector_mean(empty, e)
    with pytest.raises(ValueError):
        tweet_vector_tfidf_weighted(empty, e, fit_tfidf([tw("a")]))


def _table(rng, vocab=8, dim=4):
    return EmbeddingTable(dim, {f"w{i}": rng.normal(size=dim) for i in range(vocab)})


def test_tweet_vectors_match_naive_loops():
    rng = np.random.default_rng(21)
    for _ in range(100):
        corpus = random_corpus(rng, 6)
        m = fit_tfidf(corpus)
        e = _table(rng, vocab=6)  # w6, w7 are out of the table
        t = random_corpus(rng, 1, vocab=10)[0]
        N = len(t.texts)
        mean = np.zeros(e.dim)
        weighted = np.zeros(e.dim)
        for tok in t.texts:
            v = e.vectors.get(tok, np.zeros(e.dim))
            mean = mean + v
            # second pass: count occurrences of tok in the tweet explicitly
            count = 0
            for other in t.texts:
                count += other == tok
            df = sum(tok in d.texts for d in corpus)
            idf = 0.0 if df == 0 else math.log((1 + len(corpus)) / (1 + df)) + 1
            weighted = weighted + count * idf * v
        assert np.max(np.abs(tweet_vector_mean(t, e).values - mean / N)) <= 1e-12
        assert np.max(np.abs(tweet_vector_tfidf_weighted(t, e, m).values - weighted / N)) <= 1e-12


def test_single_token_weighted_collapses():
    e = EmbeddingTable(3, {"a": np.array([1.0, 2.0, 3.0])})
    m = fit_tfidf([tw("a"), tw("b")])
    w = tfidf_weight(m, "a", tw("a"))
    np.testing.assert_allclose(tweet_vector_tfidf_weighted(tw("a"), e, m).values, w * e.lookup("a"))


def test_all_oov_weighted_is_zero():
    e = EmbeddingTable(3, {"a": np.ones(3)})
    m = fit_tfidf([tw("a")])
    np.testing.assert_array_equal(tweet_vector_tfidf_weighted(tw("q r"), e, m).values, np.zeros(3))


def test_unit_weights_equal_mean():
    rng = np.random.default_rng(2)
    e = _table(rng)
    m = fit_tfidf(random_corpus(rng, 5))
    for t in random_corpus(rng, 30, vocab=10):
        a = tweet_vector_tfidf_weighted(t, e, m, weight=lambda tok, _t: 1.0).values
        np.testing.assert_array_equal(a, tweet_vector_mean(t, e).values)


@given(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), st.integers(0, 10_000))
def test_linear_in_table(c, seed):
    rng = np.random.default_rng(seed)
    e = _table(rng)
    scaled = EmbeddingTable(e.dim, {k: c * v for k, v in e.vectors.items()})
    m = fit_tfidf(random_corpus(rng, 4))
    t = random_corpus(rng, 1, vocab=10)[0]
    np.testing.assert_allclose(tweet_vector_mean(t, scaled).values, c * tweet_vector_mean(t, e).values,
                               atol=1e-12)
    np.testing.assert_allclose(tweet_vector_tfidf_weighted(t, scaled, m).values,
                               c * tweet_vector_tfidf_weighted(t, e, m).values, atol=1e-12)


def test_sparse_vector_one_token():
    m = fit_tfidf([tw("a b"), tw("b")])
    f = tfidf_sparse_vector(tw("a"), m)
    assert f.provenance is Provenance.TFIDF_SPARSE
    np.testing.assert_allclose(f.values, np.eye(2)[m.vocabulary.index["a"]])


def test_sparse_vector_all_oov():
    m = fit_tfidf([tw("a")])
    np.testing.assert_array_equal(tfidf_sparse_vector(tw("z"), m).values, [0.0])


def test_sparse_norm_property():
    rng = np.random.default_rng(4)
    m = fit_tfidf(random_corpus(rng, 20))
    for t in random_corpus(rng, 200, vocab=12):
        n = np.linalg.norm(tfidf_sparse_vector(t, m).values)
        assert n == 0 or abs(n - 1) <= 1e-9


def test_featurize_shapes():
    rng = np.random.default_rng(0)
    corpus = random_corpus(rng, 10)
    m, e = fit_tfidf(corpus), _table(rng)
    assert featurize(corpus, "tfidf", m).shape == (10, len(m.vocabulary))
    assert featurize(corpus, "embedding_mean", embeddings=e).shape == (10, 4)
    X = featurize(corpus, "tfidf_embedding", m, e)
    assert X.shape == (10, 4) and np.isfinite(X).all()
