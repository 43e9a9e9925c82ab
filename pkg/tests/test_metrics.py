import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sentimix.corpus import LABELS, SentimentLabel
from sentimix.metrics import COLUMNS, confusion_matrix, evaluate, results_records, results_table

P, N, U = SentimentLabel.POSITIVE, SentimentLabel.NEGATIVE, SentimentLabel.NEUTRAL

label_lists = st.integers(1, 60).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 2), min_size=n, max_size=n),
                        st.lists(st.integers(0, 2), min_size=n, max_size=n)))


def recount(preds, gold):
    """Brute-force per-class counts and the derived scores."""
    out = {}
    for c in range(3):
        tp = sum(1 for p, g in zip(preds, gold) if p == c and g == c)
        fp = sum(1 for p, g in zip(preds, gold) if p == c and g != c)
        fn = sum(1 for p, g in zip(preds, gold) if p != c and g == c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        out[c] = (prec, rec, f1, tp + fn)
    return out


def test_perfect_predictions():
    m = evaluate([P, N, U, P], [P, N, U, P])
    assert m.accuracy == m.macro_f1 == m.weighted_f1 == 1.0
    assert (m.precision == 1).all() and (m.recall == 1).all()


def test_hand_example():
    m = evaluate([P, N, N, N], [P, P, N, N])
    assert m.precision[0] == 1.0 and m.recall[0] == 0.5
    assert m.f1[0] == pytest.approx(2 / 3, abs=1e-15)
    assert m.precision[1] == pytest.approx(2 / 3, abs=1e-15) and m.recall[1] == 1.0
    assert m.f1[1] == pytest.approx(0.8, abs=1e-15)
    assert any("neutral" in f for f in m.flags)
    # neutral has no gold support so the macro average covers two classes
    assert m.macro_f1 == pytest.approx((2 / 3 + 0.8) / 2, abs=1e-15)


def test_errors():
    with pytest.raises(ValueError):
        evaluate([P], [P, N])
    with pytest.raises(ValueError):
        evaluate([], [])


def test_zero_prediction_class_flagged():
    m = evaluate([P, P], [P, N])
    assert m.precision[1] == 0.0 and m.f1[1] == 0.0
    assert any(f.startswith("negative: no predictions") for f in m.flags)


def test_thousand_random_pairs_match_recount():
    rng = np.random.default_rng(0)
    preds, gold = rng.integers(3, size=1000).tolist(), rng.integers(3, size=1000).tolist()
    m = evaluate(preds, gold)
    ref = recount(preds, gold)
    for c in range(3):
        assert (m.precision[c], m.recall[c], m.f1[c], m.support[c]) == ref[c]
    cm = [[sum(1 for p, g in zip(preds, gold) if g == r and p == k) for k in range(3)] for r in range(3)]
    assert m.confusion.tolist() == cm


@given(label_lists)
def test_matches_recount_property(pg):
    preds, gold = pg
    m = evaluate(preds, gold)
    ref = recount(preds, gold)
    for c in range(3):
        assert (m.precision[c], m.recall[c], m.f1[c], m.support[c]) == ref[c]
    assert m.confusion.sum() == len(gold) and (m.confusion >= 0).all()
    for v in (m.macro_precision, m.macro_recall, m.macro_f1, m.weighted_precision,
              m.weighted_recall, m.weighted_f1, m.accuracy):
        assert 0.0 <= v <= 1.0


@given(label_lists)
def test_weighted_recall_is_accuracy(pg):
    m = evaluate(*pg)
    assert math.isclose(m.weighted_recall, m.accuracy, rel_tol=1e-12, abs_tol=1e-15)


@given(label_lists, st.permutations([0, 1, 2]))
def test_macro_f1_relabel_invariant(pg, perm):
    preds, gold = pg
    a = evaluate(preds, gold)
    b = evaluate([perm[p] for p in preds], [perm[g] for g in gold])
    assert math.isclose(a.macro_f1, b.macro_f1, rel_tol=1e-12, abs_tol=1e-15)


def test_confusion_rows_are_gold():
    assert confusion_matrix([N], [P]).tolist() == [[0, 1, 0], [0, 0, 0], [0, 0, 0]]


def test_table_row_digits():
    out = results_table([("SS-LSTM", "FastText and 1D-CNN", (0.6819, 0.6773, 0.6758))])
    header, rule, row = out.splitlines()
    assert header.split("  ")[0].strip() == COLUMNS[0]
    assert [c for c in COLUMNS if c in header] == list(COLUMNS)
    assert header.index("Precision") < header.index("Recall") < header.index("f1-Score")
    assert set(rule) == {"-"}
    assert row.startswith("SS-LSTM") and "FastText and 1D-CNN" in row
    assert row.split()[-3:] == ["0.6819", "0.6773", "0.6758"]


def test_table_formats_one():
    out = results_table([("m", "r", evaluate([P], [P]))])
    assert out.splitlines()[-1].split()[-3:] == ["1.0000"] * 3


def test_table_keeps_order_and_aligns():
    rows = [(f"model{i}", "rep" * (i % 3 + 1), (i / 14, i / 15, i / 16)) for i in range(14)]
    lines = results_table(rows).splitlines()[2:]
    assert len(lines) == 14
    assert [ln.split()[0] for ln in lines] == [f"model{i}" for i in range(14)]
    assert len({len(ln) for ln in lines}) == 1


def test_table_needs_rows():
    with pytest.raises(ValueError):
        results_table([])


def test_records_one_per_row():
    m = evaluate([P, N], [P, U])
    recs = [json.loads(x) for x in results_records([("a", "b", m), ("c", "d", (0.1, 0.2, 0.3))]).splitlines()]
    assert recs[0]["model"] == "a" and recs[0]["weighted_f1"] == m.weighted_f1
    assert recs[0]["confusion"] == m.confusion.tolist()
    assert recs[1] == {"model": "c", "representation": "d", "precision": 0.1, "recall": 0.2, "f1": 0.3}


def test_label_objects_and_indices_agree():
    rng = np.random.default_rng(1)
    idx = rng.integers(3, size=50)
    gold = rng.integers(3, size=50)
    a = evaluate(idx.tolist(), gold.tolist())
    b = evaluate([LABELS[i] for i in idx], [LABELS[i] for i in gold])
    assert a.to_dict() == b.to_dict()
