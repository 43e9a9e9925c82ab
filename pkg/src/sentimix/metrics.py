"""Precision, recall, F1 and confusion matrices over the three sentiment classes."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import LABELS, SentimentLabel

N_CLASSES = len(LABELS)


@dataclass(frozen=True)
class Metrics:
    confusion: np.ndarray  # rows gold, columns predicted
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float
    flags: tuple[str, ...] = field(default_factory=tuple)

    def averaged(self, average: str = "weighted") -> tuple[float, float, float]:
        if average == "weighted":
            return self.weighted_precision, self.weighted_recall, self.weighted_f1
        if average == "macro":
            return self.macro_precision, self.macro_recall, self.macro_f1
        raise ValueError(f"unknown average {average!r}")

    def to_dict(self) -> dict:
        d = {}
        for i, lab in enumerate(LABELS):
            d[f"{lab.value}_precision"] = float(self.precision[i])
            d[f"{lab.value}_recall"] = float(self.recall[i])
            d[f"{lab.value}_f1"] = float(self.f1[i])
            d[f"{lab.value}_support"] = int(self.support[i])
        for name in ("macro_precision", "macro_recall", "macro_f1", "weighted_precision",
                     "weighted_recall", "weighted_f1", "accuracy"):
            d[name] = getattr(self, name)
        d["confusion"] = self.confusion.tolist()
        d["flags"] = list(self.flags)
        return d


def _as_index(labels) -> np.ndarray:
    return np.array([lab.index if isinstance(lab, SentimentLabel) else int(lab) for lab in labels],
                    dtype=np.intp)


def confusion_matrix(preds, gold) -> np.ndarray:
    p, g = _as_index(preds), _as_index(gold)
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(cm, (g, p), 1)
    return cm


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def metrics_from_confusion(cm: np.ndarray) -> Metrics:
    cm = np.asarray(cm, dtype=np.int64)
    n = int(cm.sum())
    if n == 0:
        raise ValueError("cannot compute metrics for zero examples")
    tp = np.diag(cm)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    precision = np.array([_ratio(tp[c], predicted[c]) for c in range(N_CLASSES)])
    recall = np.array([_ratio(tp[c], support[c]) for c in range(N_CLASSES)])
    f1 = np.array([_ratio(2 * precision[c] * recall[c], precision[c] + recall[c])
                   for c in range(N_CLASSES)])
    flags = []
    for c, lab in enumerate(LABELS):
        if predicted[c] == 0:
            flags.append(f"{lab.value}: no predictions, precision set to 0")
        if support[c] == 0:
            flags.append(f"{lab.value}: no gold examples, excluded from macro average")
    present = [c for c in range(N_CLASSES) if support[c] > 0]

    def macro(v):
        return math.fsum(v[c] for c in present) / len(present)

    def weighted(v):
        return math.fsum(support[c] * v[c] for c in present) / n

    return Metrics(
        confusion=cm, precision=precision, recall=recall, f1=f1, support=support,
        macro_precision=macro(precision), macro_recall=macro(recall), macro_f1=macro(f1),
        weighted_precision=weighted(precision), weighted_recall=weighted(recall),
        weighted_f1=weighted(f1), accuracy=int(tp.sum()) / n, flags=tuple(flags),
    )


def evaluate(preds: Sequence, gold: Sequence) -> Metrics:
    """Metrics for predicted vs gold labels (``SentimentLabel`` or class indices)."""
    if len(preds) != len(gold):
        raise ValueError(f"{len(preds)} predictions for {len(gold)} gold labels")
    if not gold:
        raise ValueError("cannot evaluate an empty prediction list")
    return metrics_from_confusion(confusion_matrix(preds, gold))


COLUMNS = ("Model", "Representations", "Precision", "Recall", "f1-Score")


def results_table(rows, average: str = "weighted") -> str:
    """Render ``(model, representation, metrics)`` rows as an aligned text table.

    ``metrics`` is a ``Metrics`` (its ``average`` scores are shown) or a
    ``(precision, recall, f1)`` triple.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("results table needs at least one row")
    cells = []
    for name, rep, m in rows:
        p, r, f = m.averaged(average) if isinstance(m, Metrics) else m
        cells.append((str(name), str(rep), f"{p:.4f}", f"{r:.4f}", f"{f:.4f}"))
    widths = [max(len(c[i]) for c in cells + [COLUMNS]) for i in range(len(COLUMNS))]

    def line(c):
        left = [c[0].ljust(widths[0]), c[1].ljust(widths[1])]
        right = [c[i].rjust(widths[i]) for i in range(2, len(COLUMNS))]
        return "  ".join(left + right).rstrip()

    rule = "-" * len(line(COLUMNS))
    return "\n".join([line(COLUMNS), rule] + [line(c) for c in cells]) + "\n"


def results_records(rows) -> str:
    """One JSON object per row, for machine consumption."""
    out = []
    for name, rep, m in rows:
        rec = {"model": name, "representation": rep}
        if isinstance(m, Metrics):
            rec.update(m.to_dict())
        else:
            rec.update(zip(("precision", "recall", "f1"), map(float, m)))
        out.append(json.dumps(rec, sort_keys=True))
    return "\n".join(out) + "\n"
