"""Accuracy, per-class precision/recall/F1 and macro-F1.

Zero denominators give 0 (precision, recall and F1 alike). A run is
*degenerate* when some class has both precision and recall equal to 0,
i.e. the classifier never predicts it correctly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..classifier.model import PRISTINE, TAMPERED, label_value
from ..errors import EmptyInput, LengthMismatch


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float

    @property
    def silent(self) -> bool:
        return self.precision == 0.0 and self.recall == 0.0


@dataclass(frozen=True)
class Metrics:
    accuracy: float  # percent
    macro_f1: float
    pristine: ClassScores
    tampered: ClassScores
    degenerate: bool
    n: int


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def class_scores(pred: np.ndarray, true: np.ndarray, cls: int) -> ClassScores:
    tp = int(np.sum((pred == cls) & (true == cls)))
    fp = int(np.sum((pred == cls) & (true != cls)))
    fn = int(np.sum((pred != cls) & (true == cls)))
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return ClassScores(p, r, f1)


def _as_label_array(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype.kind in "iuf":
        return np.where(arr > 0, TAMPERED, PRISTINE)
    return np.array([label_value(v) for v in arr], dtype=np.int64)


def compute_metrics(predictions, labels) -> Metrics:
    pred = _as_label_array(predictions)
    true = _as_label_array(labels)
    if pred.shape[0] != true.shape[0]:
        raise LengthMismatch(f"{pred.shape[0]} predictions for {true.shape[0]} labels")
    if pred.shape[0] == 0:
        raise EmptyInput("no predictions to score")
    pristine = class_scores(pred, true, PRISTINE)
    tampered = class_scores(pred, true, TAMPERED)
    n = int(true.shape[0])
    return Metrics(
        accuracy=100.0 * int(np.sum(pred == true)) / n,
        macro_f1=(pristine.f1 + tampered.f1) / 2,
        pristine=pristine,
        tampered=tampered,
        degenerate=pristine.silent or tampered.silent,
        n=n,
    )


def mean_metrics(items) -> Metrics:
    """Average of several runs; the flag is re-derived from the averaged
    per-class scores."""
    items = list(items)
    if not items:
        raise EmptyInput("nothing to average")
    k = len(items)

    def avg(get):
        return sum(get(m) for m in items) / k

    def avg_cls(name):
        return ClassScores(*(avg(lambda m, f=f: getattr(getattr(m, name), f))
                             for f in ("precision", "recall", "f1")))

    pristine, tampered = avg_cls("pristine"), avg_cls("tampered")
    return Metrics(
        accuracy=avg(lambda m: m.accuracy),
        macro_f1=(pristine.f1 + tampered.f1) / 2,
        pristine=pristine,
        tampered=tampered,
        degenerate=pristine.silent or tampered.silent,
        n=sum(m.n for m in items),
    )
