"""Evaluation metrics: confusion matrix, accuracy and per-class
precision/recall/F1, plus a fixed-width rendered classification report."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ConfusionMatrix:
    """K-by-K counts; entry (i, j) is how often true class i was predicted j."""

    counts: np.ndarray
    class_names: list[str]

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.class_names)
        if self.counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}, got {self.counts.shape}")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class ClassificationReport:
    class_names: list[str]
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    macro_precision: float = field(init=False)
    macro_recall: float = field(init=False)
    macro_f1: float = field(init=False)

    def __post_init__(self):
        self.precision = np.asarray(self.precision, dtype=np.float64)
        self.recall = np.asarray(self.recall, dtype=np.float64)
        self.f1 = np.asarray(self.f1, dtype=np.float64)
        self.support = np.asarray(self.support, dtype=np.int64)
        self.macro_precision = float(self.precision.mean())
        self.macro_recall = float(self.recall.mean())
        self.macro_f1 = float(self.f1.mean())

    def to_dict(self) -> dict:
        """Machine-readable export of the same numbers the text table shows."""
        per_class = {
            name: {
                "precision": float(self.precision[k]),
                "recall": float(self.recall[k]),
                "f1": float(self.f1[k]),
                "support": int(self.support[k]),
            }
            for k, name in enumerate(self.class_names)
        }
        return {
            "classes": per_class,
            "accuracy": self.accuracy,
            "macro_avg": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "total": int(self.support.sum()),
        }


def confusion_matrix(y_true, y_pred, class_names: list[str]) -> ConfusionMatrix:
    """Exact counts of (true, predicted) label pairs."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape[0]} true vs {y_pred.shape[0]} predicted")
    k = len(class_names)
    for name, arr in (("true", y_true), ("predicted", y_pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValueError(f"{name} labels out of range for {k} classes")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts, list(class_names))


def report(cm: ConfusionMatrix) -> ClassificationReport:
    """Per-class precision, recall and F1 with the 0/0 -> 0 convention,
    plus overall accuracy = trace / total."""
    if cm.total == 0:
        raise ValueError("cannot build a report from an empty confusion matrix")
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2.0 * precision * recall / denom, 0.0)
    accuracy = float(tp.sum() / counts.sum())
    return ClassificationReport(
        class_names=cm.class_names,
        precision=precision,
        recall=recall,
        f1=f1,
        support=cm.counts.sum(axis=1),
        accuracy=accuracy,
    )


def render_report(r: ClassificationReport) -> str:
    """Fixed-width text table: one row per class, then accuracy and
    macro-average rows. Two-decimal values, byte-stable across runs."""
    name_w = max(12, max(len(n) for n in r.class_names))
    total = int(r.support.sum())
    sup_w = max(7, len(str(total)))
    head = f"{'':<{name_w}}  {'precision':>9}  {'recall':>9}  {'f1-score':>9}  {'support':>{sup_w}}"
    lines = [head, ""]
    for k, name in enumerate(r.class_names):
        lines.append(
            f"{name:<{name_w}}  {r.precision[k]:>9.2f}  {r.recall[k]:>9.2f}"
            f"  {r.f1[k]:>9.2f}  {r.support[k]:>{sup_w}d}"
        )
    lines.append("")
    lines.append(f"{'accuracy':<{name_w}}  {'':>9}  {'':>9}  {r.accuracy:>9.2f}  {total:>{sup_w}d}")
    lines.append(
        f"{'macro avg':<{name_w}}  {r.macro_precision:>9.2f}  {r.macro_recall:>9.2f}"
        f"  {r.macro_f1:>9.2f}  {total:>{sup_w}d}"
    )
    lines.append("")
    lines.append("note: undefined ratios (0/0) are reported as 0.00")
    return "\n".join(lines) + "\n"
