"""Scoring: per-class Jaccard index, frame accuracy, confusion counts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .skeleton import N_LABEL_CLASSES


def jaccard_binary(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two binary frame vectors.

    Defined as 0 when both vectors are all-zero.
    """
    a = np.asarray(a).astype(bool)
    b = np.asarray(b).astype(bool)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 0.0
    return int(np.count_nonzero(a & b)) / union


@dataclass
class JaccardReport:
    """Per-(sequence, class) scores with their unweighted means."""

    scores: dict[tuple[str, int], float] = field(default_factory=dict)

    @property
    def defined(self) -> bool:
        return bool(self.scores)

    @property
    def overall(self) -> float | None:
        if not self.scores:
            return None
        return float(np.mean(list(self.scores.values())))

    def per_class(self) -> dict[int, float]:
        buckets: dict[int, list[float]] = {}
        for (_, cls), score in self.scores.items():
            buckets.setdefault(cls, []).append(score)
        return {cls: float(np.mean(v)) for cls, v in sorted(buckets.items())}


def mean_jaccard(
    ground_truth: Mapping[str, np.ndarray], predictions: Mapping[str, np.ndarray]
) -> JaccardReport:
    """Jaccard score for every (sequence, gesture class) present in the
    ground truth or the prediction; a class predicted where the ground
    truth lacks it scores 0, pulling the mean down."""
    report = JaccardReport()
    for seq_id in sorted(ground_truth):
        gt = np.asarray(ground_truth[seq_id], dtype=np.int64)
        pred = np.asarray(predictions[seq_id], dtype=np.int64)
        if gt.shape != pred.shape:
            raise ValueError(f"{seq_id}: label length mismatch")
        classes = sorted(set(np.unique(gt)) | set(np.unique(pred)))
        for cls in classes:
            if cls == 0:
                continue
            report.scores[(seq_id, int(cls))] = jaccard_binary(gt == cls, pred == cls)
    return report


@dataclass
class ConfusionMatrix:
    """Frame-wise counts: rows are ground truth, columns predictions.

    Index 0 is rest; the gesture-vs-rest margins are the per-class false
    negatives (column 0, gesture rows) and false positives (row 0, gesture
    columns).
    """

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def log10_grid(self) -> np.ndarray:
        return np.log10(self.counts.astype(np.float64) + 1.0)


def confusion(ground_truth: np.ndarray, predictions: np.ndarray) -> ConfusionMatrix:
    gt = np.asarray(ground_truth, dtype=np.int64)
    pred = np.asarray(predictions, dtype=np.int64)
    if gt.shape != pred.shape:
        raise ValueError("label length mismatch")
    counts = np.zeros((N_LABEL_CLASSES, N_LABEL_CLASSES), dtype=np.int64)
    np.add.at(counts, (gt, pred), 1)
    return ConfusionMatrix(counts)


def frame_accuracy(ground_truth: np.ndarray, predictions: np.ndarray) -> float:
    gt = np.asarray(ground_truth)
    pred = np.asarray(predictions)
    if gt.shape != pred.shape:
        raise ValueError("label length mismatch")
    if gt.size == 0:
        raise ValueError("empty input")
    return float(np.count_nonzero(gt == pred) / gt.size)
