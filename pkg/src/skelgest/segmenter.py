"""Frame-wise activity detection.

A small dense network scores every frame's pose descriptor as gesture
motion vs rest; the score trajectory is smoothed by local quadratic
regression, thresholded (strictly above the threshold counts as active),
and runs shorter than the minimum period are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .descriptor import DESCRIPTOR_DIM
from .nn import MlpSpec, NetworkModel, init_mlp, mlp_forward, mlp_objective, scg_minimize
from .rng import PortableRng
from .smoothing import loess_smooth


@dataclass(frozen=True)
class ActivityPeriod:
    """Inclusive frame interval of detected activity."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError("invalid period bounds")

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class SegmenterConfig:
    threshold: float = 0.4
    min_period: int = 12
    loess_span: int = 11
    # Rest frames within this many frames of a gesture boundary are negative
    # candidates; None means "use each gesture's own length".
    negative_margin: int | None = None
    hidden_sizes: tuple[int, int] = (100, 100)
    max_iterations: int = 300

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.min_period < 1:
            raise ValueError("min_period must be >= 1")
        if self.loess_span < 5 or self.loess_span % 2 == 0:
            raise ValueError("loess_span must be odd and >= 5")


def build_binary_training_set(
    descriptor_seqs: Sequence[np.ndarray],
    label_seqs: Sequence[np.ndarray],
    config: SegmenterConfig,
    rng: PortableRng,
) -> tuple[np.ndarray, np.ndarray]:
    """Balanced frame-level training set for the activity detector.

    Positives are all gesture frames.  Negative candidates are rest frames
    within the configured margin before or after a gesture run; they are
    subsampled to match the positive count.
    """
    positives = []
    candidates = []
    for seq_idx, (desc, labels) in enumerate(zip(descriptor_seqs, label_seqs)):
        labels = np.asarray(labels)
        if desc.shape[0] != labels.shape[0]:
            raise ValueError(f"sequence {seq_idx}: descriptor/label length mismatch")
        n = labels.shape[0]
        active = labels != 0
        near = np.zeros(n, dtype=bool)
        for start, end in _runs(active):
            margin = config.negative_margin or (end - start + 1)
            near[max(0, start - margin) : start] = True
            near[end + 1 : min(n, end + 1 + margin)] = True
        for t in np.flatnonzero(active):
            positives.append(desc[t])
        for t in np.flatnonzero(near & ~active):
            candidates.append(desc[t])

    if not positives:
        raise ValueError("no positive (gesture) frames in the dataset")

    order = list(range(len(candidates)))
    rng.shuffle(order)
    keep = order[: len(positives)]
    x = np.vstack([*positives, *[candidates[i] for i in keep]])
    y = np.concatenate([np.ones(len(positives)), np.zeros(len(keep))])
    return x, y[:, None]


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal true runs of a boolean vector as inclusive (start, end)."""
    out = []
    start = None
    for i, v in enumerate(mask):
        if v and start is None:
            start = i
        elif not v and start is not None:
            out.append((start, i - 1))
            start = None
    if start is not None:
        out.append((start, len(mask) - 1))
    return out


def train_segmenter(
    x: np.ndarray,
    y: np.ndarray,
    config: SegmenterConfig,
    rng: PortableRng,
    **model_fields,
) -> tuple[NetworkModel, list[float]]:
    """Fit the descriptor -> activity-score network with SCG."""
    h1, h2 = config.hidden_sizes
    spec = MlpSpec(
        sizes=(DESCRIPTOR_DIM, h1, h2, 1),
        activations=("relu", "tanh", "sigmoid"),
        loss="bce",
    )
    model = init_mlp(spec, rng, **model_fields)
    result = scg_minimize(
        mlp_objective(model, x, y), model.params, max_iterations=config.max_iterations
    )
    return model.with_params(result.w), result.trace


def score_frames(model: NetworkModel, descriptors: np.ndarray) -> np.ndarray:
    """Raw per-frame activity scores in (0, 1)."""
    return mlp_forward(model, descriptors)[:, 0]


def extract_periods(scores: np.ndarray, config: SegmenterConfig) -> list[ActivityPeriod]:
    """Maximal runs strictly above the threshold, at least min_period long."""
    scores = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores contain non-finite values")
    periods = [
        ActivityPeriod(start, end)
        for start, end in _runs(scores > config.threshold)
        if end - start + 1 >= config.min_period
    ]
    return periods


def segment_sequence(
    model: NetworkModel, descriptors: np.ndarray, config: SegmenterConfig
) -> tuple[list[ActivityPeriod], np.ndarray]:
    """Detected activity periods and the smoothed score trajectory."""
    smoothed = loess_smooth(score_frames(model, descriptors), config.loess_span)
    return extract_periods(smoothed, config), smoothed


def binary_activity(labels_or_periods, n_frames: int) -> np.ndarray:
    """Per-frame 0/1 activity from labels or from a period list."""
    out = np.zeros(n_frames, dtype=np.int64)
    if isinstance(labels_or_periods, np.ndarray):
        out[labels_or_periods != 0] = 1
    else:
        for p in labels_or_periods:
            out[p.start : p.end + 1] = 1
    return out
