"""Simultaneous gesture segmentation and classification with a biLSTM stack.

Training slides a 10-frame window over each sequence, advancing 5 frames
while the window is all rest and 2 frames otherwise, and fits the stack
with momentum SGD under a step-decay schedule.  Inference tiles the
sequence into non-overlapping windows, smooths the 21 per-class score
trajectories, takes the per-frame argmax, and suppresses any nonzero run
shorter than the minimum duration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .descriptor import DESCRIPTOR_DIM
from .nn import (
    LstmStackSpec,
    NetworkModel,
    SgdmSchedule,
    bilstm_forward,
    bilstm_loss_gradient,
    init_lstm_stack,
    sgdm_minimize,
)
from .rng import PortableRng
from .skeleton import N_LABEL_CLASSES
from .smoothing import loess_smooth

WINDOW_LEN = 10
REST_STEP = 5
ACTIVE_STEP = 2


@dataclass(frozen=True)
class RnnConfig:
    hidden_sizes: tuple[int, ...] = (1024, 1024, 512)
    dropout: float = 0.6
    leaky_slope: float = 0.01
    learning_rate: float = 0.01
    drop_factor: float = 0.85
    drop_period: int = 10
    max_epochs: int = 150
    batch_size: int = 128
    momentum: float = 0.9
    clip_norm: float | None = 1.0
    min_run: int = 15
    loess_span: int = 11

    def __post_init__(self):
        if self.min_run < 1:
            raise ValueError("min_run must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        # remaining schedule fields are validated by SgdmSchedule

    def schedule(self) -> SgdmSchedule:
        return SgdmSchedule(
            learning_rate=self.learning_rate,
            drop_factor=self.drop_factor,
            drop_period=self.drop_period,
            momentum=self.momentum,
            max_epochs=self.max_epochs,
            batch_size=self.batch_size,
        )

    def stack_spec(self) -> LstmStackSpec:
        n = len(self.hidden_sizes)
        post = tuple("leaky_relu" if i < n - 1 else "identity" for i in range(n))
        drops = tuple(self.dropout if i < n - 1 else 0.0 for i in range(n))
        return LstmStackSpec(
            input_size=DESCRIPTOR_DIM,
            hidden_sizes=tuple(self.hidden_sizes),
            post_activations=post,
            dropouts=drops,
            n_classes=N_LABEL_CLASSES,
            leaky_slope=self.leaky_slope,
        )


@dataclass(frozen=True)
class TrainWindow:
    """Ten consecutive descriptor frames with their per-frame targets."""

    features: np.ndarray  # (10, 183)
    targets: np.ndarray   # (10,)

    def __post_init__(self):
        if self.features.shape != (WINDOW_LEN, DESCRIPTOR_DIM):
            raise ValueError(f"features must be ({WINDOW_LEN}, {DESCRIPTOR_DIM})")
        if self.targets.shape != (WINDOW_LEN,):
            raise ValueError(f"targets must be ({WINDOW_LEN},)")


def extract_train_windows(
    descriptors: np.ndarray, labels: np.ndarray
) -> list[TrainWindow]:
    """Slide a 10-frame window: advance 5 frames over all-rest windows,
    2 frames otherwise.  Sequences shorter than 10 frames yield nothing."""
    labels = np.asarray(labels, dtype=np.int64)
    if descriptors.shape[0] != labels.shape[0]:
        raise ValueError("descriptor/label length mismatch")
    windows = []
    t = 0
    n = labels.shape[0]
    while t + WINDOW_LEN <= n:
        w = labels[t : t + WINDOW_LEN]
        windows.append(TrainWindow(descriptors[t : t + WINDOW_LEN], w.copy()))
        t += REST_STEP if np.all(w == 0) else ACTIVE_STEP
    return windows


def train_rnn(
    windows: Sequence[TrainWindow],
    config: RnnConfig,
    rng: PortableRng,
    **model_fields,
) -> tuple[NetworkModel, list[float]]:
    """Fit the stack with momentum SGD; loss is per-frame cross-entropy
    averaged over window frames and batch."""
    if not windows:
        raise ValueError("no training windows")
    # (T, N, D) and (T, N): windows all share the fixed length
    x = np.stack([w.features for w in windows], axis=1)
    y = np.stack([w.targets for w in windows], axis=1)

    model = init_lstm_stack(config.stack_spec(), rng, **model_fields)
    dropout_rng = rng.spawn(1)

    def fun(w, batch):
        return bilstm_loss_gradient(
            model.with_params(w),
            x[:, batch, :],
            y[:, batch],
            training=True,
            rng=dropout_rng,
            clip_norm=config.clip_norm,
        )

    trained, trace = sgdm_minimize(
        fun, model.params, len(windows), config.schedule(), rng.spawn(2)
    )
    return model.with_params(trained), trace


def suppress_short_runs(labels: np.ndarray, min_run: int) -> np.ndarray:
    """Reset maximal nonzero runs shorter than min_run to rest."""
    labels = np.asarray(labels, dtype=np.int64).copy()
    n = labels.shape[0]
    start = 0
    for i in range(1, n + 1):
        if i == n or labels[i] != labels[start]:
            if labels[start] != 0 and i - start < min_run:
                labels[start:i] = 0
            start = i
    return labels


def label_sequence(
    model: NetworkModel, descriptors: np.ndarray, config: RnnConfig
) -> np.ndarray:
    """Per-frame labels for a whole sequence.

    The sequence is split into consecutive non-overlapping 10-frame windows
    (a final shorter remainder is processed at its natural length), the 21
    class-score trajectories are smoothed, and short argmax runs removed.
    """
    n = descriptors.shape[0]
    scores = np.zeros((n, N_LABEL_CLASSES))
    for start in range(0, n, WINDOW_LEN):
        chunk = descriptors[start : start + WINDOW_LEN]
        scores[start : start + chunk.shape[0]] = bilstm_forward(model, chunk)
    smoothed = loess_smooth(scores, config.loess_span)
    raw = np.argmax(smoothed, axis=1).astype(np.int64)
    return suppress_short_runs(raw, config.min_run)
