"""Stochastic gradient descent with classic momentum and step-decay schedule."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..rng import PortableRng
from .scg import TrainingDivergedError

BatchGradient = Callable[[np.ndarray, Sequence[int]], tuple[float, np.ndarray]]

_DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class SgdmSchedule:
    learning_rate: float = 0.01
    drop_factor: float = 0.85
    drop_period: int = 10
    momentum: float = 0.9
    max_epochs: int = 150
    batch_size: int = 128

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.drop_factor <= 1.0:
            raise ValueError("drop_factor must lie in (0, 1]")
        if self.drop_period < 1 or self.max_epochs < 1 or self.batch_size < 1:
            raise ValueError("schedule counts must be >= 1")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")

    def rate_at(self, epoch: int) -> float:
        """Effective learning rate for a zero-based epoch index."""
        return self.learning_rate * self.drop_factor ** (epoch // self.drop_period)


def sgdm_minimize(
    fun: BatchGradient,
    w0: np.ndarray,
    n_samples: int,
    schedule: SgdmSchedule,
    rng: PortableRng,
) -> tuple[np.ndarray, list[float]]:
    """Momentum SGD over shuffled mini-batches.

    ``fun(w, batch_indices)`` returns the batch loss and gradient.  Updates
    are v <- momentum*v - rate*grad; w <- w + v.  The sample order is
    reshuffled every epoch from ``rng``; a final short batch is still
    consumed.  Returns the weights and the per-epoch mean batch loss.
    """
    w = np.array(w0, dtype=np.float64)
    velocity = np.zeros_like(w)
    trace: list[float] = []
    for epoch in range(schedule.max_epochs):
        rate = schedule.rate_at(epoch)
        order = rng.permutation(n_samples)
        epoch_losses = []
        for start in range(0, n_samples, schedule.batch_size):
            batch = order[start : start + schedule.batch_size]
            loss, grad = fun(w, batch)
            if not np.isfinite(loss) or loss > _DIVERGENCE_LIMIT:
                raise TrainingDivergedError(
                    f"loss {loss} diverged at epoch {epoch}", trace
                )
            velocity = schedule.momentum * velocity - rate * grad
            w = w + velocity
            epoch_losses.append(loss)
        trace.append(float(np.mean(epoch_losses)))
    return w, trace
