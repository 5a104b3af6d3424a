"""Elementwise activations with derivatives expressed from the outputs.

Each entry maps a name to ``(forward, backward)`` where ``backward(out)``
is the derivative evaluated from the activation output.  Softmax is not
listed here; it is fused with the cross-entropy loss in the layer code.
"""

from __future__ import annotations

import numpy as np

LEAKY_SLOPE = 0.01


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


_TABLE = {
    "relu": (
        lambda z: np.maximum(z, 0.0),
        lambda out: (out > 0).astype(np.float64),
    ),
    "leaky_relu": (
        lambda z: np.where(z > 0, z, LEAKY_SLOPE * z),
        lambda out: np.where(out > 0, 1.0, LEAKY_SLOPE),
    ),
    "tanh": (np.tanh, lambda out: 1.0 - out * out),
    "sigmoid": (sigmoid, lambda out: out * (1.0 - out)),
    "identity": (lambda z: z, lambda out: np.ones_like(out)),
}


def activation(name: str):
    """(forward, backward-from-output) pair for a hidden activation name."""
    try:
        return _TABLE[name]
    except KeyError:
        raise ValueError(f"unknown activation '{name}'") from None


HIDDEN_ACTIVATIONS = tuple(_TABLE)
OUTPUT_ACTIVATIONS = ("sigmoid", "softmax")
