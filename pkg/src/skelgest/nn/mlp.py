"""Dense feedforward networks with analytic gradients.

Supports ReLU / leaky ReLU / tanh / sigmoid hidden layers and a sigmoid
or softmax output paired with binary or categorical cross-entropy.  The
loss is averaged over the batch, targets may be hard class indices or
soft distributions, and both loss variants are computed from the output
pre-activations in numerically stable form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import PortableRng
from .activations import activation, log_softmax, sigmoid, softmax
from .model_io import NetworkModel, make_layout

LOSSES = ("bce", "cce")


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths (input first), one activation per layer, and the loss."""

    sizes: tuple[int, ...]
    activations: tuple[str, ...]
    loss: str

    def __post_init__(self):
        if len(self.sizes) < 3:
            raise ValueError("need at least one hidden layer")
        if len(self.activations) != len(self.sizes) - 1:
            raise ValueError("one activation per non-input layer required")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        out_act = self.activations[-1]
        if self.loss == "bce" and out_act != "sigmoid":
            raise ValueError("bce requires a sigmoid output layer")
        if self.loss == "cce" and out_act != "softmax":
            raise ValueError("cce requires a softmax output layer")

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def param_count(self) -> int:
        return sum(
            (self.sizes[i] + 1) * self.sizes[i + 1] for i in range(self.n_layers)
        )


def _glorot(rng: PortableRng, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return (rng.uniform(shape) * 2.0 - 1.0) * limit


def init_mlp(spec: MlpSpec, rng: PortableRng, **model_fields) -> NetworkModel:
    blocks = []
    for i in range(spec.n_layers):
        blocks.append((f"layer{i}.W", (spec.sizes[i], spec.sizes[i + 1])))
        blocks.append((f"layer{i}.b", (spec.sizes[i + 1],)))
    layout, total = make_layout(blocks)
    params = np.zeros(total)
    model = NetworkModel(kind="mlp", spec=spec, params=params, layout=layout, **model_fields)
    views = model.views()
    for i in range(spec.n_layers):
        views[f"layer{i}.W"][:] = _glorot(
            rng, spec.sizes[i], spec.sizes[i + 1], (spec.sizes[i], spec.sizes[i + 1])
        )
    return model


def _forward(model: NetworkModel, x: np.ndarray):
    """All layer outputs plus the final pre-activation.

    Overflow is tolerated here; non-finite results surface as a reported
    error in the loss computation.
    """
    spec: MlpSpec = model.spec
    views = model.views()
    outputs = [x]
    z_last = None
    h = x
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(spec.n_layers):
            z = h @ views[f"layer{i}.W"] + views[f"layer{i}.b"]
            name = spec.activations[i]
            if i == spec.n_layers - 1:
                z_last = z
                h = softmax(z) if name == "softmax" else sigmoid(z)
            else:
                h = activation(name)[0](z)
            outputs.append(h)
    return outputs, z_last


def mlp_forward(model: NetworkModel, x: np.ndarray) -> np.ndarray:
    """Batch forward pass; x has shape (batch, input_width)."""
    spec: MlpSpec = model.spec
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != spec.sizes[0]:
        raise ValueError(f"input width {x.shape[1]} != expected {spec.sizes[0]}")
    outputs, _ = _forward(model, x)
    return outputs[-1]


def _prepare_targets(spec: MlpSpec, targets, batch: int) -> np.ndarray:
    """Targets as a dense (batch, out) float array; int vectors are one-hot."""
    out_width = spec.sizes[-1]
    t = np.asarray(targets)
    if t.ndim == 1 and np.issubdtype(t.dtype, np.integer) and spec.loss == "cce":
        onehot = np.zeros((batch, out_width))
        onehot[np.arange(batch), t] = 1.0
        return onehot
    t = np.atleast_2d(t).astype(np.float64)
    if t.shape != (batch, out_width):
        raise ValueError(f"targets shape {t.shape} != {(batch, out_width)}")
    return t


def mlp_loss_gradient(
    model: NetworkModel, x: np.ndarray, targets
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its gradient in layout order."""
    spec: MlpSpec = model.spec
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != spec.sizes[0]:
        raise ValueError(f"input width {x.shape[1]} != expected {spec.sizes[0]}")
    batch = x.shape[0]
    y = _prepare_targets(spec, targets, batch)
    views = model.views()
    outputs, z_last = _forward(model, x)
    prediction = outputs[-1]

    with np.errstate(invalid="ignore", over="ignore"):
        if spec.loss == "cce":
            loss = float(-(y * log_softmax(z_last)).sum() / batch)
        else:
            # softplus(z) - y z, elementwise-stable binary cross-entropy
            loss = float((np.logaddexp(0.0, z_last) - y * z_last).sum() / batch)
    if not np.isfinite(loss):
        bad = np.flatnonzero(~np.isfinite(z_last).all(axis=1))
        raise FloatingPointError(
            f"non-finite loss (first offending batch index: {bad[0] if bad.size else 'n/a'})"
        )

    grad = np.zeros_like(model.params)
    gviews = NetworkModel(
        kind=model.kind, spec=spec, params=grad, layout=model.layout
    ).views()

    delta = (prediction - y) / batch
    for i in reversed(range(spec.n_layers)):
        gviews[f"layer{i}.W"][:] = outputs[i].T @ delta
        gviews[f"layer{i}.b"][:] = delta.sum(axis=0)
        if i > 0:
            back = activation(spec.activations[i - 1])[1]
            delta = (delta @ views[f"layer{i}.W"].T) * back(outputs[i])
    return loss, grad


def mlp_objective(model: NetworkModel, x: np.ndarray, targets):
    """Closure (loss, grad) over the flat parameter vector, for optimizers."""

    def fun(w: np.ndarray) -> tuple[float, np.ndarray]:
        return mlp_loss_gradient(model.with_params(w), x, targets)

    return fun
