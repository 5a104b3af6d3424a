"""Bidirectional LSTM stacks with full backpropagation through time.

Cells follow the standard equations: sigmoid input/forget/output gates,
tanh candidate and cell output, gate blocks packed [i, f, g, o].  Each
bidirectional layer concatenates the forward and reverse hidden states
per frame, optionally applies an elementwise leaky ReLU, and optionally
drops inputs to the next layer (inverted dropout, training only).  The
final dense layer emits per-frame softmax class scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import PortableRng
from .activations import sigmoid, softmax, log_softmax
from .model_io import NetworkModel, make_layout

_POST_ACTIVATIONS = ("leaky_relu", "identity")


@dataclass(frozen=True)
class LstmStackSpec:
    input_size: int
    hidden_sizes: tuple[int, ...]
    post_activations: tuple[str, ...]
    dropouts: tuple[float, ...]
    n_classes: int = 21
    leaky_slope: float = 0.01

    def __post_init__(self):
        if not self.hidden_sizes:
            raise ValueError("need at least one recurrent layer")
        n = len(self.hidden_sizes)
        if len(self.post_activations) != n or len(self.dropouts) != n:
            raise ValueError("per-layer activation and dropout lists must match sizes")
        for a in self.post_activations:
            if a not in _POST_ACTIVATIONS:
                raise ValueError(f"post activation must be one of {_POST_ACTIVATIONS}")
        for p in self.dropouts:
            if not 0.0 <= p < 1.0:
                raise ValueError("dropout probabilities must lie in [0, 1)")
        if self.n_classes < 2:
            raise ValueError("need at least two output classes")

    @property
    def n_layers(self) -> int:
        return len(self.hidden_sizes)

    def layer_input_sizes(self) -> list[int]:
        sizes = [self.input_size]
        for h in self.hidden_sizes[:-1]:
            sizes.append(2 * h)
        return sizes

    def param_count(self) -> int:
        total = 0
        for d, h in zip(self.layer_input_sizes(), self.hidden_sizes):
            total += 2 * (d * 4 * h + h * 4 * h + 4 * h)
        total += 2 * self.hidden_sizes[-1] * self.n_classes + self.n_classes
        return total


def init_lstm_stack(spec: LstmStackSpec, rng: PortableRng, **model_fields) -> NetworkModel:
    """Fan-scaled uniform weights, forget-gate biases 1, other biases 0."""
    blocks = []
    for l, h in enumerate(spec.hidden_sizes):
        d = spec.layer_input_sizes()[l]
        for direction in ("fwd", "bwd"):
            blocks.append((f"lstm{l}.{direction}.Wx", (d, 4 * h)))
            blocks.append((f"lstm{l}.{direction}.Wh", (h, 4 * h)))
            blocks.append((f"lstm{l}.{direction}.b", (4 * h,)))
    blocks.append(("dense.W", (2 * spec.hidden_sizes[-1], spec.n_classes)))
    blocks.append(("dense.b", (spec.n_classes,)))
    layout, total = make_layout(blocks)
    model = NetworkModel(
        kind="bilstm", spec=spec, params=np.zeros(total), layout=layout, **model_fields
    )
    views = model.views()
    for l, h in enumerate(spec.hidden_sizes):
        d = spec.layer_input_sizes()[l]
        for direction in ("fwd", "bwd"):
            for name, rows in ((f"lstm{l}.{direction}.Wx", d), (f"lstm{l}.{direction}.Wh", h)):
                limit = np.sqrt(6.0 / (rows + h))
                views[name][:] = (rng.uniform(views[name].shape) * 2.0 - 1.0) * limit
            views[f"lstm{l}.{direction}.b"][h : 2 * h] = 1.0
    dense = views["dense.W"]
    limit = np.sqrt(6.0 / (dense.shape[0] + dense.shape[1]))
    dense[:] = (rng.uniform(dense.shape) * 2.0 - 1.0) * limit
    return model


def _cell_forward(x: np.ndarray, wx: np.ndarray, wh: np.ndarray, b: np.ndarray) -> dict:
    """Run one direction over (T, B, D) input; arrays stay in step order."""
    T, B, _ = x.shape
    h_units = wh.shape[0]
    gates = np.zeros((T, B, 4, h_units))
    cells = np.zeros((T, B, h_units))
    tanh_c = np.zeros((T, B, h_units))
    hidden = np.zeros((T, B, h_units))
    h = np.zeros((B, h_units))
    c = np.zeros((B, h_units))
    for t in range(T):
        z = x[t] @ wx + h @ wh + b
        i = sigmoid(z[:, :h_units])
        f = sigmoid(z[:, h_units : 2 * h_units])
        g = np.tanh(z[:, 2 * h_units : 3 * h_units])
        o = sigmoid(z[:, 3 * h_units :])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        gates[t, :, 0], gates[t, :, 1], gates[t, :, 2], gates[t, :, 3] = i, f, g, o
        cells[t] = c
        tanh_c[t] = tc
        hidden[t] = h
    return {"x": x, "gates": gates, "cells": cells, "tanh_c": tanh_c, "hidden": hidden}


def _cell_backward(
    cache: dict, d_hidden: np.ndarray, wx: np.ndarray, wh: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """BPTT for one direction; d_hidden is in the same step order as the cache."""
    x, gates, cells, tanh_c = cache["x"], cache["gates"], cache["cells"], cache["tanh_c"]
    T, B, h_units = tanh_c.shape
    d_wx = np.zeros_like(wx)
    d_wh = np.zeros_like(wh)
    d_b = np.zeros(4 * h_units)
    d_x = np.zeros_like(x)
    dh_carry = np.zeros((B, h_units))
    dc_carry = np.zeros((B, h_units))
    for t in range(T - 1, -1, -1):
        i, f, g, o = gates[t, :, 0], gates[t, :, 1], gates[t, :, 2], gates[t, :, 3]
        dh = d_hidden[t] + dh_carry
        dc = dh * o * (1.0 - tanh_c[t] ** 2) + dc_carry
        c_prev = cells[t - 1] if t > 0 else np.zeros((B, h_units))
        dz = np.concatenate(
            [
                dc * g * i * (1.0 - i),
                dc * c_prev * f * (1.0 - f),
                dc * i * (1.0 - g**2),
                dh * tanh_c[t] * o * (1.0 - o),
            ],
            axis=1,
        )
        dc_carry = dc * f
        h_prev = cache["hidden"][t - 1] if t > 0 else np.zeros((B, h_units))
        d_wx += x[t].T @ dz
        d_wh += h_prev.T @ dz
        d_b += dz.sum(axis=0)
        d_x[t] = dz @ wx.T
        dh_carry = dz @ wh.T
    return d_x, d_wx, d_wh, d_b


def _sample_masks(
    spec: LstmStackSpec, shape_tb: tuple[int, int], rng: PortableRng | None
) -> list[np.ndarray | None]:
    masks: list[np.ndarray | None] = []
    for l, p in enumerate(spec.dropouts):
        if p == 0.0:
            masks.append(None)
            continue
        if rng is None:
            raise ValueError("training-mode dropout needs an rng (or injected masks)")
        width = 2 * spec.hidden_sizes[l]
        keep = rng.uniform(shape_tb + (width,)) >= p
        masks.append(keep.astype(np.float64) / (1.0 - p))
    return masks


def _stack_forward(
    model: NetworkModel,
    x: np.ndarray,
    training: bool,
    rng: PortableRng | None,
    dropout_masks: list | None,
):
    spec: LstmStackSpec = model.spec
    views = model.views()
    T, B, _ = x.shape
    if dropout_masks is None:
        masks = _sample_masks(spec, (T, B), rng) if training else [None] * spec.n_layers
    else:
        masks = dropout_masks
    caches = []
    h = x
    for l in range(spec.n_layers):
        fwd = _cell_forward(
            h, views[f"lstm{l}.fwd.Wx"], views[f"lstm{l}.fwd.Wh"], views[f"lstm{l}.fwd.b"]
        )
        bwd = _cell_forward(
            h[::-1], views[f"lstm{l}.bwd.Wx"], views[f"lstm{l}.bwd.Wh"], views[f"lstm{l}.bwd.b"]
        )
        concat = np.concatenate([fwd["hidden"], bwd["hidden"][::-1]], axis=2)
        if spec.post_activations[l] == "leaky_relu":
            act = np.where(concat > 0, concat, spec.leaky_slope * concat)
        else:
            act = concat
        out = act * masks[l] if masks[l] is not None else act
        caches.append({"fwd": fwd, "bwd": bwd, "act": act, "mask": masks[l]})
        h = out
    z = h @ views["dense.W"] + views["dense.b"]
    probs = softmax(z)
    return probs, z, h, caches


def bilstm_forward(
    model: NetworkModel,
    x: np.ndarray,
    training: bool = False,
    rng: PortableRng | None = None,
    dropout_masks: list | None = None,
) -> np.ndarray:
    """Per-frame class probabilities for (T, D) or (T, B, D) input."""
    spec: LstmStackSpec = model.spec
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[:, None, :]
    if x.shape[2] != spec.input_size:
        raise ValueError(f"input width {x.shape[2]} != expected {spec.input_size}")
    probs, _, _, _ = _stack_forward(model, x, training, rng, dropout_masks)
    return probs[:, 0, :] if single else probs


def bilstm_loss_gradient(
    model: NetworkModel,
    x: np.ndarray,
    targets: np.ndarray,
    training: bool = True,
    rng: PortableRng | None = None,
    dropout_masks: list | None = None,
    clip_norm: float | None = None,
) -> tuple[float, np.ndarray]:
    """Mean per-frame cross-entropy and its full-BPTT gradient.

    targets holds class indices with shape (T,) or (T, B).  The gradient is
    optionally clipped to a global L2 norm bound.
    """
    spec: LstmStackSpec = model.spec
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, None, :]
    targets = np.asarray(targets, dtype=np.int64)
    if targets.ndim == 1:
        targets = targets[:, None]
    T, B, _ = x.shape
    if targets.shape != (T, B):
        raise ValueError(f"targets shape {targets.shape} != {(T, B)}")

    views = model.views()
    probs, z, top, caches = _stack_forward(model, x, training, rng, dropout_masks)

    logp = log_softmax(z)
    t_idx = np.arange(T)[:, None]
    b_idx = np.arange(B)[None, :]
    loss = float(-logp[t_idx, b_idx, targets].mean())
    if not np.isfinite(loss):
        raise FloatingPointError("non-finite loss in recurrent stack")

    grad = np.zeros_like(model.params)
    gviews = NetworkModel(
        kind=model.kind, spec=spec, params=grad, layout=model.layout
    ).views()

    delta = probs.copy()
    delta[t_idx, b_idx, targets] -= 1.0
    delta /= T * B

    wd = views["dense.W"]
    top_flat = top.reshape(T * B, -1)
    delta_flat = delta.reshape(T * B, -1)
    gviews["dense.W"][:] = top_flat.T @ delta_flat
    gviews["dense.b"][:] = delta_flat.sum(axis=0)
    d_out = (delta_flat @ wd.T).reshape(T, B, -1)

    for l in range(spec.n_layers - 1, -1, -1):
        cache = caches[l]
        if cache["mask"] is not None:
            d_out = d_out * cache["mask"]
        if spec.post_activations[l] == "leaky_relu":
            d_out = d_out * np.where(cache["act"] > 0, 1.0, spec.leaky_slope)
        h_units = spec.hidden_sizes[l]
        d_fwd = d_out[:, :, :h_units]
        d_bwd = d_out[:, :, h_units:]
        dx_f, dwx_f, dwh_f, db_f = _cell_backward(
            cache["fwd"], d_fwd, views[f"lstm{l}.fwd.Wx"], views[f"lstm{l}.fwd.Wh"]
        )
        dx_b, dwx_b, dwh_b, db_b = _cell_backward(
            cache["bwd"], d_bwd[::-1], views[f"lstm{l}.bwd.Wx"], views[f"lstm{l}.bwd.Wh"]
        )
        gviews[f"lstm{l}.fwd.Wx"][:] = dwx_f
        gviews[f"lstm{l}.fwd.Wh"][:] = dwh_f
        gviews[f"lstm{l}.fwd.b"][:] = db_f
        gviews[f"lstm{l}.bwd.Wx"][:] = dwx_b
        gviews[f"lstm{l}.bwd.Wh"][:] = dwh_b
        gviews[f"lstm{l}.bwd.b"][:] = db_b
        d_out = dx_f + dx_b[::-1]

    if clip_norm is not None:
        grad = clip_global_norm(grad, clip_norm)
    return loss, grad


def clip_global_norm(grad: np.ndarray, bound: float) -> np.ndarray:
    norm = float(np.linalg.norm(grad))
    if norm > bound:
        return grad * (bound / norm)
    return grad
