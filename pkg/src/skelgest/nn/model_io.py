"""Network container and the versioned GMODEL file format.

A model file is the ASCII line ``GMODEL 1``, one JSON metadata line
(kind, spec, parameter layout, payload sizes), then little-endian
binary64 payloads: bone lengths, standardizer mean and std, and the flat
parameter vector.  Binary payloads round-trip bit-exactly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..descriptor import Standardizer

Layout = list[tuple[str, tuple[int, ...], int]]


@dataclass
class NetworkModel:
    """Architecture spec plus one flat parameter vector.

    ``layout`` names each parameter block with its shape and offset into
    ``params``; ``views()`` exposes the blocks as reshaped slices of the
    same buffer, so writes through a view update the model.
    """

    kind: str
    spec: Any
    params: np.ndarray
    layout: Layout
    standardizer: Standardizer | None = None
    bone_lengths: np.ndarray | None = None
    version: int = 1

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64).ravel()
        expected = sum(int(np.prod(shape)) for _, shape, _ in self.layout)
        if expected != self.params.size:
            raise ValueError(
                f"layout describes {expected} parameters, vector has {self.params.size}"
            )

    @property
    def param_count(self) -> int:
        return self.params.size

    def views(self) -> dict[str, np.ndarray]:
        out = {}
        for name, shape, offset in self.layout:
            size = int(np.prod(shape))
            out[name] = self.params[offset : offset + size].reshape(shape)
        return out

    def with_params(self, params: np.ndarray) -> "NetworkModel":
        return dataclasses.replace(self, params=np.array(params, dtype=np.float64))


def make_layout(blocks: list[tuple[str, tuple[int, ...]]]) -> tuple[Layout, int]:
    layout: Layout = []
    offset = 0
    for name, shape in blocks:
        layout.append((name, tuple(shape), offset))
        offset += int(np.prod(shape))
    return layout, offset


def save_model(path, model: NetworkModel) -> None:
    meta = {
        "kind": model.kind,
        "spec": dataclasses.asdict(model.spec),
        "layout": [[name, list(shape), offset] for name, shape, offset in model.layout],
        "param_count": int(model.param_count),
        "standardizer_dim": 0 if model.standardizer is None else int(model.standardizer.mean.size),
        "bone_length_count": 0 if model.bone_lengths is None else int(model.bone_lengths.size),
        "version": model.version,
    }
    with open(path, "wb") as fh:
        fh.write(b"GMODEL 1\n")
        fh.write((json.dumps(meta, sort_keys=True) + "\n").encode("utf-8"))
        if model.bone_lengths is not None:
            fh.write(np.ascontiguousarray(model.bone_lengths, dtype="<f8").tobytes())
        if model.standardizer is not None:
            fh.write(np.ascontiguousarray(model.standardizer.mean, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(model.standardizer.std, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.params, dtype="<f8").tobytes())


def _spec_from_meta(kind: str, spec_dict: dict) -> Any:
    from .mlp import MlpSpec
    from .lstm import LstmStackSpec

    if kind == "mlp":
        return MlpSpec(
            sizes=tuple(spec_dict["sizes"]),
            activations=tuple(spec_dict["activations"]),
            loss=spec_dict["loss"],
        )
    if kind == "bilstm":
        return LstmStackSpec(
            input_size=spec_dict["input_size"],
            hidden_sizes=tuple(spec_dict["hidden_sizes"]),
            post_activations=tuple(spec_dict["post_activations"]),
            dropouts=tuple(spec_dict["dropouts"]),
            n_classes=spec_dict["n_classes"],
            leaky_slope=spec_dict["leaky_slope"],
        )
    raise ValueError(f"unknown model kind '{kind}'")


def load_model(path) -> NetworkModel:
    with open(path, "rb") as fh:
        magic = fh.readline()
        if magic.strip() != b"GMODEL 1":
            raise ValueError(f"{path}: not a GMODEL version 1 file")
        meta = json.loads(fh.readline().decode("utf-8"))
        payload = fh.read()

    n_bones = meta["bone_length_count"]
    std_dim = meta["standardizer_dim"]
    n_params = meta["param_count"]
    expected = 8 * (n_bones + 2 * std_dim + n_params)
    if len(payload) != expected:
        raise ValueError(f"{path}: payload is {len(payload)} bytes, expected {expected}")

    values = np.frombuffer(payload, dtype="<f8")
    pos = 0
    bone_lengths = None
    if n_bones:
        bone_lengths = values[pos : pos + n_bones].copy()
        pos += n_bones
    standardizer = None
    if std_dim:
        mean = values[pos : pos + std_dim].copy()
        pos += std_dim
        std = values[pos : pos + std_dim].copy()
        pos += std_dim
        standardizer = Standardizer(mean, std)
    params = values[pos:].copy()

    layout = [(name, tuple(shape), offset) for name, shape, offset in meta["layout"]]
    return NetworkModel(
        kind=meta["kind"],
        spec=_spec_from_meta(meta["kind"], meta["spec"]),
        params=params,
        layout=layout,
        standardizer=standardizer,
        bone_lengths=bone_lengths,
        version=meta["version"],
    )
