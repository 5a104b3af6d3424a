"""Synthetic labeled gesture sequences for desk-scale experiments.

Each gesture class is a deterministic parametric arm trajectory: a
class-specific sinusoidal displacement of one hand/wrist/elbow chain in a
class-specific plane, superposed on a fixed rest posture.  Gestures are
separated by rest gaps in which the skeleton is perfectly still, so at
zero noise the frame-to-frame displacement separates activity from rest
exactly.  All randomness comes from a PortableRng seeded per sequence,
which makes generation bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import PortableRng
from .skeleton import (
    GestureAnnotation,
    JointId,
    N_GESTURE_CLASSES,
    N_JOINTS,
    SkeletonSequence,
    labels_from_annotations,
)

# Rest posture in meters: upright torso, elbows flexed, hands forward.
# Deliberately generic: no arm segment pair is collinear and no bone except
# the spine runs parallel to the torso axis, keeping every azimuth angle far
# from its branch cut.
REST_POSE = np.array(
    [
        [0.00, 0.00, 0.00],   # HipCenter
        [0.00, 0.55, 0.02],   # ShoulderCenter
        [0.01, 0.72, 0.06],   # Head
        [0.19, 0.51, 0.01],   # ShoulderLeft
        [0.27, 0.28, 0.07],   # ElbowLeft
        [0.23, 0.09, 0.18],   # WristLeft
        [0.27, 0.03, 0.27],   # HandLeft
        [-0.19, 0.51, 0.01],  # ShoulderRight
        [-0.27, 0.28, 0.07],  # ElbowRight
        [-0.23, 0.09, 0.18],  # WristRight
        [-0.27, 0.03, 0.27],  # HandRight
    ],
    dtype=np.float64,
)

_LEFT_ARM = (JointId.ELBOW_LEFT, JointId.WRIST_LEFT, JointId.HAND_LEFT)
_RIGHT_ARM = (JointId.ELBOW_RIGHT, JointId.WRIST_RIGHT, JointId.HAND_RIGHT)
# Motion attenuates going up the chain: hand leads, elbow follows.
_CHAIN_GAINS = (0.45, 0.8, 1.0)
_PLANES = ((0, 1), (1, 2), (0, 2))


@dataclass(frozen=True)
class SynthConfig:
    n_classes: int = 5
    n_sequences: int = 24
    gestures_per_sequence: int = 6
    rest_gap_range: tuple[int, int] = (15, 30)
    gesture_len_range: tuple[int, int] = (25, 45)
    noise_sigma: float = 0.004
    seed: int = 42
    frame_rate: float = 20.0

    def __post_init__(self):
        if not 1 <= self.n_classes <= N_GESTURE_CLASSES:
            raise ValueError(f"n_classes must be in 1..{N_GESTURE_CLASSES}")
        for name in ("rest_gap_range", "gesture_len_range"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 1:
                raise ValueError(f"{name} must be a non-empty positive range")
        if self.gesture_len_range[0] < 2:
            raise ValueError("gestures need at least 2 frames")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.n_sequences < 1 or self.gestures_per_sequence < 1:
            raise ValueError("n_sequences and gestures_per_sequence must be >= 1")


def gesture_parameters(class_id: int) -> dict:
    """Closed-form trajectory parameters for a gesture class.

    Classes alternate arms and cycle through motion planes, amplitudes and
    frequencies so that any two classes differ in at least one of them.
    """
    k = class_id - 1
    chain = _RIGHT_ARM if class_id % 2 == 1 else _LEFT_ARM
    ax1, ax2 = _PLANES[(k // 2) % 3]
    amplitude = 0.18 + 0.05 * (k % 4)
    frequency = 1.0 + 0.5 * ((k // 4) % 3)
    phase = k * np.pi / 10.0
    return {
        "chain": chain,
        "axes": (ax1, ax2),
        "amplitude": amplitude,
        "frequency": frequency,
        "phase": phase,
    }


def gesture_offsets(class_id: int, length: int) -> np.ndarray:
    """Joint displacements (length, 11, 3) of one gesture instance.

    The envelope sqrt(sin(pi*(t+1)/(L+1))) rises fast and is strictly
    positive on every gesture frame, so even boundary frames move clearly
    away from the rest pose, while the quadrature (cos, sin) pair keeps
    consecutive frames distinct.
    """
    p = gesture_parameters(class_id)
    t = np.arange(length, dtype=np.float64)
    envelope = np.sqrt(np.sin(np.pi * (t + 1.0) / (length + 1.0)))
    angle = 2.0 * np.pi * p["frequency"] * t / max(length - 1, 1) + p["phase"]
    ax1, ax2 = p["axes"]
    planar = np.zeros((length, 3))
    planar[:, ax1] = np.cos(angle)
    planar[:, ax2] = np.sin(angle)
    motion = p["amplitude"] * envelope[:, None] * planar

    offsets = np.zeros((length, N_JOINTS, 3))
    for joint, gain in zip(p["chain"], _CHAIN_GAINS):
        offsets[:, joint, :] = gain * motion
    return offsets


def generate_sequence(
    config: SynthConfig, index: int, rng: PortableRng
) -> tuple[SkeletonSequence, np.ndarray, list[GestureAnnotation]]:
    """One labeled sequence: rest gap, then gesture/gap pairs."""
    gap_lo, gap_hi = config.rest_gap_range
    len_lo, len_hi = config.gesture_len_range

    classes = [1 + rng.integers(config.n_classes) for _ in range(config.gestures_per_sequence)]
    lengths = [len_lo + rng.integers(len_hi - len_lo + 1) for _ in range(config.gestures_per_sequence)]
    gaps = [gap_lo + rng.integers(gap_hi - gap_lo + 1) for _ in range(config.gestures_per_sequence + 1)]

    blocks: list[np.ndarray] = []
    annotations: list[GestureAnnotation] = []
    cursor = 0
    for g in range(config.gestures_per_sequence):
        blocks.append(np.tile(REST_POSE, (gaps[g], 1, 1)))
        cursor += gaps[g]
        length = lengths[g]
        blocks.append(REST_POSE[None, :, :] + gesture_offsets(classes[g], length))
        annotations.append(GestureAnnotation(classes[g], cursor, cursor + length - 1))
        cursor += length
    blocks.append(np.tile(REST_POSE, (gaps[-1], 1, 1)))
    cursor += gaps[-1]

    frames = np.concatenate(blocks, axis=0)
    if config.noise_sigma > 0:
        frames = frames + config.noise_sigma * rng.normal(frames.shape)

    labels = labels_from_annotations(annotations, cursor)
    seq = SkeletonSequence(frames, config.frame_rate, f"synth-{index:03d}")
    return seq, labels, annotations


def generate_synthetic(
    config: SynthConfig,
) -> list[tuple[SkeletonSequence, np.ndarray, list[GestureAnnotation]]]:
    """Generate the full dataset; same config (incl. seed) gives identical output."""
    root = PortableRng(config.seed)
    return [
        generate_sequence(config, i, root.spawn(i))
        for i in range(config.n_sequences)
    ]
