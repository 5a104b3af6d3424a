"""Upper-body skeleton sequences, frame labels and the text interchange format.

A skeleton frame holds the 3-d world positions of 11 upper-body joints.
The joints form a kinematic tree rooted at the hip center; two virtual
hand-to-hip edges are added for angle computation only.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

N_JOINTS = 11
N_GESTURE_CLASSES = 20
N_LABEL_CLASSES = 21  # gesture classes plus rest


class JointId(IntEnum):
    """Stable joint codes used in files and array layouts."""

    HIP_CENTER = 0
    SHOULDER_CENTER = 1
    HEAD = 2
    SHOULDER_LEFT = 3
    ELBOW_LEFT = 4
    WRIST_LEFT = 5
    HAND_LEFT = 6
    SHOULDER_RIGHT = 7
    ELBOW_RIGHT = 8
    WRIST_RIGHT = 9
    HAND_RIGHT = 10


# Kinematic tree edges (parent, child) in topological order from the root.
BONES: tuple[tuple[JointId, JointId], ...] = (
    (JointId.HIP_CENTER, JointId.SHOULDER_CENTER),
    (JointId.SHOULDER_CENTER, JointId.HEAD),
    (JointId.SHOULDER_CENTER, JointId.SHOULDER_LEFT),
    (JointId.SHOULDER_CENTER, JointId.SHOULDER_RIGHT),
    (JointId.SHOULDER_LEFT, JointId.ELBOW_LEFT),
    (JointId.ELBOW_LEFT, JointId.WRIST_LEFT),
    (JointId.WRIST_LEFT, JointId.HAND_LEFT),
    (JointId.SHOULDER_RIGHT, JointId.ELBOW_RIGHT),
    (JointId.ELBOW_RIGHT, JointId.WRIST_RIGHT),
    (JointId.WRIST_RIGHT, JointId.HAND_RIGHT),
)

# Virtual edges connecting the hands back to the root; they take part in
# angle triples but are never re-scaled during normalization.
VIRTUAL_BONES: tuple[tuple[JointId, JointId], ...] = (
    (JointId.HAND_LEFT, JointId.HIP_CENTER),
    (JointId.HAND_RIGHT, JointId.HIP_CENTER),
)

ALL_EDGES = BONES + VIRTUAL_BONES

# Fallback bone directions for degenerate (zero-length) bones in frame 0:
# an upright rest stance, arms hanging down, left along +x.
CANONICAL_BONE_DIRECTIONS: dict[tuple[JointId, JointId], tuple[float, float, float]] = {
    (JointId.HIP_CENTER, JointId.SHOULDER_CENTER): (0.0, 1.0, 0.0),
    (JointId.SHOULDER_CENTER, JointId.HEAD): (0.0, 1.0, 0.0),
    (JointId.SHOULDER_CENTER, JointId.SHOULDER_LEFT): (1.0, 0.0, 0.0),
    (JointId.SHOULDER_CENTER, JointId.SHOULDER_RIGHT): (-1.0, 0.0, 0.0),
    (JointId.SHOULDER_LEFT, JointId.ELBOW_LEFT): (0.0, -1.0, 0.0),
    (JointId.ELBOW_LEFT, JointId.WRIST_LEFT): (0.0, -1.0, 0.0),
    (JointId.WRIST_LEFT, JointId.HAND_LEFT): (0.0, -1.0, 0.0),
    (JointId.SHOULDER_RIGHT, JointId.ELBOW_RIGHT): (0.0, -1.0, 0.0),
    (JointId.ELBOW_RIGHT, JointId.WRIST_RIGHT): (0.0, -1.0, 0.0),
    (JointId.WRIST_RIGHT, JointId.HAND_RIGHT): (0.0, -1.0, 0.0),
}


class InterchangeError(ValueError):
    """Malformed interchange file; message carries the offending line number."""


@dataclass(frozen=True)
class SkeletonSequence:
    """An ordered run of skeleton frames.

    frames has shape (n_frames, 11, 3) in meters; it is stored as a
    read-only float64 copy so sequences can be shared across threads.
    """

    frames: np.ndarray
    frame_rate: float = 20.0
    sequence_id: str = ""

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[1:] != (N_JOINTS, 3):
            raise ValueError(
                f"frames must have shape (n, {N_JOINTS}, 3), got {frames.shape}"
            )
        if frames.shape[0] < 1:
            raise ValueError("a sequence needs at least one frame")
        if not np.all(np.isfinite(frames)):
            raise ValueError("frames contain non-finite coordinates")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")
        frames = frames.copy()
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class GestureAnnotation:
    """One gesture instance: class_id over the inclusive frame interval."""

    class_id: int
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if not 1 <= self.class_id <= N_GESTURE_CLASSES:
            raise ValueError(f"class_id must be in 1..{N_GESTURE_CLASSES}")
        if self.start_frame > self.end_frame:
            raise ValueError("start_frame must be <= end_frame")
        if self.start_frame < 0:
            raise ValueError("start_frame must be >= 0")


def validate_labels(labels: np.ndarray, n_frames: int | None = None) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if n_frames is not None and labels.shape[0] != n_frames:
        raise ValueError(
            f"label count {labels.shape[0]} does not match frame count {n_frames}"
        )
    if labels.size and (labels.min() < 0 or labels.max() > N_GESTURE_CLASSES):
        raise ValueError(f"labels must lie in 0..{N_GESTURE_CLASSES}")
    return labels


def labels_from_annotations(
    annotations: Sequence[GestureAnnotation], length: int
) -> np.ndarray:
    """Per-frame labels: class_id inside each annotation, 0 elsewhere."""
    labels = np.zeros(length, dtype=np.int64)
    claimed = np.zeros(length, dtype=bool)
    for ann in annotations:
        if ann.end_frame >= length:
            raise ValueError(
                f"annotation {ann.class_id}@[{ann.start_frame},{ann.end_frame}] "
                f"exceeds sequence length {length}"
            )
        window = slice(ann.start_frame, ann.end_frame + 1)
        if claimed[window].any():
            raise ValueError(
                f"annotation {ann.class_id}@[{ann.start_frame},{ann.end_frame}] "
                "overlaps another annotation"
            )
        claimed[window] = True
        labels[window] = ann.class_id
    return labels


def annotations_from_labels(labels: np.ndarray) -> list[GestureAnnotation]:
    """Maximal constant nonzero runs as annotations (inverse of the above)."""
    labels = validate_labels(labels)
    out: list[GestureAnnotation] = []
    start = None
    current = 0
    for i, v in enumerate(labels):
        if v != current:
            if current != 0:
                out.append(GestureAnnotation(int(current), start, i - 1))
            start = i if v != 0 else None
            current = int(v)
    if current != 0:
        out.append(GestureAnnotation(int(current), start, len(labels) - 1))
    return out


# -- interchange format ----------------------------------------------------
#
# One sequence per UTF-8 text file:
#   GSKEL 1 <n_frames> <frame_rate> <sequence_id>
#   <33 floats: x y z per joint in JointId order>   (n_frames lines)
#   LABELS                                          (optional)
#   <n_frames integers, whitespace separated>
#
# Floats are written with repr(), the shortest representation that
# round-trips binary64 exactly.


def save_sequence(path, seq: SkeletonSequence, labels: np.ndarray | None = None) -> None:
    if labels is not None:
        labels = validate_labels(labels, len(seq))
    lines = [f"GSKEL 1 {len(seq)} {float(seq.frame_rate)!r} {seq.sequence_id}"]
    flat = seq.frames.reshape(len(seq), N_JOINTS * 3)
    for row in flat:
        lines.append(" ".join(repr(float(v)) for v in row))
    if labels is not None:
        lines.append("LABELS")
        lines.append(" ".join(str(int(v)) for v in labels))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_sequence(path) -> tuple[SkeletonSequence, np.ndarray]:
    """Read an interchange file; missing label block means all-rest labels."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise InterchangeError("line 1: empty file")
    header = lines[0].split()
    if len(header) < 4 or header[0] != "GSKEL" or header[1] != "1":
        raise InterchangeError("line 1: expected header 'GSKEL 1 <n> <rate> <id>'")
    try:
        n_frames = int(header[2])
        frame_rate = float(header[3])
    except ValueError as exc:
        raise InterchangeError(f"line 1: bad header field ({exc})") from exc
    sequence_id = header[4] if len(header) > 4 else ""
    if n_frames < 1:
        raise InterchangeError("line 1: frame count must be >= 1")
    if len(lines) < 1 + n_frames:
        raise InterchangeError(
            f"line {len(lines)}: file ends before frame {len(lines)} of {n_frames}"
        )

    frames = np.empty((n_frames, N_JOINTS * 3), dtype=np.float64)
    for i in range(n_frames):
        lineno = i + 2
        tokens = lines[1 + i].split()
        if len(tokens) != N_JOINTS * 3:
            raise InterchangeError(
                f"line {lineno}: wrong joint count "
                f"(expected {N_JOINTS * 3} values, got {len(tokens)})"
            )
        try:
            row = np.array([float(t) for t in tokens], dtype=np.float64)
        except ValueError:
            raise InterchangeError(f"line {lineno}: malformed coordinate") from None
        if not np.all(np.isfinite(row)):
            raise InterchangeError(f"line {lineno}: non-finite coordinate")
        frames[i] = row

    labels = np.zeros(n_frames, dtype=np.int64)
    rest = lines[1 + n_frames :]
    if rest:
        first = 2 + n_frames
        if rest[0].strip() != "LABELS":
            raise InterchangeError(f"line {first}: expected 'LABELS' or end of file")
        values: list[int] = []
        for off, line in enumerate(rest[1:]):
            lineno = first + 1 + off
            for tok in line.split():
                try:
                    v = int(tok)
                except ValueError:
                    raise InterchangeError(f"line {lineno}: malformed label") from None
                if not 0 <= v <= N_GESTURE_CLASSES:
                    raise InterchangeError(
                        f"line {lineno}: label {v} outside 0..{N_GESTURE_CLASSES}"
                    )
                values.append(v)
        if len(values) != n_frames:
            raise InterchangeError(
                f"line {len(lines)}: expected {n_frames} labels, got {len(values)}"
            )
        labels = np.array(values, dtype=np.int64)

    seq = SkeletonSequence(
        frames.reshape(n_frames, N_JOINTS, 3), frame_rate, sequence_id
    )
    return seq, labels


def load_dataset(paths: Iterable) -> list[tuple[SkeletonSequence, np.ndarray]]:
    return [load_sequence(p) for p in paths]
