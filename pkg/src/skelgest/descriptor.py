"""Per-frame pose descriptor: 183 features from one skeleton frame.

Layout (fixed, see the slice constants):

    [0..32]    root-relative, bone-normalized, smoothed joint positions
    [33..65]   velocities (first differences of smoothed positions)
    [66..98]   accelerations (second differences)
    [99..107]  inclination angles of 9 joint triples, radians in [0, pi]
    [108..116] azimuth angles of the same triples, radians in (-pi, pi]
    [117..127] bending angles of the 11 joints against the torso normal
    [128..182] 55 pairwise joint distances

The pipeline removes translation by subtracting the root, removes body
proportions by re-scaling every kinematic-tree bone to a reference
length, smooths each coordinate with a 5-tap Gaussian (sigma 1), and
takes central differences for the derivative blocks.  Components are
optionally standardized to zero mean and unit variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .skeleton import (
    ALL_EDGES,
    BONES,
    CANONICAL_BONE_DIRECTIONS,
    JointId,
    N_JOINTS,
    SkeletonSequence,
)

DESCRIPTOR_DIM = 183

POSITION_SLICE = slice(0, 33)
VELOCITY_SLICE = slice(33, 66)
ACCELERATION_SLICE = slice(66, 99)
INCLINATION_SLICE = slice(99, 108)
AZIMUTH_SLICE = slice(108, 117)
BENDING_SLICE = slice(117, 128)
DISTANCE_SLICE = slice(128, 183)

# Angle triples (a, b, c): the angle lives at the middle joint b between
# bones b->a and b->c.  The last two triples use the virtual hand-hip edges.
ANGLE_TRIPLES: tuple[tuple[JointId, JointId, JointId], ...] = (
    (JointId.SHOULDER_CENTER, JointId.SHOULDER_LEFT, JointId.ELBOW_LEFT),
    (JointId.SHOULDER_CENTER, JointId.SHOULDER_RIGHT, JointId.ELBOW_RIGHT),
    (JointId.SHOULDER_LEFT, JointId.ELBOW_LEFT, JointId.WRIST_LEFT),
    (JointId.SHOULDER_RIGHT, JointId.ELBOW_RIGHT, JointId.WRIST_RIGHT),
    (JointId.ELBOW_LEFT, JointId.WRIST_LEFT, JointId.HAND_LEFT),
    (JointId.ELBOW_RIGHT, JointId.WRIST_RIGHT, JointId.HAND_RIGHT),
    (JointId.HEAD, JointId.SHOULDER_CENTER, JointId.HIP_CENTER),
    (JointId.WRIST_LEFT, JointId.HAND_LEFT, JointId.HIP_CENTER),
    (JointId.WRIST_RIGHT, JointId.HAND_RIGHT, JointId.HIP_CENTER),
)

PAIR_INDICES: tuple[tuple[int, int], ...] = tuple(
    (i, j) for i in range(N_JOINTS) for j in range(i + 1, N_JOINTS)
)

_KERNEL_OFFSETS = np.arange(-2, 3, dtype=np.float64)
GAUSS_KERNEL = np.exp(-0.5 * _KERNEL_OFFSETS**2)
GAUSS_KERNEL /= GAUSS_KERNEL.sum()

_EPS = 1e-12
_CANONICAL_FRAME = (
    np.array([0.0, 1.0, 0.0]),   # torso up
    np.array([1.0, 0.0, 0.0]),   # lateral (left minus right)
    np.array([0.0, 0.0, -1.0]),  # torso normal = up x lateral
)


def reference_bone_lengths(sequences: Iterable[SkeletonSequence]) -> np.ndarray:
    """Mean length of each of the 12 edges over all frames of all sequences."""
    totals = np.zeros(len(ALL_EDGES))
    count = 0
    for seq in sequences:
        f = seq.frames
        for e, (a, b) in enumerate(ALL_EDGES):
            totals[e] += np.linalg.norm(f[:, b] - f[:, a], axis=1).sum()
        count += len(seq)
    if count == 0:
        raise ValueError("no frames to measure bone lengths from")
    return totals / count


def normalize_skeleton(frames: np.ndarray, ref_lengths: np.ndarray) -> np.ndarray:
    """Root-relative poses with every tree bone re-scaled to its reference length.

    ref_lengths holds the 12 edge lengths in ALL_EDGES order; only the first
    10 (the kinematic tree) are applied.  A zero-length bone keeps the
    previous frame's direction, or the canonical rest direction in frame 0.
    """
    frames = np.asarray(frames, dtype=np.float64)
    ref_lengths = np.asarray(ref_lengths, dtype=np.float64)
    if ref_lengths.shape != (len(ALL_EDGES),):
        raise ValueError(f"expected {len(ALL_EDGES)} reference lengths")
    if np.any(ref_lengths[: len(BONES)] <= 0):
        raise ValueError("reference bone lengths must be positive")

    rel = frames - frames[:, JointId.HIP_CENTER : JointId.HIP_CENTER + 1, :]
    out = np.zeros_like(rel)
    for e, (parent, child) in enumerate(BONES):
        vec = rel[:, child] - rel[:, parent]
        norm = np.linalg.norm(vec, axis=1)
        degenerate = norm < _EPS
        safe = np.where(degenerate, 1.0, norm)
        dirs = vec / safe[:, None]
        if degenerate.any():
            canonical = np.asarray(CANONICAL_BONE_DIRECTIONS[(parent, child)])
            for t in np.flatnonzero(degenerate):
                dirs[t] = dirs[t - 1] if t > 0 else canonical
        out[:, child] = out[:, parent] + dirs * ref_lengths[e]
    return out


def gaussian_smooth(series: np.ndarray) -> np.ndarray:
    """Smooth along axis 0 with the normalized 5-tap Gaussian, sigma 1.

    Boundaries replicate the edge value.  Works on (n,) or (n, k) input.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.shape[0] < 1:
        raise ValueError("series must have at least one element")
    pad = [(2, 2)] + [(0, 0)] * (series.ndim - 1)
    padded = np.pad(series, pad, mode="edge")
    n = series.shape[0]
    out = np.zeros_like(series)
    for k in range(5):
        out += GAUSS_KERNEL[k] * padded[k : k + n]
    return out


def derivatives(positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference velocity and acceleration per frame.

    Interior: v_t = (p_{t+1} - p_{t-1})/2 and a_t = p_{t+1} - 2 p_t + p_{t-1};
    the two boundary frames use one-sided differences.  Sequences shorter
    than 3 frames fall back to one-sided velocities and zero acceleration.
    """
    p = np.asarray(positions, dtype=np.float64)
    n = p.shape[0]
    vel = np.zeros_like(p)
    acc = np.zeros_like(p)
    if n == 1:
        return vel, acc
    if n == 2:
        vel[0] = vel[1] = p[1] - p[0]
        return vel, acc
    vel[1:-1] = (p[2:] - p[:-2]) / 2.0
    vel[0] = p[1] - p[0]
    vel[-1] = p[-1] - p[-2]
    acc[1:-1] = p[2:] - 2.0 * p[1:-1] + p[:-2]
    acc[0] = acc[1]
    acc[-1] = acc[-2]
    return vel, acc


def body_frames(poses: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-frame torso coordinate system (up, lateral, normal).

    up points from the hip center to the shoulder center, lateral from the
    right to the left shoulder orthogonalized against up, and the torso
    normal is their cross product.  Degenerate frames reuse the previous
    frame's system (canonical in frame 0).
    """
    n = poses.shape[0]
    up = np.zeros((n, 3))
    lat = np.zeros((n, 3))
    nrm = np.zeros((n, 3))
    prev = _CANONICAL_FRAME
    for t in range(n):
        u = poses[t, JointId.SHOULDER_CENTER] - poses[t, JointId.HIP_CENTER]
        l_raw = poses[t, JointId.SHOULDER_LEFT] - poses[t, JointId.SHOULDER_RIGHT]
        nu = np.linalg.norm(u)
        if nu < _EPS:
            up[t], lat[t], nrm[t] = prev
        else:
            u = u / nu
            l = l_raw - np.dot(l_raw, u) * u
            nl = np.linalg.norm(l)
            if nl < _EPS:
                up[t], lat[t], nrm[t] = prev
            else:
                l = l / nl
                up[t], lat[t], nrm[t] = u, l, np.cross(u, l)
        prev = (up[t], lat[t], nrm[t])
    return up, lat, nrm


def _angle_between(v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    cross = np.linalg.norm(np.cross(v1, v2), axis=-1)
    dot = np.sum(v1 * v2, axis=-1)
    return np.arctan2(cross, dot)


def angles(poses: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inclination (n, 9), azimuth (n, 9) and bending (n, 11) angles.

    poses are root-relative normalized positions (n, 11, 3).
    """
    poses = np.asarray(poses, dtype=np.float64)
    n = poses.shape[0]
    up, _, nrm = body_frames(poses)

    incl = np.zeros((n, len(ANGLE_TRIPLES)))
    azim = np.zeros((n, len(ANGLE_TRIPLES)))
    for i, (a, b, c) in enumerate(ANGLE_TRIPLES):
        v1 = poses[:, a] - poses[:, b]
        v2 = poses[:, c] - poses[:, b]
        incl[:, i] = _angle_between(v1, v2)
        # project both bones onto the plane orthogonal to the torso up axis
        v1p = v1 - np.sum(v1 * up, axis=1, keepdims=True) * up
        v2p = v2 - np.sum(v2 * up, axis=1, keepdims=True) * up
        y = np.sum(up * np.cross(v1p, v2p), axis=1)
        x = np.sum(v1p * v2p, axis=1)
        az = np.arctan2(y, x)
        az[az == -np.pi] = np.pi
        # a bone (near-)parallel to the up axis projects to rounding noise
        # and its azimuth would be arbitrary; pin it to 0 by convention
        degenerate = (
            np.linalg.norm(v1p, axis=1) < 1e-9 * np.linalg.norm(v1, axis=1)
        ) | (np.linalg.norm(v2p, axis=1) < 1e-9 * np.linalg.norm(v2, axis=1))
        az[degenerate] = 0.0
        azim[:, i] = az

    norms = np.linalg.norm(poses, axis=2)
    bend = _angle_between(nrm[:, None, :], poses)
    bend[norms < _EPS] = 0.0
    return incl, azim, bend


def pairwise_distances(poses: np.ndarray) -> np.ndarray:
    """Euclidean distances of all 55 unordered joint pairs, (i, j) i < j."""
    poses = np.asarray(poses, dtype=np.float64)
    ii = np.array([p[0] for p in PAIR_INDICES])
    jj = np.array([p[1] for p in PAIR_INDICES])
    return np.linalg.norm(poses[:, ii] - poses[:, jj], axis=2)


@dataclass(frozen=True)
class Standardizer:
    """Component-wise affine map to zero mean, unit variance."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean and std must be 1-d arrays of equal length")
        if np.any(std <= 0):
            raise ValueError("std components must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std


def fit_standardizer(descriptors: np.ndarray) -> Standardizer:
    """Population mean/std per component; zero-variance components get std 1."""
    x = np.asarray(descriptors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 descriptor frames to fit")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std <= 1e-12 * np.maximum(1.0, np.abs(mean)), 1.0, std)
    return Standardizer(mean, std)


def build_descriptors(
    seq: SkeletonSequence,
    ref_lengths: np.ndarray,
    standardizer: Standardizer | None = None,
) -> np.ndarray:
    """Full descriptor matrix (n_frames, 183) for one sequence."""
    normalized = normalize_skeleton(seq.frames, ref_lengths)
    n = normalized.shape[0]
    smoothed = gaussian_smooth(normalized.reshape(n, N_JOINTS * 3))
    smoothed3 = smoothed.reshape(n, N_JOINTS, 3)

    vel, acc = derivatives(smoothed)
    incl, azim, bend = angles(smoothed3)
    dist = pairwise_distances(smoothed3)

    out = np.hstack([smoothed, vel, acc, incl, azim, bend, dist])
    if out.shape[1] != DESCRIPTOR_DIM:
        raise AssertionError(f"descriptor width {out.shape[1]} != {DESCRIPTOR_DIM}")
    if standardizer is not None:
        out = standardizer.apply(out)
    if not np.all(np.isfinite(out)):
        raise ValueError("descriptor contains non-finite components")
    return out


# -- optional binary dump ----------------------------------------------------


def save_descriptors(path, descriptors: np.ndarray) -> None:
    """Write `GDESC 1 <n> 183` then row-major binary64 values."""
    d = np.ascontiguousarray(descriptors, dtype=np.float64)
    if d.ndim != 2 or d.shape[1] != DESCRIPTOR_DIM:
        raise ValueError(f"descriptors must be (n, {DESCRIPTOR_DIM})")
    with open(path, "wb") as fh:
        fh.write(f"GDESC 1 {d.shape[0]} {DESCRIPTOR_DIM}\n".encode("ascii"))
        fh.write(d.tobytes(order="C"))


def load_descriptors(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if len(header) != 4 or header[0] != "GDESC" or header[1] != "1":
            raise ValueError(f"{path}: not a GDESC file")
        n, width = int(header[2]), int(header[3])
        if width != DESCRIPTOR_DIM:
            raise ValueError(f"{path}: unexpected descriptor width {width}")
        data = np.frombuffer(fh.read(), dtype=np.float64)
    if data.size != n * width:
        raise ValueError(f"{path}: truncated descriptor payload")
    return data.reshape(n, width).copy()
