"""Sliding-window gesture classification over activity periods.

A dynamic pose concatenates three pose descriptors sampled ``s`` frames
apart, so one window spans ``2s + 1`` frames.  Windows slide across each
activity period; periods too short to yield the minimum window count are
first stretched with natural cubic splines.  Short periods are labeled as
a whole by majority vote, long periods frame-by-frame wherever enough
consecutive windows agree.  The multi-scale variant fuses the softmax
scores of three window scales anchored on shared center frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .descriptor import DESCRIPTOR_DIM
from .nn import MlpSpec, NetworkModel, init_mlp, mlp_forward, mlp_objective, scg_minimize
from .rng import PortableRng
from .segmenter import ActivityPeriod
from .skeleton import GestureAnnotation, N_GESTURE_CLASSES

DYNAMIC_POSE_DIM = 3 * DESCRIPTOR_DIM


@dataclass(frozen=True)
class WindowConfig:
    scale_step: int = 4
    slide_step: int = 2
    min_windows: int = 5
    short_period_max: int = 54
    threshold_short: float = 0.8717
    threshold_long: float = 0.6255
    consec_required: int = 3
    scale_steps: tuple[int, ...] = (4, 3, 2)
    fusion_weights: tuple[float, ...] = (0.4895, 0.4576, 0.0529)
    hidden_sizes: tuple[int, int] = (300, 100)
    max_iterations: int = 300

    def __post_init__(self):
        if self.scale_step < 1 or any(s < 1 for s in self.scale_steps):
            raise ValueError("scale steps must be >= 1")
        if self.slide_step < 1 or self.min_windows < 1 or self.consec_required < 1:
            raise ValueError("window counts must be >= 1")
        for t in (self.threshold_short, self.threshold_long):
            if not 0.0 < t < 1.0:
                raise ValueError("thresholds must lie in (0, 1)")
        if len(self.fusion_weights) != len(self.scale_steps):
            raise ValueError("one fusion weight per scale step required")
        if any(w < 0 for w in self.fusion_weights):
            raise ValueError("fusion weights must be non-negative")


def method_b_config(**overrides) -> WindowConfig:
    """Multi-scale defaults: fusion thresholds replace the single-scale ones."""
    values = dict(threshold_short=0.6014, threshold_long=0.6033)
    values.update(overrides)
    return WindowConfig(**values)


@dataclass(frozen=True)
class DynamicPose:
    """One window: concatenated descriptor triple plus its frame bookkeeping."""

    features: np.ndarray
    center_frame: int
    start_frame: int
    end_frame: int


def window_count(length: int, span: int, slide_step: int) -> int:
    if length < span:
        return 0
    return (length - span) // slide_step + 1


def cubic_resize(block: np.ndarray, target_len: int) -> np.ndarray:
    """Resample every column to ``target_len`` uniform positions over
    [0, n-1] with a natural cubic spline through the n samples."""
    y = np.asarray(block, dtype=np.float64)
    single = y.ndim == 1
    if single:
        y = y[:, None]
    n = y.shape[0]
    if n < 2:
        raise ValueError("cubic_resize needs at least 2 rows")
    if target_len < 2:
        raise ValueError("target length must be >= 2")

    # Natural spline second derivatives at the knots: tridiagonal solve
    # (uniform unit spacing, end conditions m[0] = m[-1] = 0).
    m = np.zeros_like(y)
    if n > 2:
        rhs = 6.0 * (y[2:] - 2.0 * y[1:-1] + y[:-2])
        k = n - 2
        diag = np.full(k, 4.0)
        cp = np.zeros(k)
        dp = np.zeros((k,) + y.shape[1:])
        cp[0] = 1.0 / diag[0]
        dp[0] = rhs[0] / diag[0]
        for i in range(1, k):
            denom = diag[i] - cp[i - 1]
            cp[i] = 1.0 / denom
            dp[i] = (rhs[i] - dp[i - 1]) / denom
        sol = np.zeros_like(dp)
        sol[-1] = dp[-1]
        for i in range(k - 2, -1, -1):
            sol[i] = dp[i] - cp[i] * sol[i + 1]
        m[1:-1] = sol

    xs = np.linspace(0.0, n - 1.0, target_len)
    idx = np.clip(xs.astype(np.int64), 0, n - 2)
    t = (xs - idx)[:, None]
    y0 = y[idx]
    y1 = y[idx + 1]
    m0 = m[idx]
    m1 = m[idx + 1]
    b = (y1 - y0) - (2.0 * m0 + m1) / 6.0
    out = y0 + b * t + 0.5 * m0 * t**2 + (m1 - m0) / 6.0 * t**3
    return out[:, 0] if single else out


def _map_back(x: float, resized_len: int, orig_len: int, orig_start: int) -> int:
    """Proportional index map from resized coordinates to original frames."""
    if resized_len <= 1:
        return orig_start
    return orig_start + int(round(x * (orig_len - 1) / (resized_len - 1)))


def extract_dynamic_poses_multi(
    descriptors: np.ndarray,
    period: ActivityPeriod,
    scale_steps: Sequence[int],
    config: WindowConfig,
) -> list[list[DynamicPose]]:
    """Aligned dynamic poses for several scales, one list per scale.

    Window positions come from the largest scale (span ``2*max(s) + 1``);
    all scales sample symmetrically around the same center frames, so the
    i-th pose of every scale shares its center.  If fewer than
    ``min_windows`` windows fit, the period's descriptor block is
    cubic-resized to ``span + (min_windows - 1) * slide_step`` frames first;
    recorded frame positions are mapped back proportionally.
    """
    if period.end >= descriptors.shape[0]:
        raise ValueError("period exceeds the descriptor block")
    block = descriptors[period.start : period.end + 1]
    n = block.shape[0]
    s_max = max(scale_steps)
    span = 2 * s_max + 1

    if window_count(n, span, config.slide_step) < config.min_windows:
        target = span + (config.min_windows - 1) * config.slide_step
        work = cubic_resize(block, target) if n >= 2 else np.tile(block, (target, 1))
    else:
        work = block
    m = work.shape[0]

    out: list[list[DynamicPose]] = [[] for _ in scale_steps]
    for start in range(0, m - span + 1, config.slide_step):
        center = start + s_max
        frames = (
            _map_back(start, m, n, period.start),
            _map_back(center, m, n, period.start),
            _map_back(start + span - 1, m, n, period.start),
        )
        for si, s in enumerate(scale_steps):
            features = np.concatenate([work[center - s], work[center], work[center + s]])
            out[si].append(
                DynamicPose(features, frames[1], frames[0], frames[2])
            )
    return out


def extract_dynamic_poses(
    descriptors: np.ndarray,
    period: ActivityPeriod,
    scale_step: int,
    config: WindowConfig,
) -> list[DynamicPose]:
    return extract_dynamic_poses_multi(descriptors, period, [scale_step], config)[0]


def train_window_classifier(
    descriptor_seqs: Sequence[np.ndarray],
    annotation_seqs: Sequence[Sequence[GestureAnnotation]],
    scale_step: int,
    config: WindowConfig,
    rng: PortableRng,
    **model_fields,
) -> tuple[NetworkModel, list[float]]:
    """Fit the dynamic-pose classifier on ground-truth gesture intervals."""
    feats = []
    targets = []
    for desc, annotations in zip(descriptor_seqs, annotation_seqs):
        for ann in annotations:
            period = ActivityPeriod(ann.start_frame, ann.end_frame)
            for pose in extract_dynamic_poses(desc, period, scale_step, config):
                feats.append(pose.features)
                targets.append(ann.class_id - 1)
    if not feats:
        raise ValueError("no training windows: dataset has no annotations")
    x = np.vstack(feats)
    y = np.asarray(targets, dtype=np.int64)

    h1, h2 = config.hidden_sizes
    spec = MlpSpec(
        sizes=(DYNAMIC_POSE_DIM, h1, h2, N_GESTURE_CLASSES),
        activations=("tanh", "tanh", "softmax"),
        loss="cce",
    )
    model = init_mlp(spec, rng, **model_fields)
    result = scg_minimize(
        mlp_objective(model, x, y), model.params, max_iterations=config.max_iterations
    )
    return model.with_params(result.w), result.trace


def _decide(
    scores: np.ndarray,
    poses: list[DynamicPose],
    period: ActivityPeriod,
    config: WindowConfig,
) -> list[tuple[int, ActivityPeriod]]:
    """Shared decision rules on per-window class scores.

    Short periods get a single label when the modal recorded class holds a
    strict majority of the confident votes; long periods label the frames
    covered by every run of at least ``consec_required`` consecutive
    confident windows that agree.  Later runs never overwrite frames an
    earlier run already labeled.
    """
    n_frames = len(period)
    if n_frames <= config.short_period_max:
        votes = [
            int(np.argmax(row)) + 1
            for row in scores
            if float(np.max(row)) > config.threshold_short
        ]
        if not votes:
            return []
        counts = np.bincount(votes)
        winner = int(np.argmax(counts))
        if 2 * counts[winner] > len(votes):
            return [(winner, period)]
        return []

    recorded = np.array(
        [
            int(np.argmax(row)) + 1 if float(np.max(row)) > config.threshold_long else 0
            for row in scores
        ],
        dtype=np.int64,
    )
    labels = np.zeros(n_frames, dtype=np.int64)
    run_start = 0
    for i in range(1, len(recorded) + 1):
        if i == len(recorded) or recorded[i] != recorded[run_start]:
            cls = recorded[run_start]
            if cls != 0 and i - run_start >= config.consec_required:
                lo = poses[run_start].start_frame - period.start
                hi = poses[i - 1].end_frame - period.start
                window = slice(max(0, lo), min(n_frames, hi + 1))
                seg = labels[window]
                seg[seg == 0] = cls
            run_start = i

    out = []
    start = None
    for i in range(n_frames + 1):
        v = labels[i] if i < n_frames else 0
        if start is None and v != 0:
            start = i
        elif start is not None and (i == n_frames or v != labels[start]):
            out.append(
                (int(labels[start]), ActivityPeriod(period.start + start, period.start + i - 1))
            )
            start = i if i < n_frames and v != 0 else None
    return out


def classify_period_method_a(
    model: NetworkModel,
    descriptors: np.ndarray,
    period: ActivityPeriod,
    config: WindowConfig,
) -> list[tuple[int, ActivityPeriod]]:
    poses = extract_dynamic_poses(descriptors, period, config.scale_step, config)
    scores = mlp_forward(model, np.vstack([p.features for p in poses]))
    return _decide(scores, poses, period, config)


def classify_period_method_b(
    models: Sequence[NetworkModel],
    descriptors: np.ndarray,
    period: ActivityPeriod,
    config: WindowConfig,
) -> list[tuple[int, ActivityPeriod]]:
    """Fuse per-scale softmax scores with the configured weights, then apply
    the shared decision rules.  Weights are used as given (no renormalization)."""
    if len(models) != len(config.scale_steps):
        raise ValueError("one model per scale step required")
    per_scale = extract_dynamic_poses_multi(descriptors, period, config.scale_steps, config)
    fused = None
    for weight, model, poses in zip(config.fusion_weights, models, per_scale):
        scores = mlp_forward(model, np.vstack([p.features for p in poses]))
        fused = weight * scores if fused is None else fused + weight * scores
    anchor = per_scale[0]
    return _decide(fused, anchor, period, config)
