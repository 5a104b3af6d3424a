"""Skeleton-based gesture segmentation and classification.

A library and CLI covering the full pipeline: 183-feature pose
descriptors from 11-joint upper-body skeletons, a frame-wise activity
segmenter, multi-scale sliding-window gesture classifiers, a
bidirectional-LSTM sequence labeler, Jaccard-index evaluation, and a
synthetic dataset generator for desk-scale end-to-end runs.
"""

from .descriptor import (
    DESCRIPTOR_DIM,
    Standardizer,
    build_descriptors,
    fit_standardizer,
    reference_bone_lengths,
)
from .evaluation import ConfusionMatrix, JaccardReport, confusion, frame_accuracy, jaccard_binary, mean_jaccard
from .labeler import RnnConfig, TrainWindow, extract_train_windows, label_sequence, train_rnn
from .rng import PortableRng
from .segmenter import (
    ActivityPeriod,
    SegmenterConfig,
    build_binary_training_set,
    extract_periods,
    segment_sequence,
    train_segmenter,
)
from .skeleton import (
    GestureAnnotation,
    JointId,
    SkeletonSequence,
    annotations_from_labels,
    labels_from_annotations,
    load_sequence,
    save_sequence,
)
from .smoothing import loess_smooth
from .synthetic import SynthConfig, generate_synthetic
from .windows import (
    DynamicPose,
    WindowConfig,
    classify_period_method_a,
    classify_period_method_b,
    cubic_resize,
    extract_dynamic_poses,
    method_b_config,
    train_window_classifier,
)

__version__ = "0.1.0"
