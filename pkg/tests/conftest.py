import numpy as np
import pytest

from skelgest.descriptor import build_descriptors, fit_standardizer, reference_bone_lengths
from skelgest.skeleton import annotations_from_labels
from skelgest.synthetic import SynthConfig, generate_synthetic


@pytest.fixture(scope="session")
def synth_small():
    """12 labeled sequences, 5 classes; shared by the training-path tests."""
    return generate_synthetic(
        SynthConfig(n_classes=5, n_sequences=12, gestures_per_sequence=4, seed=42)
    )


@pytest.fixture(scope="session")
def prepared_small(synth_small):
    """Standardized descriptors for synth_small: 8 train + 4 held out."""
    train, held = synth_small[:8], synth_small[8:]
    bones = reference_bone_lengths([s for s, _, _ in train])
    raw = [build_descriptors(s, bones) for s, _, _ in train]
    standardizer = fit_standardizer(np.vstack(raw))
    return {
        "bones": bones,
        "standardizer": standardizer,
        "train_desc": [standardizer.apply(d) for d in raw],
        "train_labels": [l for _, l, _ in train],
        "train_annotations": [annotations_from_labels(l) for _, l, _ in train],
        "held_desc": [
            build_descriptors(s, bones, standardizer) for s, _, _ in held
        ],
        "held_labels": [l for _, l, _ in held],
    }
