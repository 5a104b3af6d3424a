"""Figure rendering for evaluated runs.

Matplotlib is imported lazily with the Agg backend so the rest of the
package stays importable on headless machines without display setup.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .evaluation import ConfusionMatrix, JaccardReport
from .skeleton import N_LABEL_CLASSES


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def render_confusion(matrix: ConfusionMatrix, path) -> None:
    """Log-scaled heatmap of the 21x21 frame confusion counts."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.5, 6.5))
    image = ax.imshow(matrix.log10_grid(), cmap="viridis", interpolation="nearest")
    ax.set_xlabel("predicted class (0 = rest)")
    ax.set_ylabel("true class (0 = rest)")
    ax.set_xticks(range(0, N_LABEL_CLASSES, 2))
    ax.set_yticks(range(0, N_LABEL_CLASSES, 2))
    ax.set_title("Frame confusion, log10(count + 1)")
    fig.colorbar(image, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_timelines(
    ground_truth: Mapping[str, np.ndarray],
    predictions: Mapping[str, np.ndarray],
    path,
    max_sequences: int = 8,
) -> None:
    """Ground-truth vs predicted label bands, one panel per sequence."""
    plt = _plt()
    ids = sorted(ground_truth)[:max_sequences]
    fig, axes = plt.subplots(
        len(ids), 1, figsize=(9, 1.1 * len(ids) + 0.8), squeeze=False, sharex=False
    )
    cmap = plt.get_cmap("tab20")

    for ax, seq_id in zip(axes[:, 0], ids):
        gt = np.asarray(ground_truth[seq_id])
        pred = np.asarray(predictions[seq_id])
        bands = np.vstack([gt, pred]).astype(float)
        masked = np.ma.masked_equal(bands, 0)
        ax.imshow(
            masked,
            aspect="auto",
            interpolation="nearest",
            cmap=cmap,
            vmin=1,
            vmax=N_LABEL_CLASSES - 1,
            extent=(0, len(gt), -0.5, 1.5),
        )
        ax.set_yticks([0, 1])
        ax.set_yticklabels(["pred", "gt"], fontsize=7)
        ax.set_ylabel(seq_id, rotation=0, ha="right", va="center", fontsize=7)
        ax.tick_params(labelsize=7)
    axes[-1, 0].set_xlabel("frame")
    fig.suptitle("Label timelines (colors = gesture classes)", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_jaccard_bars(report: JaccardReport, path) -> None:
    plt = _plt()
    per_class = report.per_class()
    fig, ax = plt.subplots(figsize=(7, 3.2))
    if per_class:
        classes = list(per_class)
        ax.bar([str(c) for c in classes], [per_class[c] for c in classes], color="#4878a8")
        if report.overall is not None:
            ax.axhline(report.overall, color="#a84040", linestyle="--", linewidth=1)
            ax.text(
                0.99,
                report.overall,
                f" mean {report.overall:.3f}",
                transform=ax.get_yaxis_transform(),
                ha="right",
                va="bottom",
                fontsize=8,
                color="#a84040",
            )
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("gesture class")
    ax.set_ylabel("Jaccard index")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
