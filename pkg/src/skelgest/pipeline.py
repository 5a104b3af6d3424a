"""End-to-end driver: dataset generation, training, prediction, evaluation.

All commands are deterministic given the same configuration and seed:
every stochastic step draws from a PortableRng spawned with a fixed key,
and every artifact is written with round-trip-exact number formatting.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .descriptor import (
    DESCRIPTOR_DIM,
    Standardizer,
    build_descriptors,
    fit_standardizer,
    reference_bone_lengths,
    save_descriptors,
)
from .evaluation import confusion, frame_accuracy, mean_jaccard
from .labeler import RnnConfig, extract_train_windows, label_sequence, train_rnn
from .nn import NetworkModel, load_model, save_model
from .rng import PortableRng
from .segmenter import (
    ActivityPeriod,
    SegmenterConfig,
    binary_activity,
    build_binary_training_set,
    segment_sequence,
    train_segmenter,
)
from .skeleton import (
    GestureAnnotation,
    SkeletonSequence,
    annotations_from_labels,
    load_sequence,
    save_sequence,
)
from .synthetic import SynthConfig, generate_synthetic
from .windows import (
    WindowConfig,
    classify_period_method_a,
    classify_period_method_b,
    method_b_config,
    train_window_classifier,
)

METHODS = ("a", "b", "c")
SPLITS = ("train", "val", "test")

# rng spawn keys, one per stochastic pipeline step
_KEY_SPLIT = 101
_KEY_SEG_DATA = 201
_KEY_SEG_INIT = 202
_KEY_CLF_INIT = 300  # plus the scale step
_KEY_RNN = 401


class PipelineError(RuntimeError):
    """Command failure with a machine-parseable category."""

    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


@dataclass(frozen=True)
class PipelineConfig:
    data_dir: Path = Path("data")
    model_dir: Path = Path("models")
    report_dir: Path = Path("reports")
    seed: int = 42
    method: str = "c"
    split_ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    paper_scale: bool = False
    synth: SynthConfig = field(default_factory=SynthConfig)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    window_a: WindowConfig = field(default_factory=WindowConfig)
    window_b: WindowConfig = field(default_factory=method_b_config)
    # desk-scale profile; --paper-scale restores the full stack
    rnn: RnnConfig = field(
        default_factory=lambda: RnnConfig(hidden_sizes=(64, 64, 32), max_epochs=40)
    )


# config file sections mapped to their PipelineConfig attribute
_SECTION_FIELDS = {name: name for name in ("synth", "segmenter", "window_a", "window_b", "rnn")}


def _coerce(default, raw: str):
    text = raw.strip()
    if text.lower() == "none":
        return None
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        items = text.split()
        if default and isinstance(default[0], (int, np.integer)):
            return tuple(int(v) for v in items)
        return tuple(float(v) for v in items)
    if default is None:
        # optional numeric field currently unset
        return int(text) if text.lstrip("+-").isdigit() else float(text)
    return text


def _apply_section(instance, section: Mapping[str, str], name: str):
    names = {f.name: f for f in dataclasses.fields(instance)}
    updates = {}
    for key, raw in section.items():
        if key not in names:
            raise PipelineError("config", f"unknown key '{key}' in section [{name}]")
        try:
            updates[key] = _coerce(getattr(instance, key), raw)
        except ValueError as exc:
            raise PipelineError("config", f"[{name}] {key}: {exc}") from exc
    try:
        return dataclasses.replace(instance, **updates)
    except (TypeError, ValueError) as exc:
        raise PipelineError("config", f"[{name}]: {exc}") from exc


def load_config(
    path=None,
    method: str | None = None,
    seed: int | None = None,
    paper_scale: bool | None = None,
) -> PipelineConfig:
    """Defaults, overridden by an INI-style file, overridden by flags."""
    import configparser

    config = PipelineConfig()
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(str(path))
        if not read:
            raise PipelineError("io", f"cannot read config file {path}")
        for section in parser.sections():
            if section == "pipeline":
                items = dict(parser.items(section))
                updates: dict = {}
                for key in ("data_dir", "model_dir", "report_dir"):
                    if key in items:
                        updates[key] = Path(items.pop(key))
                if "seed" in items:
                    updates["seed"] = int(items.pop("seed"))
                if "method" in items:
                    updates["method"] = items.pop("method").strip().lower()
                if "split_ratios" in items:
                    updates["split_ratios"] = tuple(
                        float(v) for v in items.pop("split_ratios").split()
                    )
                if "paper_scale" in items:
                    updates["paper_scale"] = _coerce(False, items.pop("paper_scale"))
                if items:
                    raise PipelineError(
                        "config", f"unknown key '{next(iter(items))}' in section [pipeline]"
                    )
                config = dataclasses.replace(config, **updates)
            elif section in _SECTION_FIELDS:
                attr = _SECTION_FIELDS[section]
                sub = _apply_section(getattr(config, attr), dict(parser.items(section)), section)
                config = dataclasses.replace(config, **{attr: sub})
            else:
                raise PipelineError("config", f"unknown config section [{section}]")

    updates = {}
    if method is not None:
        updates["method"] = method.strip().lower()
    if seed is not None:
        updates["seed"] = seed
        updates["synth"] = dataclasses.replace(config.synth, seed=seed)
    if paper_scale is not None:
        updates["paper_scale"] = paper_scale
    config = dataclasses.replace(config, **updates)

    if config.paper_scale:
        config = dataclasses.replace(
            config,
            rnn=dataclasses.replace(
                config.rnn, hidden_sizes=(1024, 1024, 512), max_epochs=150
            ),
        )
    if config.method not in METHODS:
        raise PipelineError("usage", f"method must be one of {METHODS}")
    if len(config.split_ratios) != 3 or abs(sum(config.split_ratios) - 1.0) > 1e-9:
        raise PipelineError("config", "split_ratios must be three values summing to 1")
    return config


# -- dataset on disk ---------------------------------------------------------


def manifest_path(config: PipelineConfig) -> Path:
    return config.data_dir / "manifest.tsv"


def cmd_generate(config: PipelineConfig) -> list[Path]:
    """Write interchange files and the train/val/test manifest."""
    data = generate_synthetic(config.synth)
    config.data_dir.mkdir(parents=True, exist_ok=True)

    n = len(data)
    order = PortableRng(config.seed).spawn(_KEY_SPLIT).permutation(n)
    n_train = int(round(config.split_ratios[0] * n))
    n_val = int(round(config.split_ratios[1] * n))
    split_of = {}
    for rank, idx in enumerate(order):
        split_of[idx] = "train" if rank < n_train else "val" if rank < n_train + n_val else "test"

    written = []
    lines = []
    for i, (seq, labels, _) in enumerate(data):
        filename = f"{seq.sequence_id}.gskel"
        save_sequence(config.data_dir / filename, seq, labels)
        written.append(config.data_dir / filename)
        lines.append(f"{seq.sequence_id}\t{split_of[i]}\t{filename}")
    manifest_path(config).write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(manifest_path(config))
    return written


def load_manifest(config: PipelineConfig) -> dict[str, list[tuple[str, Path]]]:
    path = manifest_path(config)
    if not path.exists():
        raise PipelineError("io", f"manifest not found: {path} (run generate first)")
    out: dict[str, list[tuple[str, Path]]] = {s: [] for s in SPLITS}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[1] not in SPLITS:
            raise PipelineError("data", f"{path}:{lineno}: malformed manifest line")
        out[parts[1]].append((parts[0], config.data_dir / parts[2]))
    return out


def _load_split(
    config: PipelineConfig, split: str
) -> list[tuple[SkeletonSequence, np.ndarray]]:
    manifest = load_manifest(config)
    if split not in SPLITS:
        raise PipelineError("usage", f"split must be one of {SPLITS}")
    entries = manifest[split]
    if not entries:
        raise PipelineError("data", f"split '{split}' is empty")
    out = []
    for seq_id, path in entries:
        if not path.exists():
            raise PipelineError("io", f"missing data file {path}")
        seq, labels = load_sequence(path)
        if seq.sequence_id != seq_id:
            raise PipelineError(
                "data", f"{path}: sequence id '{seq.sequence_id}' != manifest '{seq_id}'"
            )
        out.append((seq, labels))
    return out


@dataclass
class _TrainData:
    descriptors: list[np.ndarray]
    labels: list[np.ndarray]
    annotations: list[list[GestureAnnotation]]
    standardizer: Standardizer
    bone_lengths: np.ndarray


def _prepare_train_data(config: PipelineConfig) -> _TrainData:
    pairs = _load_split(config, "train")
    sequences = [seq for seq, _ in pairs]
    bones = reference_bone_lengths(sequences)
    raw = [build_descriptors(seq, bones) for seq in sequences]
    standardizer = fit_standardizer(np.vstack(raw))
    descriptors = [standardizer.apply(d) for d in raw]
    labels = [lab for _, lab in pairs]
    annotations = [annotations_from_labels(lab) for lab in labels]
    return _TrainData(descriptors, labels, annotations, standardizer, bones)


# -- training ----------------------------------------------------------------


def _model_fields(data: _TrainData) -> dict:
    return {"standardizer": data.standardizer, "bone_lengths": data.bone_lengths}


def _append_trace(lines: list[str], name: str, trace: list[float]) -> None:
    for i, loss in enumerate(trace):
        lines.append(f"{name} {i} {loss!r}")


def cmd_train(config: PipelineConfig, method: str | None = None) -> list[Path]:
    method = (method or config.method).lower()
    if method not in METHODS:
        raise PipelineError("usage", f"method must be one of {METHODS}")
    data = _prepare_train_data(config)
    config.model_dir.mkdir(parents=True, exist_ok=True)
    root = PortableRng(config.seed)
    written: list[Path] = []
    trace_lines: list[str] = []

    if method in ("a", "b"):
        x, y = build_binary_training_set(
            data.descriptors, data.labels, config.segmenter, root.spawn(_KEY_SEG_DATA)
        )
        seg_model, seg_trace = train_segmenter(
            x, y, config.segmenter, root.spawn(_KEY_SEG_INIT), **_model_fields(data)
        )
        path = config.model_dir / "segmenter.gmodel"
        save_model(path, seg_model)
        written.append(path)
        _append_trace(trace_lines, "segmenter", seg_trace)

        wconfig = config.window_a if method == "a" else config.window_b
        scales = [wconfig.scale_step] if method == "a" else list(wconfig.scale_steps)
        for s in scales:
            clf, trace = train_window_classifier(
                data.descriptors,
                data.annotations,
                s,
                wconfig,
                root.spawn(_KEY_CLF_INIT + s),
                **_model_fields(data),
            )
            path = config.model_dir / (
                "classifier_a.gmodel" if method == "a" else f"classifier_b_s{s}.gmodel"
            )
            save_model(path, clf)
            written.append(path)
            _append_trace(trace_lines, f"classifier_s{s}", trace)
    else:
        windows = []
        for desc, labels in zip(data.descriptors, data.labels):
            windows.extend(extract_train_windows(desc, labels))
        model, trace = train_rnn(
            windows, config.rnn, root.spawn(_KEY_RNN), **_model_fields(data)
        )
        path = config.model_dir / "rnn.gmodel"
        save_model(path, model)
        written.append(path)
        _append_trace(trace_lines, "rnn", trace)

    trace_path = config.model_dir / f"losses_{method}.txt"
    trace_path.write_text("\n".join(trace_lines) + "\n", encoding="utf-8")
    written.append(trace_path)
    return written


# -- prediction ----------------------------------------------------------------


def _load_model_checked(config: PipelineConfig, name: str) -> NetworkModel:
    path = config.model_dir / name
    if not path.exists():
        raise PipelineError("model", f"missing model file {path} (run train first)")
    try:
        return load_model(path)
    except ValueError as exc:
        raise PipelineError("model", f"{path}: {exc}") from exc


def _describe(seq: SkeletonSequence, model: NetworkModel) -> np.ndarray:
    if model.bone_lengths is None or model.standardizer is None:
        raise PipelineError("model", "model lacks preprocessing state")
    desc = build_descriptors(seq, model.bone_lengths, model.standardizer)
    if desc.shape[1] != DESCRIPTOR_DIM:
        raise PipelineError("model", "descriptor width does not match the model input")
    return desc


def cmd_predict(
    config: PipelineConfig, method: str | None = None, split: str = "test"
) -> list[Path]:
    method = (method or config.method).lower()
    if method not in METHODS:
        raise PipelineError("usage", f"method must be one of {METHODS}")
    pairs = _load_split(config, split)
    config.report_dir.mkdir(parents=True, exist_ok=True)

    frame_lines = []
    interval_lines = []
    period_lines = []

    if method == "c":
        model = _load_model_checked(config, "rnn.gmodel")
        for seq, _ in pairs:
            desc = _describe(seq, model)
            pred = label_sequence(model, desc, config.rnn)
            frame_lines.append(seq.sequence_id + " " + " ".join(map(str, pred)))
            for ann in annotations_from_labels(pred):
                interval_lines.append(
                    f"{seq.sequence_id} {ann.class_id} {ann.start_frame} {ann.end_frame}"
                )
    else:
        seg_model = _load_model_checked(config, "segmenter.gmodel")
        wconfig = config.window_a if method == "a" else config.window_b
        if method == "a":
            classifiers = [_load_model_checked(config, "classifier_a.gmodel")]
        else:
            classifiers = [
                _load_model_checked(config, f"classifier_b_s{s}.gmodel")
                for s in wconfig.scale_steps
            ]
        for seq, _ in pairs:
            desc = _describe(seq, seg_model)
            periods, _ = segment_sequence(seg_model, desc, config.segmenter)
            pred = np.zeros(len(seq), dtype=np.int64)
            for period in periods:
                period_lines.append(f"{seq.sequence_id} {period.start} {period.end}")
                if method == "a":
                    results = classify_period_method_a(
                        classifiers[0], desc, period, wconfig
                    )
                else:
                    results = classify_period_method_b(classifiers, desc, period, wconfig)
                for cls, interval in results:
                    pred[interval.start : interval.end + 1] = cls
            frame_lines.append(seq.sequence_id + " " + " ".join(map(str, pred)))
            for ann in annotations_from_labels(pred):
                interval_lines.append(
                    f"{seq.sequence_id} {ann.class_id} {ann.start_frame} {ann.end_frame}"
                )

    written = []
    frames_path = config.report_dir / f"pred_frames_{method}_{split}.txt"
    frames_path.write_text("\n".join(frame_lines) + "\n", encoding="utf-8")
    written.append(frames_path)
    intervals_path = config.report_dir / f"pred_intervals_{method}_{split}.txt"
    intervals_path.write_text(
        ("\n".join(interval_lines) + "\n") if interval_lines else "", encoding="utf-8"
    )
    written.append(intervals_path)
    if method in ("a", "b"):
        periods_path = config.report_dir / f"periods_{method}_{split}.txt"
        periods_path.write_text(
            ("\n".join(period_lines) + "\n") if period_lines else "", encoding="utf-8"
        )
        written.append(periods_path)
    return written


def load_predicted_frames(path) -> dict[str, np.ndarray]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        try:
            out[parts[0]] = np.array([int(v) for v in parts[1:]], dtype=np.int64)
        except ValueError:
            raise PipelineError("data", f"{path}:{lineno}: malformed label") from None
    return out


def load_periods_file(path) -> dict[str, list[ActivityPeriod]]:
    out: dict[str, list[ActivityPeriod]] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        seq_id, start, end = line.split()
        out.setdefault(seq_id, []).append(ActivityPeriod(int(start), int(end)))
    return out


# -- evaluation ----------------------------------------------------------------


def _check_prediction_coverage(ground_truth, predictions) -> None:
    for seq_id in predictions:
        if seq_id not in ground_truth:
            raise PipelineError("data", f"unknown sequence id '{seq_id}' in predictions")
    for seq_id, labels in ground_truth.items():
        if seq_id not in predictions:
            raise PipelineError("data", f"no prediction for sequence '{seq_id}'")
        if predictions[seq_id].shape != labels.shape:
            raise PipelineError("data", f"prediction length mismatch for '{seq_id}'")


def _label_runs(labels: np.ndarray) -> str:
    return " ".join(
        f"{a.class_id}:{a.start_frame}-{a.end_frame}" for a in annotations_from_labels(labels)
    ) or "-"


def cmd_evaluate(
    config: PipelineConfig, method: str | None = None, split: str = "test"
) -> list[Path]:
    method = (method or config.method).lower()
    pairs = _load_split(config, split)
    ground_truth = {seq.sequence_id: labels for seq, labels in pairs}

    frames_path = config.report_dir / f"pred_frames_{method}_{split}.txt"
    if not frames_path.exists():
        raise PipelineError("io", f"missing predictions {frames_path} (run predict first)")
    predictions = load_predicted_frames(frames_path)
    _check_prediction_coverage(ground_truth, predictions)

    report = mean_jaccard(ground_truth, predictions)
    gt_all = np.concatenate([ground_truth[k] for k in sorted(ground_truth)])
    pred_all = np.concatenate([predictions[k] for k in sorted(ground_truth)])
    matrix = confusion(gt_all, pred_all)
    activity_accuracy = frame_accuracy((gt_all != 0).astype(int), (pred_all != 0).astype(int))

    seg_accuracy = None
    periods_path = config.report_dir / f"periods_{method}_{split}.txt"
    if periods_path.exists():
        period_map = load_periods_file(periods_path)
        seg_pred = np.concatenate(
            [
                binary_activity(period_map.get(k, []), ground_truth[k].shape[0])
                for k in sorted(ground_truth)
            ]
        )
        seg_accuracy = frame_accuracy((gt_all != 0).astype(int), seg_pred)

    config.report_dir.mkdir(parents=True, exist_ok=True)
    written = []

    kv_lines = [
        f"method={method}",
        f"split={split}",
        f"n_sequences={len(pairs)}",
        f"n_frames={gt_all.size}",
        f"jaccard_defined={int(report.defined)}",
        f"overall_jaccard={report.overall!r}" if report.defined else "overall_jaccard=nan",
        f"activity_accuracy={activity_accuracy!r}",
    ]
    if seg_accuracy is not None:
        kv_lines.append(f"segmentation_accuracy={seg_accuracy!r}")
    for cls, score in report.per_class().items():
        kv_lines.append(f"class_jaccard.{cls}={score!r}")
    kv_path = config.report_dir / f"report_{method}_{split}.kv"
    kv_path.write_text("\n".join(kv_lines) + "\n", encoding="utf-8")
    written.append(kv_path)

    human = [
        f"Evaluation of method {method.upper()} on split '{split}'",
        f"  sequences evaluated : {len(pairs)}",
        f"  frames evaluated    : {gt_all.size}",
        f"  overall Jaccard     : "
        + (f"{report.overall:.4f}" if report.defined else "undefined (no classes)"),
        f"  activity accuracy   : {activity_accuracy:.4f}",
    ]
    if seg_accuracy is not None:
        human.append(f"  segmentation accuracy: {seg_accuracy:.4f}")
    human.append("  per-class Jaccard   :")
    for cls, score in report.per_class().items():
        human.append(f"    class {cls:2d} : {score:.4f}")
    txt_path = config.report_dir / f"report_{method}_{split}.txt"
    txt_path.write_text("\n".join(human) + "\n", encoding="utf-8")
    written.append(txt_path)

    conf_path = config.report_dir / f"confusion_{method}_{split}.txt"
    conf_path.write_text(
        "\n".join(" ".join(str(v) for v in row) for row in matrix.counts) + "\n",
        encoding="utf-8",
    )
    written.append(conf_path)
    log_path = config.report_dir / f"confusion_log10_{method}_{split}.txt"
    log_path.write_text(
        "\n".join(" ".join(repr(float(v)) for v in row) for row in matrix.log10_grid())
        + "\n",
        encoding="utf-8",
    )
    written.append(log_path)

    timeline_lines = []
    for seq_id in sorted(ground_truth):
        timeline_lines.append(f"{seq_id} gt {_label_runs(ground_truth[seq_id])}")
        timeline_lines.append(f"{seq_id} pred {_label_runs(predictions[seq_id])}")
    tl_path = config.report_dir / f"timelines_{method}_{split}.txt"
    tl_path.write_text("\n".join(timeline_lines) + "\n", encoding="utf-8")
    written.append(tl_path)
    return written


# -- descriptor extraction -----------------------------------------------------


def cmd_extract(config: PipelineConfig, split: str = "train") -> list[Path]:
    """Dump standardized descriptors plus the preprocessing sidecar."""
    data = _prepare_train_data(config)
    pairs = _load_split(config, split)
    out_dir = config.data_dir / "descriptors"
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for seq, _ in pairs:
        desc = build_descriptors(seq, data.bone_lengths, data.standardizer)
        path = out_dir / f"{seq.sequence_id}.gdesc"
        save_descriptors(path, desc)
        written.append(path)

    sidecar = out_dir / "standardizer.gstd"
    with open(sidecar, "wb") as fh:
        fh.write(
            f"GSTD 1 {data.standardizer.mean.size} {data.bone_lengths.size}\n".encode("ascii")
        )
        fh.write(np.ascontiguousarray(data.standardizer.mean, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(data.standardizer.std, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(data.bone_lengths, dtype="<f8").tobytes())
    written.append(sidecar)
    return written


def cmd_report(
    config: PipelineConfig, method: str | None = None, split: str = "test"
) -> list[Path]:
    """Render figures for an evaluated run next to the text reports."""
    from . import reporting

    method = (method or config.method).lower()
    frames_path = config.report_dir / f"pred_frames_{method}_{split}.txt"
    if not frames_path.exists():
        raise PipelineError("io", f"missing predictions {frames_path} (run predict first)")
    kv_path = config.report_dir / f"report_{method}_{split}.kv"
    if not kv_path.exists():
        raise PipelineError("io", f"missing report {kv_path} (run evaluate first)")

    pairs = _load_split(config, split)
    ground_truth = {seq.sequence_id: labels for seq, labels in pairs}
    predictions = load_predicted_frames(frames_path)
    _check_prediction_coverage(ground_truth, predictions)
    matrix = confusion(
        np.concatenate([ground_truth[k] for k in sorted(ground_truth)]),
        np.concatenate([predictions[k] for k in sorted(ground_truth)]),
    )
    report = mean_jaccard(ground_truth, predictions)

    written = []
    out = config.report_dir / f"confusion_{method}_{split}.png"
    reporting.render_confusion(matrix, out)
    written.append(out)
    out = config.report_dir / f"timelines_{method}_{split}.png"
    reporting.render_timelines(ground_truth, predictions, out)
    written.append(out)
    out = config.report_dir / f"jaccard_{method}_{split}.png"
    reporting.render_jaccard_bars(report, out)
    written.append(out)
    return written
