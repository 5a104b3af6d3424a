"""Acceptance suite.

Each test covers one numbered criterion and prints one PASS/FAIL line
(visible with `pytest -s` or in captured output on failure).  Criteria 8
and 9 share one full desk-profile pipeline cycle per directory.
"""

import dataclasses
import hashlib
import time
from fractions import Fraction

import numpy as np
import pytest

from skelgest.descriptor import (
    DESCRIPTOR_DIM,
    GAUSS_KERNEL,
    build_descriptors,
    derivatives,
    reference_bone_lengths,
)
from skelgest.evaluation import jaccard_binary
from skelgest.labeler import RnnConfig, extract_train_windows, suppress_short_runs
from skelgest.nn import (
    LstmStackSpec,
    MlpSpec,
    bilstm_loss_gradient,
    init_lstm_stack,
    init_mlp,
    mlp_loss_gradient,
    mlp_objective,
    scg_minimize,
)
from skelgest.pipeline import (
    PipelineConfig,
    cmd_evaluate,
    cmd_generate,
    cmd_predict,
    cmd_train,
)
from skelgest.rng import PortableRng
from skelgest.segmenter import ActivityPeriod, SegmenterConfig, extract_periods
from skelgest.skeleton import SkeletonSequence
from skelgest.smoothing import loess_smooth
from skelgest.synthetic import SynthConfig, generate_synthetic
from skelgest.windows import (
    WindowConfig,
    extract_dynamic_poses,
    method_b_config,
    window_count,
)


def report(criterion: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status} ({detail})")
    assert ok, f"{criterion} failed: {detail}"


def _numerical_gradient(fun, w, step=1e-5):
    grad = np.zeros_like(w)
    for i in range(w.size):
        up = w.copy()
        up[i] += step
        down = w.copy()
        down[i] -= step
        grad[i] = (fun(up) - fun(down)) / (2.0 * step)
    return grad


def _rel_err(a, b):
    return np.linalg.norm(a - b) / (np.linalg.norm(a) + np.linalg.norm(b) + 1e-300)


# -- criterion 1: gradient oracle ---------------------------------------------


def test_criterion_1_gradient_oracle():
    start = time.time()
    worst_mlp = 0.0
    combos = [
        (act, loss)
        for act in ("relu", "leaky_relu", "tanh", "sigmoid")
        for loss in ("bce", "cce")
    ]
    for act, loss in combos:
        out_act = "sigmoid" if loss == "bce" else "softmax"
        width = 1 if loss == "bce" else 3
        spec = MlpSpec((5, 10, width), (act, out_act), loss)
        for seed in range(20):
            rng = PortableRng(10_000 + 97 * seed)
            model = init_mlp(spec, rng)
            x = rng.normal((4, 5))
            targets = (
                (rng.uniform((4, 1)) > 0.5).astype(float)
                if loss == "bce"
                else rng.integers(width, 4)
            )
            _, grad = mlp_loss_gradient(model, x, targets)
            fd = _numerical_gradient(
                lambda w: mlp_loss_gradient(model.with_params(w), x, targets)[0],
                model.params,
            )
            worst_mlp = max(worst_mlp, _rel_err(grad, fd))

    worst_bptt = 0.0
    specs = [
        (LstmStackSpec(3, (4,), ("identity",), (0.0,), n_classes=5), 6),
        (LstmStackSpec(3, (3, 2), ("leaky_relu", "identity"), (0.5, 0.0), n_classes=5), 5),
    ]
    for spec, seq_len in specs:
        for seed in range(20):
            rng = PortableRng(20_000 + 31 * seed)
            model = init_lstm_stack(spec, rng)
            x = rng.normal((seq_len, 3))
            y = rng.integers(5, seq_len)
            masks = None
            if any(p > 0 for p in spec.dropouts):
                masks = [
                    (rng.uniform((seq_len, 1, 2 * h)) >= p).astype(float) / (1 - p)
                    if p > 0
                    else None
                    for h, p in zip(spec.hidden_sizes, spec.dropouts)
                ]
            _, grad = bilstm_loss_gradient(
                model, x, y, training=masks is not None, dropout_masks=masks
            )
            fd = _numerical_gradient(
                lambda w: bilstm_loss_gradient(
                    model.with_params(w), x, y,
                    training=masks is not None, dropout_masks=masks,
                )[0],
                model.params,
            )
            worst_bptt = max(worst_bptt, _rel_err(grad, fd))

    elapsed = time.time() - start
    ok = worst_mlp < 1e-5 and worst_bptt < 1e-4 and elapsed < 60
    report(
        "criterion-1",
        ok,
        f"mlp rel err {worst_mlp:.2e} < 1e-5, bptt rel err {worst_bptt:.2e} < 1e-4, "
        f"{elapsed:.1f}s < 60s",
    )


# -- criterion 2: descriptor invariants ------------------------------------------


def test_criterion_2_descriptor_invariants():
    start = time.time()
    data = generate_synthetic(
        SynthConfig(n_classes=4, n_sequences=2, gestures_per_sequence=2, seed=5)
    )
    seqs = [d[0] for d in data]
    bones = reference_bone_lengths(seqs)
    base = build_descriptors(seqs[0], bones)

    shifted = SkeletonSequence(seqs[0].frames + np.array([3.0, -7.0, 2.0]), 20.0, "t")
    translation_err = np.max(np.abs(build_descriptors(shifted, bones) - base))

    scaled = SkeletonSequence(seqs[0].frames * 2.0, 20.0, "s")
    scale_err = np.max(np.abs(build_descriptors(scaled, bones) - base))

    kernel_err = abs(GAUSS_KERNEL.sum() - 1.0)

    t = np.arange(30.0)
    _, acc = derivatives(t**2)
    quad_err = np.max(np.abs(acc[1:-1] - 2.0))

    elapsed = time.time() - start
    ok = (
        translation_err < 1e-9
        and scale_err < 1e-6
        and base.shape[1] == DESCRIPTOR_DIM == 183
        and kernel_err < 1e-12
        and quad_err < 1e-12
        and elapsed < 10
    )
    report(
        "criterion-2",
        ok,
        f"translation {translation_err:.1e} < 1e-9, scale {scale_err:.1e} < 1e-6, "
        f"width {base.shape[1]}, kernel sum err {kernel_err:.1e}, "
        f"quadratic acc err {quad_err:.1e}, {elapsed:.1f}s < 10s",
    )


# -- criterion 3: SCG ---------------------------------------------------------------


def test_criterion_3_scg():
    worst_gnorm = 0.0
    for seed in range(10):
        rng = PortableRng(seed)
        for dim in (2, 3, 5, 8, 13, 21, 30):
            eigs = np.exp(np.log(12.0) * rng.uniform(dim))
            basis, _ = np.linalg.qr(rng.normal((dim, dim)))
            a = basis @ np.diag(eigs) @ basis.T
            b = rng.normal(dim)

            def quad(w, a=a, b=b):
                return float(0.5 * w @ a @ w - b @ w), a @ w - b

            result = scg_minimize(
                quad, np.zeros(dim), max_iterations=dim + 5, grad_tol=1e-8
            )
            worst_gnorm = max(worst_gnorm, float(np.linalg.norm(a @ result.w - b)))

    x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([[0.0], [1.0], [1.0], [0.0]])
    model = init_mlp(MlpSpec((2, 4, 1), ("sigmoid", "sigmoid"), "bce"), PortableRng(7))
    xor = scg_minimize(mlp_objective(model, x, y), model.params, max_iterations=500)

    ok = worst_gnorm < 1e-8 and xor.trace[-1] < 0.01
    report(
        "criterion-3",
        ok,
        f"quadratics worst gnorm {worst_gnorm:.2e} < 1e-8 within dim+5 iters, "
        f"XOR seed-7 loss {xor.trace[-1]:.2e} < 0.01 in {xor.iterations} iters",
    )


# -- criterion 4: segmentation rules ---------------------------------------------------


def test_criterion_4_segmentation_rules():
    config = SegmenterConfig()

    scores = np.full(30, 0.4)
    strict_ok = extract_periods(scores, dataclasses.replace(config, min_period=1)) == []

    short = np.full(40, 0.1)
    short[10:21] = 0.9  # 11 frames: below the 12-frame minimum
    min_ok = extract_periods(short, config) == []
    short[10:22] = 0.9  # 12 frames: kept
    min_ok &= extract_periods(short, config) == [ActivityPeriod(10, 21)]

    rng = PortableRng(321)
    mono_ok = True
    for _ in range(50):
        scores = rng.uniform(60)
        low = extract_periods(scores, dataclasses.replace(config, threshold=0.3, min_period=3))
        high = extract_periods(scores, dataclasses.replace(config, threshold=0.5, min_period=3))
        frames_low = {f for p in low for f in range(p.start, p.end + 1)}
        frames_high = {f for p in high for f in range(p.start, p.end + 1)}
        raw_low = {i for i, s in enumerate(scores) if s > 0.3}
        raw_high = {i for i, s in enumerate(scores) if s > 0.5}
        mono_ok &= raw_high <= raw_low and frames_high <= raw_high and frames_low <= raw_low

    x = np.arange(80.0)
    quad = 0.02 * x**2 - 0.9 * x + 4.0
    loess_err = np.max(np.abs(loess_smooth(quad, 11) - quad))

    ok = strict_ok and min_ok and mono_ok and loess_err < 1e-9
    report(
        "criterion-4",
        ok,
        f"strict threshold {strict_ok}, 12-frame rule {min_ok}, "
        f"threshold monotone {mono_ok}, loess quadratic err {loess_err:.1e} < 1e-9",
    )


# -- criterion 5: window mechanics ------------------------------------------------------


def test_criterion_5_window_mechanics():
    config = WindowConfig()
    counts_ok = all(
        window_count(n, 9, 2) == (n - 9) // 2 + 1 for n in range(9, 100)
    )

    desc = np.arange(60, dtype=np.float64)[:, None] * np.ones((1, 183))
    poses = extract_dynamic_poses(desc, ActivityPeriod(20, 28), 4, config)
    resize_ok = len(poses) == 5 and all(p.features.size == 549 for p in poses)
    resized_len = 9 + (config.min_windows - 1) * config.slide_step
    resize_ok &= resized_len == 17

    routing_ok = 54 <= config.short_period_max < 55

    weights = method_b_config().fusion_weights
    base = PortableRng(1).uniform((6, 20))
    fused = sum(w * base for w in weights)
    manual = weights[0] * base + weights[1] * base + weights[2] * base
    fusion_ok = (
        weights == (0.4895, 0.4576, 0.0529)
        and np.allclose(fused, manual, atol=1e-15)
        and np.allclose(
            np.argmax(fused, axis=1), np.argmax(base, axis=1)
        )  # equal-score fusion preserves ranking
    )

    ok = counts_ok and resize_ok and routing_ok and fusion_ok
    report(
        "criterion-5",
        ok,
        f"count formula {counts_ok}, 9->17 resize with 5 poses {resize_ok}, "
        f"54/55 routing {routing_ok}, fusion weights/linearity {fusion_ok}",
    )


# -- criterion 6: recurrent labeler mechanics ----------------------------------------------


def test_criterion_6_method_c_mechanics():
    desc = np.zeros((100, 183))
    rest = extract_train_windows(desc, np.zeros(100, dtype=np.int64))
    active = extract_train_windows(desc, np.full(100, 2, dtype=np.int64))
    stepping_ok = len(rest) == 19 and len(active) == 46

    tiling_ok = True
    for n in (10, 23, 200):
        covered = []
        for s in range(0, n, 10):
            covered.extend(range(s, min(s + 10, n)))
        tiling_ok &= covered == list(range(n))

    labels = np.zeros(80, dtype=np.int64)
    labels[5:19] = 4   # 14 frames
    labels[40:55] = 4  # 15 frames
    out = suppress_short_runs(labels, 15)
    suppress_ok = np.all(out[5:19] == 0) and np.all(out[40:55] == 4)

    schedule = RnnConfig().schedule()
    sched_ok = (
        schedule.rate_at(0) == 0.01
        and abs(schedule.rate_at(10) - 0.0085) < 1e-15
        and abs(schedule.rate_at(20) - 0.007225) < 1e-15
    )

    ok = stepping_ok and tiling_ok and bool(suppress_ok) and sched_ok
    report(
        "criterion-6",
        ok,
        f"stepping 19/46 {stepping_ok}, tiling {tiling_ok}, "
        f"14-vs-15 suppression {bool(suppress_ok)}, lr schedule {sched_ok}",
    )


# -- criterion 7: Jaccard oracle ---------------------------------------------------------


def test_criterion_7_jaccard_oracle():
    rng = PortableRng(4242)
    exact_ok = True
    float_ok = True
    for _ in range(1000):
        n = 1 + rng.integers(80)
        a = rng.uniform(n) < 0.35
        b = rng.uniform(n) < 0.35
        inter = sum(1 for x, y in zip(a, b) if x and y)
        union = sum(1 for x, y in zip(a, b) if x or y)
        got = jaccard_binary(a, b)
        # rational comparison before division
        got_pair = (
            int(np.count_nonzero(a & b)),
            int(np.count_nonzero(a | b)),
        )
        exact_ok &= got_pair == (inter, union)
        expected = 0.0 if union == 0 else float(Fraction(inter, union))
        float_ok &= abs(got - expected) < 1e-12
    ok = exact_ok and float_ok
    report(
        "criterion-7",
        ok,
        f"1000 random pairs: integer counts exact {exact_ok}, float within 1e-12 {float_ok}",
    )


# -- criteria 8 and 9: end-to-end regression and determinism --------------------------------


def _desk_config(root):
    return dataclasses.replace(
        PipelineConfig(),
        data_dir=root / "data",
        model_dir=root / "models",
        report_dir=root / "reports",
        segmenter=SegmenterConfig(max_iterations=200),
    )


def _run_cycle(root):
    config = _desk_config(root)
    cmd_generate(config)
    for method in ("a", "c"):
        cmd_train(config, method)
        cmd_predict(config, method, "test")
        cmd_evaluate(config, method, "test")
    return config


def _read_kv(config, method):
    path = config.report_dir / f"report_{method}_test.kv"
    return dict(line.split("=", 1) for line in path.read_text().splitlines())


@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    timings = {}
    start = time.time()
    config_a = _run_cycle(tmp_path_factory.mktemp("desk1"))
    timings["first"] = time.time() - start
    start = time.time()
    config_b = _run_cycle(tmp_path_factory.mktemp("desk2"))
    timings["second"] = time.time() - start
    return config_a, config_b, timings


def test_criterion_8_end_to_end_regression(desk_runs):
    config, _, timings = desk_runs
    seg_accuracy = float(_read_kv(config, "a")["segmentation_accuracy"])
    jaccard_c = float(_read_kv(config, "c")["overall_jaccard"])
    elapsed = timings["first"]
    ok = elapsed < 900 and seg_accuracy >= 0.95 and jaccard_c >= 0.70
    report(
        "criterion-8",
        ok,
        f"cycle {elapsed:.0f}s < 900s, segmenter held-out accuracy "
        f"{seg_accuracy:.4f} >= 0.95, method C Jaccard {jaccard_c:.4f} >= 0.70",
    )


def test_criterion_9_byte_determinism(desk_runs):
    config_a, config_b, _ = desk_runs

    def digest_dir(directory):
        return {
            p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(directory.iterdir())
            if p.is_file()
        }

    models_equal = digest_dir(config_a.model_dir) == digest_dir(config_b.model_dir)
    reports_equal = digest_dir(config_a.report_dir) == digest_dir(config_b.report_dir)
    data_equal = digest_dir(config_a.data_dir) == digest_dir(config_b.data_dir)
    ok = models_equal and reports_equal and data_equal
    report(
        "criterion-9",
        ok,
        f"model files identical {models_equal}, report files identical {reports_equal}, "
        f"data files identical {data_equal}",
    )
