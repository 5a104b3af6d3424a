from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skelgest.evaluation import (
    ConfusionMatrix,
    confusion,
    frame_accuracy,
    jaccard_binary,
    mean_jaccard,
)
from skelgest.rng import PortableRng


def test_jaccard_identical_nonempty():
    v = np.array([0, 1, 1, 0, 1])
    assert jaccard_binary(v, v) == 1.0


def test_jaccard_disjoint():
    assert jaccard_binary(np.array([1, 1, 0, 0]), np.array([0, 0, 1, 1])) == 0.0


def test_jaccard_both_empty_is_zero():
    assert jaccard_binary(np.zeros(5), np.zeros(5)) == 0.0


def test_jaccard_interval_example():
    # GT frames 10..20 (11 frames), prediction 15..25: overlap 6, union 16
    n = 30
    a = np.zeros(n)
    b = np.zeros(n)
    a[10:21] = 1
    b[15:26] = 1
    assert jaccard_binary(a, b) == 6 / 16 == 0.375


def test_jaccard_length_mismatch():
    with pytest.raises(ValueError):
        jaccard_binary(np.zeros(3), np.zeros(4))


def _brute_force_jaccard(a, b):
    inter = 0
    union = 0
    for x, y in zip(a, b):
        if x and y:
            inter += 1
        if x or y:
            union += 1
    if union == 0:
        return Fraction(0), Fraction(1)
    return Fraction(inter), Fraction(union)


def test_jaccard_against_bruteforce_oracle():
    rng = PortableRng(77)
    for _ in range(1000):
        n = 1 + rng.integers(60)
        a = rng.uniform(n) < 0.4
        b = rng.uniform(n) < 0.4
        num, den = _brute_force_jaccard(a, b)
        exact = Fraction(num, den)
        got = jaccard_binary(a, b)
        assert abs(got - float(exact)) < 1e-12


@given(
    st.lists(st.booleans(), min_size=1, max_size=50),
    st.lists(st.booleans(), min_size=1, max_size=50),
)
@settings(max_examples=100, deadline=None)
def test_jaccard_symmetric_bounded(a_raw, b_raw):
    n = min(len(a_raw), len(b_raw))
    a = np.array(a_raw[:n])
    b = np.array(b_raw[:n])
    j = jaccard_binary(a, b)
    assert 0.0 <= j <= 1.0
    assert j == jaccard_binary(b, a)
    if j == 1.0:
        assert np.array_equal(a, b) and a.any()


def test_mean_jaccard_perfect_prediction():
    gt = {"s0": np.array([0, 1, 1, 0]), "s1": np.array([2, 2, 0, 0])}
    report = mean_jaccard(gt, gt)
    assert report.overall == 1.0
    assert report.defined


def test_mean_jaccard_false_positive_class_scores_zero():
    gt = {"s": np.array([0, 0, 1, 1])}
    pred = {"s": np.array([2, 2, 1, 1])}
    report = mean_jaccard(gt, pred)
    assert report.scores[("s", 1)] == 1.0
    assert report.scores[("s", 2)] == 0.0
    assert report.overall == 0.5


def test_mean_jaccard_fixture_mean():
    # three (sequence, class) pairs scoring 1.0, 0.5 and 0.0
    gt = {
        "a": np.array([3, 3, 0, 0]),   # exact match        -> 1.0
        "b": np.array([5, 5, 0, 0]),   # overlap 2, union 4 -> 0.5
        "c": np.array([0, 0, 7, 7]),   # disjoint           -> 0.0
    }
    pred = {
        "a": np.array([3, 3, 0, 0]),
        "b": np.array([5, 5, 5, 5]),
        "c": np.array([7, 7, 0, 0]),
    }
    report = mean_jaccard(gt, pred)
    assert report.scores[("a", 3)] == 1.0
    assert report.scores[("b", 5)] == 0.5
    assert report.scores[("c", 7)] == 0.0
    assert abs(report.overall - 0.5) < 1e-12


def test_mean_jaccard_empty_report_flag():
    gt = {"s": np.zeros(4, dtype=np.int64)}
    report = mean_jaccard(gt, gt)
    assert not report.defined
    assert report.overall is None


def test_mean_jaccard_sequence_order_invariant():
    rng = PortableRng(5)
    gt = {f"s{i}": rng.integers(4, 20) for i in range(6)}
    pred = {f"s{i}": rng.integers(4, 20) for i in range(6)}
    r1 = mean_jaccard(gt, pred)
    r2 = mean_jaccard(dict(reversed(list(gt.items()))), pred)
    assert r1.overall == r2.overall


def test_mean_jaccard_length_mismatch():
    with pytest.raises(ValueError):
        mean_jaccard({"s": np.zeros(3)}, {"s": np.zeros(4)})


def test_confusion_perfect_is_diagonal():
    labels = np.array([0, 1, 2, 20, 5, 0])
    m = confusion(labels, labels)
    assert m.counts.shape == (21, 21)
    assert m.total == 6
    assert np.all(m.counts == np.diag(np.diag(m.counts)))


def test_confusion_total_and_margins():
    gt = np.array([0, 0, 3, 3, 3, 0])
    pred = np.array([0, 3, 3, 3, 0, 0])
    m = confusion(gt, pred)
    assert m.total == 6
    assert m.counts[3, 0] == 1  # false negative: gesture predicted as rest
    assert m.counts[0, 3] == 1  # false positive: rest predicted as gesture
    assert m.counts[3, 3] == 2
    # row sums equal ground-truth class frame counts
    assert m.counts[3].sum() == 3
    assert m.counts[0].sum() == 3


def test_confusion_transpose_on_swap():
    rng = PortableRng(9)
    gt = rng.integers(21, 500)
    pred = rng.integers(21, 500)
    assert np.array_equal(confusion(gt, pred).counts, confusion(pred, gt).counts.T)


def test_confusion_log_grid():
    m = ConfusionMatrix(np.array([[9, 0], [99, 999]]))
    assert np.allclose(m.log10_grid(), [[1.0, 0.0], [2.0, 3.0]])


def test_frame_accuracy_examples():
    a = np.array([1, 0, 1, 1])
    assert frame_accuracy(a, a) == 1.0
    assert frame_accuracy(a, 1 - a) == 0.0
    gt = np.zeros(100, dtype=np.int64)
    pred = gt.copy()
    pred[:3] = 1
    assert frame_accuracy(gt, pred) == 0.97


def test_frame_accuracy_empty_raises():
    with pytest.raises(ValueError):
        frame_accuracy(np.array([]), np.array([]))
