import numpy as np
import pytest

from skelgest.nn import SgdmSchedule, TrainingDivergedError, sgdm_minimize
from skelgest.rng import PortableRng


def test_schedule_validation():
    with pytest.raises(ValueError):
        SgdmSchedule(learning_rate=0.0)
    with pytest.raises(ValueError):
        SgdmSchedule(drop_factor=0.0)
    with pytest.raises(ValueError):
        SgdmSchedule(drop_factor=1.5)
    with pytest.raises(ValueError):
        SgdmSchedule(momentum=1.0)


def test_schedule_values():
    schedule = SgdmSchedule(learning_rate=0.01, drop_factor=0.85, drop_period=10)
    assert schedule.rate_at(0) == 0.01
    assert abs(schedule.rate_at(9) - 0.01) < 1e-15
    assert abs(schedule.rate_at(10) - 0.0085) < 1e-15
    assert abs(schedule.rate_at(20) - 0.007225) < 1e-15
    assert abs(schedule.rate_at(23) - 0.01 * 0.85**2) < 1e-15


def _quadratic_batch_fn(a, b):
    def fun(w, batch):
        grad = a @ w - b
        return float(0.5 * w @ a @ w - b @ w), grad

    return fun


def test_zero_momentum_is_plain_sgd():
    a = np.diag([1.0, 2.0])
    b = np.array([1.0, -1.0])
    fun = _quadratic_batch_fn(a, b)
    schedule = SgdmSchedule(
        learning_rate=0.1, momentum=0.0, max_epochs=3, batch_size=4, drop_period=100
    )
    w, _ = sgdm_minimize(fun, np.zeros(2), 4, schedule, PortableRng(0))
    # replicate manually: one batch per epoch, w <- w - rate * grad
    w_ref = np.zeros(2)
    for _ in range(3):
        w_ref = w_ref - 0.1 * (a @ w_ref - b)
    assert np.allclose(w, w_ref, atol=1e-15)


def test_momentum_update_rule():
    a = np.eye(2)
    b = np.array([2.0, 0.0])
    fun = _quadratic_batch_fn(a, b)
    schedule = SgdmSchedule(
        learning_rate=0.1, momentum=0.5, max_epochs=2, batch_size=4, drop_period=100
    )
    w, _ = sgdm_minimize(fun, np.zeros(2), 4, schedule, PortableRng(0))
    v = np.zeros(2)
    w_ref = np.zeros(2)
    for _ in range(2):
        v = 0.5 * v - 0.1 * (a @ w_ref - b)
        w_ref = w_ref + v
    assert np.allclose(w, w_ref, atol=1e-15)


def test_all_samples_consumed_including_short_final_batch():
    seen = []

    def fun(w, batch):
        seen.append(len(batch))
        return 0.0, np.zeros_like(w)

    schedule = SgdmSchedule(max_epochs=1, batch_size=4)
    sgdm_minimize(fun, np.zeros(3), 10, schedule, PortableRng(1))
    assert seen == [4, 4, 2]


def test_epoch_reshuffles_batches():
    batches = []

    def fun(w, batch):
        batches.append(tuple(batch))
        return 0.0, np.zeros_like(w)

    schedule = SgdmSchedule(max_epochs=2, batch_size=8)
    sgdm_minimize(fun, np.zeros(2), 8, schedule, PortableRng(2))
    assert batches[0] != batches[1]
    assert sorted(batches[0]) == sorted(batches[1]) == list(range(8))


def test_fixed_seed_bit_identical():
    a = np.diag([1.0, 3.0, 0.5])
    b = np.array([1.0, 2.0, 3.0])
    fun = _quadratic_batch_fn(a, b)
    schedule = SgdmSchedule(learning_rate=0.05, max_epochs=5, batch_size=2)
    w1, t1 = sgdm_minimize(fun, np.zeros(3), 6, schedule, PortableRng(3))
    w2, t2 = sgdm_minimize(fun, np.zeros(3), 6, schedule, PortableRng(3))
    assert np.array_equal(w1, w2)
    assert t1 == t2


def test_divergence_aborts():
    def fun(w, batch):
        return 1e7, np.zeros_like(w)

    schedule = SgdmSchedule(max_epochs=2, batch_size=2)
    with pytest.raises(TrainingDivergedError):
        sgdm_minimize(fun, np.zeros(2), 4, schedule, PortableRng(4))
