import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skelgest.rng import PortableRng, mix64


def test_scalar_and_vector_paths_agree():
    vec = PortableRng(123).raw64(50)
    scal = PortableRng(123)
    assert np.array_equal(vec, np.array([scal._raw_scalar() for _ in range(50)], dtype=np.uint64))


def test_same_seed_same_stream():
    a = PortableRng(7)
    b = PortableRng(7)
    assert np.array_equal(a.uniform(100), b.uniform(100))
    assert np.array_equal(a.normal((3, 4)), b.normal((3, 4)))
    assert np.array_equal(a.permutation(20), b.permutation(20))


def test_known_mix64_values():
    # SplitMix64 finalizer is a fixed function; pin a few outputs
    assert mix64(0) == 0
    assert mix64(1) == mix64(1)
    out = [mix64(i) for i in range(4)]
    assert len(set(out)) == 4


def test_interleaving_matches_block_draws():
    r1 = PortableRng(9)
    first = r1.uniform(3)
    second = r1.uniform(2)
    assert np.array_equal(np.concatenate([first, second]), PortableRng(9).uniform(5))


def test_uniform_range_and_moments():
    u = PortableRng(11).uniform(200_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1.0 / 12.0) < 0.001


def test_normal_moments():
    z = PortableRng(13).normal(200_000)
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1.0) < 0.01


def test_integers_bounds():
    v = PortableRng(17).integers(7, 10_000)
    assert v.min() >= 0 and v.max() <= 6
    assert set(np.unique(v)) == set(range(7))
    with pytest.raises(ValueError):
        PortableRng(1).integers(0)


def test_permutation_is_a_permutation():
    p = PortableRng(3).permutation(100)
    assert sorted(p.tolist()) == list(range(100))


def test_spawn_is_order_independent_and_distinct():
    parent = PortableRng(5)
    a = parent.spawn(1)
    parent.uniform(10)  # consuming the parent must not move children
    b = PortableRng(5).spawn(1)
    assert np.array_equal(a.uniform(5), b.uniform(5))
    assert not np.array_equal(PortableRng(5).spawn(1).uniform(5), PortableRng(5).spawn(2).uniform(5))


@given(st.integers(min_value=0, max_value=2**64 - 1), st.integers(min_value=1, max_value=64))
@settings(max_examples=50, deadline=None)
def test_raw_outputs_agree_for_any_seed(seed, n):
    vec = PortableRng(seed).raw64(n)
    r = PortableRng(seed)
    assert np.array_equal(vec, np.array([r._raw_scalar() for _ in range(n)], dtype=np.uint64))
