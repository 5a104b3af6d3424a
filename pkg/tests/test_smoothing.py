import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skelgest.rng import PortableRng
from skelgest.smoothing import loess_smooth


def test_span_validation():
    with pytest.raises(ValueError):
        loess_smooth(np.zeros(10), span=4)
    with pytest.raises(ValueError):
        loess_smooth(np.zeros(10), span=1)


def test_short_input_identity():
    y = np.array([1.0, 5.0])
    assert np.array_equal(loess_smooth(y, 11), y)


def test_global_quadratic_reproduced_exactly():
    x = np.arange(60, dtype=np.float64)
    y = 0.25 * x**2 - 3.0 * x + 7.0
    out = loess_smooth(y, 11)
    assert np.max(np.abs(out - y)) < 1e-9


def test_idempotent_on_quadratics():
    x = np.arange(40, dtype=np.float64)
    y = -0.1 * x**2 + x
    once = loess_smooth(y, 11)
    twice = loess_smooth(once, 11)
    assert np.max(np.abs(twice - once)) < 1e-9


def test_constant_preserved():
    out = loess_smooth(np.full(25, 0.4), 11)
    assert np.allclose(out, 0.4, atol=1e-12)


def test_white_noise_variance_shrinks():
    noise = PortableRng(8).normal(10_000)
    smoothed = loess_smooth(noise, 11)
    assert smoothed.var() < noise.var() * 0.6


def test_multicolumn_matches_per_column():
    rng = PortableRng(9)
    y = rng.normal((50, 4))
    joint = loess_smooth(y, 11)
    for c in range(4):
        assert np.allclose(joint[:, c], loess_smooth(y[:, c], 11), atol=1e-12)


@given(
    st.integers(min_value=3, max_value=40),
    st.integers(min_value=0, max_value=1000),
)
@settings(max_examples=40, deadline=None)
def test_output_shape_and_finite(n, seed):
    y = PortableRng(seed).normal(n)
    out = loess_smooth(y, 11)
    assert out.shape == y.shape
    assert np.all(np.isfinite(out))
