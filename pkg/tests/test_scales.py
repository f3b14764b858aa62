"""Label-scale to tanh-target transforms."""

import numpy as np
import pytest

from seqprof.errors import ConfigError, RangeError
from seqprof.scales import ScoreScale, from_target, to_target


def test_requires_increasing_scale():
    with pytest.raises(ConfigError):
        ScoreScale(5.0, 5.0)
    with pytest.raises(ConfigError):
        ScoreScale(2.0, 1.0)


def test_endpoints_exact():
    s = ScoreScale(1.0, 10.0)
    assert to_target(1.0, s) == -1.0
    assert to_target(10.0, s) == 1.0


def test_midpoints():
    assert to_target(5.5, ScoreScale(1.0, 10.0)) == 0.0
    assert to_target(0.5, ScoreScale(0.0, 1.0)) == 0.0
    assert from_target(0.0, ScoreScale(1.0, 10.0)) == 5.5
    assert from_target(0.0, ScoreScale(1.0, 5.0)) == 3.0


def test_monotone_affine_onto():
    s = ScoreScale(1.0, 5.0)
    grid = np.linspace(1.0, 5.0, 101)
    t = to_target(grid, s)
    assert t[0] == -1.0 and t[-1] == 1.0
    assert np.all(np.diff(t) > 0)


def test_roundtrip_and_endpoints_random_scales():
    rng = np.random.default_rng(20)
    for _ in range(1000):
        a = rng.uniform(-50.0, 50.0)
        b = a + rng.uniform(0.1, 100.0)
        scale = ScoreScale(a, b)
        assert to_target(a, scale) == -1.0
        assert to_target(b, scale) == 1.0
        s = rng.uniform(a, b)
        assert abs(from_target(to_target(s, scale), scale) - s) < 1e-12 * max(1.0, abs(s))
        t = rng.uniform(-1.0, 1.0)
        assert abs(to_target(from_target(t, scale), scale) - t) < 1e-12


def test_out_of_range_rejected():
    s = ScoreScale(1.0, 10.0)
    with pytest.raises(RangeError):
        to_target(0.5, s)
    with pytest.raises(RangeError):
        to_target(10.5, s)
    with pytest.raises(RangeError):
        from_target(1.5, s)
