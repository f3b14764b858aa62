"""Affine transforms between label scales and the tanh target range.

Raw labels on a scale [a, b] map onto [-1, 1] via

    t = ((s - a) + (s - b)) / (b - a)

algebraically identical to (2s - a - b) / (b - a) but with the endpoints
exact in floating point: s = a gives exactly -1 and s = b exactly +1.
"""

from dataclasses import dataclass

import numpy as np

from seqprof.errors import ConfigError, RangeError

_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class ScoreScale:
    """Closed label range [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a < self.b):
            raise ConfigError(f"score scale requires a < b, got [{self.a}, {self.b}]")

    @property
    def width(self):
        return self.b - self.a


def to_target(score, scale):
    """Map a label on [a, b] onto the tanh target range [-1, 1]."""
    s = np.asarray(score, dtype=np.float64)
    tol = _EDGE_TOL * scale.width
    if np.any(s < scale.a - tol) or np.any(s > scale.b + tol):
        raise RangeError(f"score outside scale [{scale.a}, {scale.b}]")
    s = np.clip(s, scale.a, scale.b)
    t = ((s - scale.a) + (s - scale.b)) / (scale.b - scale.a)
    return float(t) if t.ndim == 0 else t


def from_target(target, scale):
    """Inverse of to_target: map a target in [-1, 1] back onto [a, b]."""
    t = np.asarray(target, dtype=np.float64)
    if np.any(t < -1.0 - _EDGE_TOL) or np.any(t > 1.0 + _EDGE_TOL):
        raise RangeError("target outside [-1, 1]")
    t = np.clip(t, -1.0, 1.0)
    s = (t * (scale.b - scale.a) + scale.a + scale.b) / 2.0
    s = np.clip(s, scale.a, scale.b)
    return float(s) if s.ndim == 0 else s
