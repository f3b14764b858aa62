"""Kernel backend selection.

The alignment DP and the attention inner loops dominate runtime, so they
exist twice: a Cython extension (`_core`) and a pure NumPy fallback
(`_pure`). The compiled backend is preferred when importable; setting the
environment variable SEQPROF_PURE=1 forces the fallback. `use_backend`
switches at runtime (tests and the kernel benchmark rely on it).
"""

import os

from seqprof.kernels import _pure

try:
    from seqprof.kernels import _core
except ImportError:
    _core = None

_BACKENDS = {"pure": _pure}
if _core is not None:
    _BACKENDS["compiled"] = _core

if os.environ.get("SEQPROF_PURE"):
    _impl = _pure
else:
    _impl = _core if _core is not None else _pure


def backend():
    """Name of the active backend: 'compiled' or 'pure'."""
    return _impl.BACKEND


def available_backends():
    return sorted(_BACKENDS)


def use_backend(name):
    """Select a backend by name; returns the previously active name."""
    global _impl
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}")
    previous = _impl.BACKEND
    _impl = _BACKENDS[name]
    return previous


def align_ids(ref, hyp):
    return _impl.align_ids(ref, hyp)


def attention_forward(q, k, v, mask):
    return _impl.attention_forward(q, k, v, mask)


def attention_backward(dout, probs, q, k, v):
    return _impl.attention_backward(dout, probs, q, k, v)
