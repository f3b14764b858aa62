"""Agreement between the compiled kernel backend and the NumPy fallback."""

import numpy as np
import pytest

from seqprof import kernels

needs_compiled = pytest.mark.skipif(
    "compiled" not in kernels.available_backends(),
    reason="compiled kernel extension not built",
)


def random_attention_inputs(rng, b=3, h=2, s=7, dh=4):
    q = rng.normal(0, 1, (b, h, s, dh))
    k = rng.normal(0, 1, (b, h, s, dh))
    v = rng.normal(0, 1, (b, h, s, dh))
    mask = np.ones((b, s))
    mask[1, 5:] = 0.0
    mask[2, 3:] = 0.0
    return q, k, v, mask


def test_backend_switch_roundtrip():
    original = kernels.backend()
    previous = kernels.use_backend("pure")
    assert previous == original
    assert kernels.backend() == "pure"
    kernels.use_backend(original)
    assert kernels.backend() == original


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.use_backend("gpu")


def test_pure_attention_matches_reference_softmax():
    rng = np.random.default_rng(0)
    q, k, v, mask = random_attention_inputs(rng)
    out, probs = kernels._pure.attention_forward(q, k, v, mask)
    b, h, s, dh = q.shape
    for bi in range(b):
        real = int(mask[bi].sum())
        for hi in range(h):
            for i in range(s):
                scores = q[bi, hi, i] @ k[bi, hi, :real].T / np.sqrt(dh)
                e = np.exp(scores - scores.max())
                p = e / e.sum()
                np.testing.assert_allclose(probs[bi, hi, i, :real], p, atol=1e-12)
                np.testing.assert_allclose(probs[bi, hi, i, real:], 0.0, atol=1e-12)
                np.testing.assert_allclose(out[bi, hi, i], p @ v[bi, hi, :real], atol=1e-12)


@needs_compiled
def test_align_backends_agree():
    rng = np.random.default_rng(1)
    for _ in range(300):
        ref = rng.integers(0, 5, rng.integers(1, 10)).astype(np.int32)
        hyp = rng.integers(0, 5, rng.integers(1, 10)).astype(np.int32)
        c1, p1 = kernels._pure.align_ids(ref, hyp)
        c2, p2 = kernels._core.align_ids(ref, hyp)
        assert c1 == c2
        np.testing.assert_array_equal(p1, p2)


@needs_compiled
def test_attention_forward_backends_agree():
    rng = np.random.default_rng(2)
    q, k, v, mask = random_attention_inputs(rng)
    out_p, probs_p = kernels._pure.attention_forward(q, k, v, mask)
    out_c, probs_c = kernels._core.attention_forward(q, k, v, mask)
    np.testing.assert_allclose(out_c, out_p, rtol=0, atol=1e-12)
    np.testing.assert_allclose(probs_c, probs_p, rtol=0, atol=1e-12)


@needs_compiled
def test_attention_backward_backends_agree():
    rng = np.random.default_rng(3)
    q, k, v, mask = random_attention_inputs(rng)
    _, probs = kernels._pure.attention_forward(q, k, v, mask)
    dout = rng.normal(0, 1, q.shape)
    dout[1, :, 5:, :] = 0.0
    dout[2, :, 3:, :] = 0.0
    grads_p = kernels._pure.attention_backward(dout, probs, q, k, v)
    grads_c = kernels._core.attention_backward(dout, probs, q, k, v)
    for gp, gc in zip(grads_p, grads_c):
        np.testing.assert_allclose(gc, gp, rtol=0, atol=1e-12)


@needs_compiled
def test_scorer_forward_identical_across_backends():
    from seqprof.scorer import ScorerConfig, ScorerModel

    model = ScorerModel.initialize(
        ScorerConfig(input_dim=5, embed_dim=16, heads=4, layers=2, aspects=3, max_len=12, seed=7)
    )
    feats = np.random.default_rng(8).normal(0, 1, (9, 5))
    previous = kernels.use_backend("compiled")
    try:
        compiled = model.forward(feats)
        kernels.use_backend("pure")
        pure = model.forward(feats)
    finally:
        kernels.use_backend(previous)
    np.testing.assert_allclose(compiled, pure, rtol=0, atol=1e-12)
