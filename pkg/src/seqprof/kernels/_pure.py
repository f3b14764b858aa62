"""Pure NumPy implementations of the hot kernels.

Same contracts as the compiled module `seqprof.kernels._core`; used as the
fallback backend when the extension is unavailable (or forced via the
SEQPROF_PURE environment variable). Kept intentionally in lockstep with the
compiled code: the test suite asserts agreement between the two backends.
"""

import numpy as np

BACKEND = "pure"

_MASK_PENALTY = 1e30


def align_ids(ref, hyp):
    """Minimum-edit alignment of two integer token sequences.

    Unit costs for substitution/insertion/deletion, 0 for match. Returns
    ``(cost, pairs)`` where ``pairs`` is an (L, 2) int32 array of aligned
    (ref, hyp) ids; -1 marks the placeholder side of an insertion/deletion.

    The traceback walks the sequences front to back over a suffix-cost table
    and breaks ties preferring match, then substitution, then deletion (ref
    consumed), then insertion.
    """
    ref = np.asarray(ref, dtype=np.int32)
    hyp = np.asarray(hyp, dtype=np.int32)
    m, n = len(ref), len(hyp)

    # dist[i, j] = edit distance between ref[i:] and hyp[j:]
    dist = np.zeros((m + 1, n + 1), dtype=np.int32)
    dist[m, :] = np.arange(n, -1, -1, dtype=np.int32)
    dist[:, n] = np.arange(m, -1, -1, dtype=np.int32)
    for i in range(m - 1, -1, -1):
        row = dist[i]
        below = dist[i + 1]
        ri = ref[i]
        for j in range(n - 1, -1, -1):
            best = below[j + 1] + (0 if ri == hyp[j] else 1)
            if below[j] + 1 < best:
                best = below[j] + 1
            if row[j + 1] + 1 < best:
                best = row[j + 1] + 1
            row[j] = best

    pairs = np.empty((m + n, 2), dtype=np.int32)
    i = j = k = 0
    while i < m or j < n:
        if i < m and j < n and dist[i, j] == dist[i + 1, j + 1] + (0 if ref[i] == hyp[j] else 1):
            pairs[k, 0] = ref[i]
            pairs[k, 1] = hyp[j]
            i += 1
            j += 1
        elif i < m and dist[i, j] == dist[i + 1, j] + 1:
            pairs[k, 0] = ref[i]
            pairs[k, 1] = -1
            i += 1
        else:
            pairs[k, 0] = -1
            pairs[k, 1] = hyp[j]
            j += 1
        k += 1
    return int(dist[0, 0]), pairs[:k].copy()


def attention_forward(q, k, v, mask):
    """Scaled dot-product attention over stacked heads.

    q, k, v: (B, H, S, dh) float64. mask: (B, S) float64 with 1.0 at real
    positions and 0.0 at padding; padded keys receive (effectively) zero
    attention weight. Returns (out, probs) with probs saved for backward.
    """
    dh = q.shape[-1]
    scores = np.matmul(q, np.swapaxes(k, -1, -2)) / np.sqrt(dh)
    scores = scores + (mask[:, None, None, :] - 1.0) * _MASK_PENALTY
    scores -= scores.max(axis=-1, keepdims=True)
    probs = np.exp(scores)
    probs /= probs.sum(axis=-1, keepdims=True)
    out = np.matmul(probs, v)
    return out, probs


def attention_backward(dout, probs, q, k, v):
    """Gradients of attention_forward w.r.t. q, k, v.

    Expects the upstream gradient to be zero at padded query positions (the
    caller guarantees this: padded positions never feed the loss).
    """
    dh = q.shape[-1]
    scale = 1.0 / np.sqrt(dh)
    dv = np.matmul(np.swapaxes(probs, -1, -2), dout)
    dprobs = np.matmul(dout, np.swapaxes(v, -1, -2))
    dscores = probs * (dprobs - (dprobs * probs).sum(axis=-1, keepdims=True))
    dq = np.matmul(dscores, k) * scale
    dk = np.matmul(np.swapaxes(dscores, -1, -2), q) * scale
    return dq, dk, dv
