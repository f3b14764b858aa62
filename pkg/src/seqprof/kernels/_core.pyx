# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Mirrors `seqprof.kernels._pure` exactly; see that module for the contracts.
The alignment kernel fuses the suffix DP fill and the traceback; the
attention kernels fuse the masked softmax with the score/context products
to avoid the large (B, H, S, S) temporaries NumPy needs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

BACKEND = "compiled"

cdef double _MASK_PENALTY = 1e30


def align_ids(ref, hyp):
    ref_arr = np.ascontiguousarray(ref, dtype=np.int32)
    hyp_arr = np.ascontiguousarray(hyp, dtype=np.int32)
    cdef cnp.int32_t[::1] r = ref_arr
    cdef cnp.int32_t[::1] h = hyp_arr
    cdef int m = r.shape[0]
    cdef int n = h.shape[0]

    dist_arr = np.zeros((m + 1, n + 1), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] dist = dist_arr
    pairs_arr = np.empty((m + n, 2), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] pairs = pairs_arr

    cdef int i, j, k, best, cand, ri
    with nogil:
        for j in range(n + 1):
            dist[m, j] = n - j
        for i in range(m + 1):
            dist[i, n] = m - i
        for i in range(m - 1, -1, -1):
            ri = r[i]
            for j in range(n - 1, -1, -1):
                best = dist[i + 1, j + 1] + (0 if ri == h[j] else 1)
                cand = dist[i + 1, j] + 1
                if cand < best:
                    best = cand
                cand = dist[i, j + 1] + 1
                if cand < best:
                    best = cand
                dist[i, j] = best

        i = 0
        j = 0
        k = 0
        while i < m or j < n:
            if i < m and j < n and dist[i, j] == dist[i + 1, j + 1] + (0 if r[i] == h[j] else 1):
                pairs[k, 0] = r[i]
                pairs[k, 1] = h[j]
                i += 1
                j += 1
            elif i < m and dist[i, j] == dist[i + 1, j] + 1:
                pairs[k, 0] = r[i]
                pairs[k, 1] = -1
                i += 1
            else:
                pairs[k, 0] = -1
                pairs[k, 1] = h[j]
                j += 1
            k += 1
    return int(dist_arr[0, 0]), pairs_arr[:k].copy()


def attention_forward(q, k, v, mask):
    q_arr = np.ascontiguousarray(q, dtype=np.float64)
    k_arr = np.ascontiguousarray(k, dtype=np.float64)
    v_arr = np.ascontiguousarray(v, dtype=np.float64)
    mask_arr = np.ascontiguousarray(mask, dtype=np.float64)

    cdef cnp.float64_t[:, :, :, ::1] qv = q_arr
    cdef cnp.float64_t[:, :, :, ::1] kv = k_arr
    cdef cnp.float64_t[:, :, :, ::1] vv = v_arr
    cdef cnp.float64_t[:, ::1] mv = mask_arr

    cdef int B = qv.shape[0]
    cdef int H = qv.shape[1]
    cdef int S = qv.shape[2]
    cdef int dh = qv.shape[3]

    out_arr = np.zeros((B, H, S, dh), dtype=np.float64)
    probs_arr = np.empty((B, H, S, S), dtype=np.float64)
    cdef cnp.float64_t[:, :, :, ::1] out = out_arr
    cdef cnp.float64_t[:, :, :, ::1] probs = probs_arr

    cdef double scale = 1.0 / sqrt(<double> dh)
    cdef int b, hh, i, j, d
    cdef double s, rowmax, total, p
    with nogil:
        for b in range(B):
            for hh in range(H):
                for i in range(S):
                    rowmax = -1e300
                    for j in range(S):
                        s = 0.0
                        for d in range(dh):
                            s += qv[b, hh, i, d] * kv[b, hh, j, d]
                        s = s * scale + (mv[b, j] - 1.0) * _MASK_PENALTY
                        probs[b, hh, i, j] = s
                        if s > rowmax:
                            rowmax = s
                    total = 0.0
                    for j in range(S):
                        p = exp(probs[b, hh, i, j] - rowmax)
                        probs[b, hh, i, j] = p
                        total += p
                    for j in range(S):
                        p = probs[b, hh, i, j] / total
                        probs[b, hh, i, j] = p
                        for d in range(dh):
                            out[b, hh, i, d] += p * vv[b, hh, j, d]
    return out_arr, probs_arr


def attention_backward(dout, probs, q, k, v):
    dout_arr = np.ascontiguousarray(dout, dtype=np.float64)
    probs_arr = np.ascontiguousarray(probs, dtype=np.float64)
    q_arr = np.ascontiguousarray(q, dtype=np.float64)
    k_arr = np.ascontiguousarray(k, dtype=np.float64)
    v_arr = np.ascontiguousarray(v, dtype=np.float64)

    cdef cnp.float64_t[:, :, :, ::1] dov = dout_arr
    cdef cnp.float64_t[:, :, :, ::1] pv = probs_arr
    cdef cnp.float64_t[:, :, :, ::1] qv = q_arr
    cdef cnp.float64_t[:, :, :, ::1] kv = k_arr
    cdef cnp.float64_t[:, :, :, ::1] vv = v_arr

    cdef int B = qv.shape[0]
    cdef int H = qv.shape[1]
    cdef int S = qv.shape[2]
    cdef int dh = qv.shape[3]

    dq_arr = np.zeros((B, H, S, dh), dtype=np.float64)
    dk_arr = np.zeros((B, H, S, dh), dtype=np.float64)
    dv_arr = np.zeros((B, H, S, dh), dtype=np.float64)
    cdef cnp.float64_t[:, :, :, ::1] dq = dq_arr
    cdef cnp.float64_t[:, :, :, ::1] dk = dk_arr
    cdef cnp.float64_t[:, :, :, ::1] dv = dv_arr

    drow_arr = np.empty(S, dtype=np.float64)
    cdef cnp.float64_t[::1] drow = drow_arr

    cdef double scale = 1.0 / sqrt(<double> dh)
    cdef int b, hh, i, j, d
    cdef double s, inner, ds
    with nogil:
        for b in range(B):
            for hh in range(H):
                for i in range(S):
                    # dprobs row and its probs-weighted mean (softmax backward)
                    inner = 0.0
                    for j in range(S):
                        s = 0.0
                        for d in range(dh):
                            s += dov[b, hh, i, d] * vv[b, hh, j, d]
                        drow[j] = s
                        inner += s * pv[b, hh, i, j]
                    for j in range(S):
                        ds = pv[b, hh, i, j] * (drow[j] - inner) * scale
                        for d in range(dh):
                            dq[b, hh, i, d] += ds * kv[b, hh, j, d]
                            dk[b, hh, j, d] += ds * qv[b, hh, i, d]
                            dv[b, hh, j, d] += pv[b, hh, i, j] * dov[b, hh, i, d]
    return dq_arr, dk_arr, dv_arr
