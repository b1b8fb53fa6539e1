# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled training kernels.

Semantics mirror ``wembed.trainer.pure.train_batch`` draw for draw: the two
backends consume identical RNG sequences and apply updates in the same
order, so they may differ only in floating-point rounding. The hot loop runs
without the GIL, which is what makes lock-free multi-worker training
effective.
"""

import numpy as np

from libc.math cimport exp, log1p

ctypedef unsigned long long u64
ctypedef long long i64

KERNEL_KIND = "compiled"


cdef inline u64 _lcg(u64 s) noexcept nogil:
    return s * 25214903917ULL + 11ULL


cdef inline double _f53(u64 s) noexcept nogil:
    return <double> (s >> 11) * (1.0 / 9007199254740992.0)


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double _softplus(double x) noexcept nogil:
    if x > 0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


cdef inline Py_ssize_t _bisect_right(const i64[::1] cum, i64 r) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = cum.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] <= r:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _draw_negative(const i64[::1] cum, Py_ssize_t target, u64* state) noexcept nogil:
    cdef int attempt
    cdef Py_ssize_t cand
    for attempt in range(100):
        state[0] = _lcg(state[0])
        cand = _bisect_right(cum, <i64> (state[0] >> 33))
        if cand != target:
            return cand
    return -1


cdef inline double _step(
    float[:, ::1] w_out,
    float[::1] h,
    float[::1] neu1e,
    Py_ssize_t u_idx,
    int label,
    double lr,
) noexcept nogil:
    """One logistic step; returns the pre-update pair loss."""
    cdef Py_ssize_t dim = h.shape[0], c
    cdef double acc = 0.0
    for c in range(dim):
        acc += <double> h[c] * <double> w_out[u_idx, c]
    cdef double g = (label - _sigmoid(acc)) * lr
    cdef float gf = <float> g
    for c in range(dim):
        neu1e[c] += gf * w_out[u_idx, c]
        w_out[u_idx, c] += gf * h[c]
    if label:
        return _softplus(-acc)
    return _softplus(acc)


def train_batch(
    float[:, ::1] w_in,
    float[:, ::1] w_out,
    const int[::1] data,
    const int[::1] offsets,
    bint cbow,
    long window,
    long negative,
    double lr,
    const i64[::1] cum_table,
    const double[::1] keep_probs,
    bint use_subsample,
    u64 rng_state,
):
    """Drop-in replacement for the NumPy ``train_batch``; same contract."""
    cdef Py_ssize_t dim = w_in.shape[1]
    cdef Py_ssize_t max_len = 0, s
    for s in range(offsets.shape[0] - 1):
        if offsets[s + 1] - offsets[s] > max_len:
            max_len = offsets[s + 1] - offsets[s]

    kept_arr = np.empty(max(max_len, 1), dtype=np.intp)
    h_arr = np.empty(dim, dtype=np.float32)
    neu1e_arr = np.empty(dim, dtype=np.float32)
    hd_arr = np.empty(dim, dtype=np.float64)
    cdef Py_ssize_t[::1] kept = kept_arr
    cdef float[::1] h = h_arr
    cdef float[::1] neu1e = neu1e_arr
    cdef double[::1] hd = hd_arr

    cdef u64 state = rng_state
    cdef double loss_sum = 0.0
    cdef long n_pairs = 0, n_centers = 0
    cdef Py_ssize_t n_sentences = offsets.shape[0] - 1
    cdef Py_ssize_t i, n, pos, lo_p, hi_p, q, c, csize, u_idx, h_idx, target
    cdef long b
    cdef int d, label, trained
    cdef double inv
    cdef float invf

    with nogil:
        for s in range(n_sentences):
            n = 0
            if use_subsample:
                for i in range(offsets[s], offsets[s + 1]):
                    state = _lcg(state)
                    if _f53(state) < keep_probs[data[i]]:
                        kept[n] = data[i]
                        n += 1
            else:
                for i in range(offsets[s], offsets[s + 1]):
                    kept[n] = data[i]
                    n += 1
            if n < 2:
                continue

            for pos in range(n):
                state = _lcg(state)
                b = 1 + <long> ((state >> 33) % <u64> window)
                lo_p = pos - b
                if lo_p < 0:
                    lo_p = 0
                hi_p = pos + b
                if hi_p > n - 1:
                    hi_p = n - 1
                target = kept[pos]

                if cbow:
                    csize = hi_p - lo_p  # window positions minus the center
                    if csize == 0:
                        continue
                    for c in range(dim):
                        hd[c] = 0.0
                    for q in range(lo_p, hi_p + 1):
                        if q == pos:
                            continue
                        h_idx = kept[q]
                        for c in range(dim):
                            hd[c] += <double> w_in[h_idx, c]
                    inv = 1.0 / csize
                    for c in range(dim):
                        h[c] = <float> (hd[c] * inv)
                        neu1e[c] = 0.0
                    for d in range(negative + 1):
                        if d == 0:
                            u_idx = target
                            label = 1
                        else:
                            u_idx = _draw_negative(cum_table, target, &state)
                            if u_idx < 0:
                                continue
                            label = 0
                        loss_sum += _step(w_out, h, neu1e, u_idx, label, lr)
                        n_pairs += 1
                    invf = <float> (1.0 / csize)
                    for c in range(dim):
                        neu1e[c] *= invf
                    for q in range(lo_p, hi_p + 1):
                        if q == pos:
                            continue
                        h_idx = kept[q]
                        for c in range(dim):
                            w_in[h_idx, c] += neu1e[c]
                    n_centers += 1
                else:
                    trained = 0
                    for q in range(lo_p, hi_p + 1):
                        if q == pos:
                            continue
                        h_idx = kept[q]
                        for c in range(dim):
                            h[c] = w_in[h_idx, c]
                            neu1e[c] = 0.0
                        for d in range(negative + 1):
                            if d == 0:
                                u_idx = target
                                label = 1
                            else:
                                u_idx = _draw_negative(cum_table, target, &state)
                                if u_idx < 0:
                                    continue
                                label = 0
                            loss_sum += _step(w_out, h, neu1e, u_idx, label, lr)
                            n_pairs += 1
                        for c in range(dim):
                            w_in[h_idx, c] += neu1e[c]
                        trained = 1
                    if trained:
                        n_centers += 1

    return loss_sum, n_pairs, n_centers, state
