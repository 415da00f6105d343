# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend: random-walk sampling and SGNS updates.

Keep in lockstep with ``_pure.py`` — same splitmix64 stream, same update
order — so the two backends are interchangeable.
"""

from libc.math cimport exp, log1p

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "compiled"

cdef double _INV_2_53 = 1.0 / 9007199254740992.0


cdef inline unsigned long long _splitmix64(unsigned long long *state) noexcept nogil:
    cdef unsigned long long z
    state[0] = state[0] + <unsigned long long>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <unsigned long long>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <unsigned long long>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline bint _has_edge(const long long[::1] indptr, const long long[::1] indices,
                           long long src, long long dst) noexcept nogil:
    cdef long long lo = indptr[src]
    cdef long long hi = indptr[src + 1]
    cdef long long mid, v
    while lo < hi:
        mid = (lo + hi) // 2
        v = indices[mid]
        if v == dst:
            return True
        if v < dst:
            lo = mid + 1
        else:
            hi = mid
    return False


def random_walk(const long long[::1] indptr, const long long[::1] indices,
                const double[::1] weights, long long start, long long length,
                double p, double q, unsigned long long seed):
    """Sample one weight-proportional walk with return/in-out bias p, q."""
    cdef unsigned long long state = seed
    cdef long long cur = start
    cdef long long prev = -1
    cdef bint biased = not (p == 1.0 and q == 1.0)
    cdef long long lo, hi, e, nxt, deg, j, pick
    cdef double total, w, u
    cdef long long x
    cdef double[::1] cum = np.empty(1, dtype=np.float64)
    cdef long long cap = 1

    walk = [int(start)]
    while len(walk) < length:
        lo = indptr[cur]
        hi = indptr[cur + 1]
        if lo == hi:
            break
        deg = hi - lo
        if deg > cap:
            cap = deg
            cum = np.empty(cap, dtype=np.float64)
        total = 0.0
        for e in range(lo, hi):
            w = weights[e]
            if biased and prev >= 0:
                x = indices[e]
                if x == prev:
                    w = w / p
                elif _has_edge(indptr, indices, x, prev):
                    pass
                else:
                    w = w / q
            total = total + w
            cum[e - lo] = total
        u = <double>(_splitmix64(&state) >> 11) * _INV_2_53 * total
        pick = deg - 1
        for j in range(deg):
            if cum[j] > u:
                pick = j
                break
        nxt = indices[lo + pick]
        walk.append(int(nxt))
        prev = cur
        cur = nxt
    return walk


cdef inline double _neg_log_sigmoid(double x) noexcept nogil:
    if x >= 0.0:
        return log1p(exp(-x))
    return -x + log1p(exp(x))


def sgns_train_chunk(double[:, ::1] w_in, double[:, ::1] w_out,
                     const long long[::1] centers, const long long[::1] contexts,
                     const long long[::1] negatives, long long n_negative,
                     double lr_start, double lr_end,
                     long long pair_offset, long long pair_total):
    """Sequential skip-gram negative-sampling updates over one pair chunk."""
    cdef long long n_pairs = centers.shape[0]
    cdef long long dim = w_in.shape[1]
    cdef double denom = <double>max(pair_total - 1, 1)
    cdef double lr_span = lr_end - lr_start
    cdef double loss = 0.0
    cdef long long i, c, t, k, d
    cdef double lr, s, f, g, label
    cdef double[::1] neu = np.empty(dim, dtype=np.float64)

    with nogil:
        for i in range(n_pairs):
            c = centers[i]
            lr = lr_start + lr_span * ((pair_offset + i) / denom)
            for d in range(dim):
                neu[d] = 0.0
            for k in range(n_negative + 1):
                if k == 0:
                    t = contexts[i]
                    label = 1.0
                else:
                    t = negatives[i * n_negative + (k - 1)]
                    label = 0.0
                s = 0.0
                for d in range(dim):
                    s += w_in[c, d] * w_out[t, d]
                if s > 60.0:
                    s = 60.0
                elif s < -60.0:
                    s = -60.0
                f = 1.0 / (1.0 + exp(-s))
                g = (label - f) * lr
                for d in range(dim):
                    neu[d] += g * w_out[t, d]
                    w_out[t, d] += g * w_in[c, d]
                if label == 1.0:
                    loss += _neg_log_sigmoid(s)
                else:
                    loss += _neg_log_sigmoid(-s)
            for d in range(dim):
                w_in[c, d] += neu[d]
    return loss
