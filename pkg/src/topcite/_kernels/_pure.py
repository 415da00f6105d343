"""Pure-Python kernel backend.

Mirrors the compiled backend in ``_speedups.pyx`` operation for operation:
same splitmix64 random stream, same sequential update order. The compiled
backend is preferred at import time; this one keeps the package functional
(and the algorithms auditable) without a C compiler.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "pure"

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def _splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state, returning (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def _has_edge(indptr, indices, src: int, dst: int) -> bool:
    """Binary search for dst among the sorted out-neighbors of src."""
    lo = indptr[src]
    hi = indptr[src + 1]
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


def random_walk(indptr, indices, weights, start, length, p, q, seed):
    """Sample one weight-proportional walk with return/in-out bias p, q.

    Halts early at a node with no out-edges. Returns a list of node indices
    of at most `length` entries, starting with `start`.
    """
    state = seed & _MASK64
    walk = [int(start)]
    cur = int(start)
    prev = -1
    biased = not (p == 1.0 and q == 1.0)
    while len(walk) < length:
        lo = int(indptr[cur])
        hi = int(indptr[cur + 1])
        if lo == hi:
            break
        total = 0.0
        cum = []
        for e in range(lo, hi):
            w = float(weights[e])
            if biased and prev >= 0:
                x = int(indices[e])
                if x == prev:
                    w = w / p
                elif _has_edge(indptr, indices, x, prev):
                    pass
                else:
                    w = w / q
            total = total + w
            cum.append(total)
        state, z = _splitmix64(state)
        u = (z >> 11) * _INV_2_53 * total
        pick = hi - lo - 1
        for j in range(hi - lo):
            if cum[j] > u:
                pick = j
                break
        nxt = int(indices[lo + pick])
        walk.append(nxt)
        prev = cur
        cur = nxt
    return walk


def _neg_log_sigmoid(x: float) -> float:
    # -log(sigmoid(x)), computed stably
    if x >= 0.0:
        return math.log1p(math.exp(-x))
    return -x + math.log1p(math.exp(x))


def sgns_train_chunk(w_in, w_out, centers, contexts, negatives, n_negative,
                     lr_start, lr_end, pair_offset, pair_total):
    """Sequential skip-gram negative-sampling updates over one pair chunk.

    w_in and w_out are modified in place; the learning rate decays linearly
    from lr_start to lr_end over pair_total pairs across the whole run.
    Returns the summed loss (positive plus negative terms) of the chunk.
    """
    n_pairs = len(centers)
    denom = float(max(pair_total - 1, 1))
    lr_span = lr_end - lr_start
    loss = 0.0
    for i in range(n_pairs):
        c = int(centers[i])
        lr = lr_start + lr_span * ((pair_offset + i) / denom)
        vc = w_in[c]
        neu = np.zeros_like(vc)
        for k in range(n_negative + 1):
            if k == 0:
                t = int(contexts[i])
                label = 1.0
            else:
                t = int(negatives[i * n_negative + (k - 1)])
                label = 0.0
            ut = w_out[t]
            s = float(np.dot(vc, ut))
            if s > 60.0:
                s = 60.0
            elif s < -60.0:
                s = -60.0
            f = 1.0 / (1.0 + math.exp(-s))
            g = (label - f) * lr
            neu += g * ut
            ut += g * vc
            loss += _neg_log_sigmoid(s if label == 1.0 else -s)
        vc += neu
    return loss
