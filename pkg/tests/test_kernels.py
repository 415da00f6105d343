"""Cross-backend equivalence of the compiled and pure kernels."""

import numpy as np
import pytest

from topcite._kernels import _pure

try:
    from topcite._kernels import _speedups
except ImportError:
    _speedups = None

needs_compiled = pytest.mark.skipif(_speedups is None,
                                    reason="compiled kernels unavailable")


def ring_csr(n=12, extra=10, seed=0):
    rng = np.random.default_rng(seed)
    adj = {i: {(i + 1) % n} for i in range(n)}
    for _ in range(extra):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            adj[int(a)].add(int(b))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices, weights = [], []
    for i in range(n):
        neighbors = sorted(adj[i])
        indptr[i + 1] = indptr[i] + len(neighbors)
        indices.extend(neighbors)
        weights.extend(float(rng.uniform(0.2, 3.0)) for _ in neighbors)
    return indptr, np.asarray(indices, dtype=np.int64), \
        np.asarray(weights, dtype=np.float64)


@needs_compiled
class TestBackendEquivalence:
    @pytest.mark.parametrize("p,q", [(1.0, 1.0), (0.25, 2.0), (3.0, 0.5)])
    def test_walks_identical(self, p, q):
        indptr, indices, weights = ring_csr()
        for seed in (0, 1, 12345, 2**63):
            for start in (0, 5, 11):
                pure = _pure.random_walk(indptr, indices, weights, start,
                                         40, p, q, seed)
                fast = _speedups.random_walk(indptr, indices, weights, start,
                                             40, p, q, seed)
                assert pure == fast

    def test_sgns_updates_agree(self):
        rng = np.random.default_rng(7)
        vocab, dim, n_pairs, n_neg = 30, 24, 800, 5
        w_in = (rng.random((vocab, dim)) - 0.5) / dim
        w_out = np.zeros_like(w_in)
        centers = rng.integers(0, vocab, n_pairs).astype(np.int64)
        contexts = rng.integers(0, vocab, n_pairs).astype(np.int64)
        negatives = rng.integers(0, vocab, n_pairs * n_neg).astype(np.int64)

        in_pure, out_pure = w_in.copy(), w_out.copy()
        in_fast, out_fast = w_in.copy(), w_out.copy()
        loss_pure = _pure.sgns_train_chunk(in_pure, out_pure, centers,
                                           contexts, negatives, n_neg,
                                           0.025, 1e-4, 0, n_pairs)
        loss_fast = _speedups.sgns_train_chunk(in_fast, out_fast, centers,
                                               contexts, negatives, n_neg,
                                               0.025, 1e-4, 0, n_pairs)
        assert loss_pure == pytest.approx(loss_fast, rel=1e-10)
        np.testing.assert_allclose(in_pure, in_fast, atol=1e-12)
        np.testing.assert_allclose(out_pure, out_fast, atol=1e-12)


class TestPureKernel:
    def test_walk_deterministic(self):
        indptr, indices, weights = ring_csr()
        a = _pure.random_walk(indptr, indices, weights, 0, 25, 1.0, 1.0, 9)
        b = _pure.random_walk(indptr, indices, weights, 0, 25, 1.0, 1.0, 9)
        assert a == b

    def test_walk_respects_adjacency(self):
        indptr, indices, weights = ring_csr()
        walk = _pure.random_walk(indptr, indices, weights, 3, 30, 0.5, 2.0, 4)
        for cur, nxt in zip(walk, walk[1:]):
            row = indices[indptr[cur]:indptr[cur + 1]]
            assert nxt in row
