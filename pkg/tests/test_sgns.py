import numpy as np
import pytest

from topcite.embeddings import (SgnsParams, WalkParams, generate_walks,
                                sgns_pair_gradients, sgns_pair_loss,
                                train_sgns, train_sgns_verbose)
from topcite.embeddings.text import cosine_similarity
from topcite.graph import GraphSpec, PaperGraph


def two_clique_graph():
    """Two 10-cliques joined by one bridge edge."""
    nodes = [f"a{i}" for i in range(10)] + [f"b{i}" for i in range(10)]
    edges = []
    for group in ("a", "b"):
        for i in range(10):
            for j in range(i + 1, 10):
                edges.append((f"{group}{i}", f"{group}{j}", 1.0))
    edges.append(("a0", "b0", 1.0))
    return PaperGraph(
        spec=GraphSpec("citation", directed=False, weighted=False),
        nodes=tuple(sorted(nodes)), edges=tuple(sorted(edges)))


def clique_walks(seed=0):
    return generate_walks(two_clique_graph(),
                          WalkParams(num_walks_per_node=8, walk_length=20,
                                     seed=seed))


FAST = SgnsParams(dimension=32, window=4, epochs=2, seed=1)


class TestTrainSgns:
    def test_default_dimension_is_256(self):
        walks = clique_walks()
        features = train_sgns(walks, SgnsParams(epochs=1, window=3, seed=0))
        assert features.rows.shape == (20, 256)

    def test_every_walked_node_gets_a_row(self):
        walks = clique_walks()
        features = train_sgns(walks, FAST)
        walked = {n for w in walks for n in w}
        assert set(features.ids) == walked

    def test_empty_walks_rejected(self):
        with pytest.raises(ValueError, match="empty walk set"):
            train_sgns([], FAST)

    def test_all_singleton_walks_rejected(self):
        with pytest.raises(ValueError, match="no training pairs"):
            train_sgns([["a"], ["b"]], FAST)

    def test_loss_decreases_over_first_epoch(self):
        _, losses = train_sgns_verbose(clique_walks(), FAST)
        assert losses[1] < losses[0]

    def test_deterministic(self):
        walks = clique_walks()
        f1 = train_sgns(walks, FAST)
        f2 = train_sgns(walks, FAST)
        assert np.array_equal(f1.rows, f2.rows)

    def test_seed_changes_result(self):
        walks = clique_walks()
        f1 = train_sgns(walks, FAST)
        f2 = train_sgns(walks, SgnsParams(dimension=32, window=4, epochs=2,
                                          seed=2))
        assert not np.array_equal(f1.rows, f2.rows)

    def test_communities_separate_in_cosine(self):
        features = train_sgns(clique_walks(), SgnsParams(
            dimension=32, window=5, epochs=5, seed=3))
        idx = features.index()
        rows = features.rows
        intra, inter = [], []
        ids = list(features.ids)
        for i, u in enumerate(ids):
            for v in ids[i + 1:]:
                sim = cosine_similarity(rows[idx[u]], rows[idx[v]])
                (intra if u[0] == v[0] else inter).append(sim)
        assert np.mean(intra) > np.mean(inter)


class TestGradients:
    def test_matches_central_differences(self):
        # 5-node toy problem: one center vs 1 positive + 3 negatives
        rng = np.random.default_rng(42)
        dim = 7
        center = rng.normal(size=dim) * 0.5
        targets = rng.normal(size=(4, dim)) * 0.5
        labels = np.array([1.0, 0.0, 0.0, 0.0])

        grad_c, grad_t = sgns_pair_gradients(center, targets, labels)
        eps = 1e-6

        def rel_err(analytic, numeric):
            return abs(analytic - numeric) / max(abs(numeric), 1e-8)

        for i in range(dim):
            bumped = center.copy()
            bumped[i] += eps
            up = sgns_pair_loss(bumped, targets, labels)
            bumped[i] -= 2 * eps
            down = sgns_pair_loss(bumped, targets, labels)
            assert rel_err(grad_c[i], (up - down) / (2 * eps)) <= 1e-4

        for k in range(targets.shape[0]):
            for i in range(dim):
                bumped = targets.copy()
                bumped[k, i] += eps
                up = sgns_pair_loss(center, bumped, labels)
                bumped[k, i] -= 2 * eps
                down = sgns_pair_loss(center, bumped, labels)
                assert rel_err(grad_t[k, i], (up - down) / (2 * eps)) <= 1e-4
