import numpy as np
import pytest

from topcite.embeddings import (FeatureMatrix, assemble_features,
                                load_features, save_features)


def node_matrix(n=4, dim=8, seed=0):
    rng = np.random.default_rng(seed)
    return FeatureMatrix(ids=tuple(f"p{i}" for i in range(n)),
                         rows=rng.normal(size=(n, dim)))


def text_map(ids, dim=16, seed=1):
    rng = np.random.default_rng(seed)
    return {pid: rng.normal(size=dim) for pid in ids}


class TestAssemble:
    def test_concat_dimension(self):
        node = node_matrix(dim=8)
        text = text_map(node.ids, dim=16)
        combined = assemble_features(node, text, "n2v_te3")
        assert combined.dimension == 24

    def test_structural_part_comes_first(self):
        node = node_matrix()
        text = text_map(node.ids)
        combined = assemble_features(node, text, "n2v_te3")
        assert np.array_equal(combined.rows[:, :8], node.rows)
        assert np.array_equal(combined.rows[2, 8:], text["p2"])

    def test_pure_modes(self):
        node = node_matrix()
        text = text_map(node.ids)
        assert assemble_features(node, text, "n2v").dimension == 8
        assert assemble_features(node, text, "te3").dimension == 16

    def test_missing_text_embedding_names_id(self):
        node = node_matrix()
        text = text_map(node.ids)
        del text["p1"]
        with pytest.raises(KeyError, match="p1"):
            assemble_features(node, text, "n2v_te3")

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="unknown feature mode"):
            assemble_features(node_matrix(), {}, "bert")

    def test_id_subset(self):
        node = node_matrix()
        text = text_map(node.ids)
        sub = assemble_features(node, text, "n2v_te3", ids=["p3", "p0"])
        assert sub.ids == ("p3", "p0")
        assert np.array_equal(sub.rows[0, :8], node.row("p3"))


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        fm = node_matrix(n=10, dim=5, seed=3)
        path = tmp_path / "emb.f64"
        save_features(fm, path)
        loaded = load_features(path)
        assert loaded.ids == fm.ids
        assert np.array_equal(loaded.rows, fm.rows)

    def test_header_and_sidecar(self, tmp_path):
        fm = node_matrix(n=3, dim=4)
        path = tmp_path / "emb.f64"
        save_features(fm, path)
        raw = path.read_bytes()
        assert len(raw) == 16 + 3 * 4 * 8
        assert (tmp_path / "emb.f64.ids").read_text().splitlines() == \
            list(fm.ids)

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "emb.f64"
        save_features(node_matrix(), path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError, match="expected"):
            load_features(path)
