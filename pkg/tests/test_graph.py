import numpy as np
import pytest

from conftest import make_corpus
from oracles import cosine_oracle, topk_similarity_oracle
from topcite.corpus import generate_synthetic_corpus
from topcite.embeddings import HashingEmbeddingProvider
from topcite.graph import (GraphFormatError, GraphSpec, PaperGraph,
                           all_graph_specs, build_citation_graph,
                           build_similarity_graph,
                           check_temporal_consistency, load_graph,
                           save_graph)


def hash_vectors(corpus, dimension=32):
    provider = HashingEmbeddingProvider(dimension=dimension)
    return {pid: provider.embed_batch([p.abstract])[0]
            for pid, p in corpus.papers.items()}


def random_vector_corpus(n=20, dim=8, seed=0, years=(2010, 2011, 2012)):
    rng = np.random.default_rng(seed)
    corpus = make_corpus([(i, years[i % len(years)]) for i in range(n)])
    ids = sorted(corpus.papers)
    emb = {pid: rng.normal(size=dim) for pid in ids}
    return corpus, emb


class TestGraphSpec:
    def test_similarity_requires_k(self):
        with pytest.raises(ValueError):
            GraphSpec("similarity", directed=True, weighted=False)

    def test_citation_takes_no_k(self):
        with pytest.raises(ValueError):
            GraphSpec("citation", directed=True, weighted=False, k=5)

    def test_label(self):
        spec = GraphSpec("similarity", directed=False, weighted=True, k=5)
        assert spec.label() == "similarity_k5_undirected_weighted"

    def test_variant_grid_size(self):
        assert len(all_graph_specs()) == 4 + 4 * 4


class TestCitationGraph:
    def test_single_directed_edge(self):
        corpus = make_corpus([(0, 2016), (1, 2015)], citations=[(0, 1)])
        g = build_citation_graph(
            corpus, GraphSpec("citation", directed=True, weighted=False))
        assert g.edges == (("10.1000/test.0000", "10.1000/test.0001", 1.0),)

    def test_undirected_canonical_order(self):
        corpus = make_corpus([(0, 2016), (1, 2015)], citations=[(1, 0)])
        g = build_citation_graph(
            corpus, GraphSpec("citation", directed=False, weighted=False))
        # stored with src < dst even though the citation ran the other way
        assert g.edges == (("10.1000/test.0000", "10.1000/test.0001", 1.0),)

    def test_weighted_edges_match_cosine_oracle(self, small_synth_corpus):
        emb = hash_vectors(small_synth_corpus)
        g = build_citation_graph(
            small_synth_corpus,
            GraphSpec("citation", directed=True, weighted=True), emb=emb)
        assert g.edges
        for src, dst, w in g.edges:
            assert w == pytest.approx(cosine_oracle(emb[src], emb[dst]),
                                      abs=1e-12)

    def test_weighted_without_embeddings_rejected(self):
        corpus = make_corpus([(0, 2016), (1, 2015)], citations=[(0, 1)])
        with pytest.raises(ValueError, match="requires text embeddings"):
            build_citation_graph(
                corpus, GraphSpec("citation", directed=True, weighted=True))

    def test_weighted_with_missing_endpoint_embedding(self):
        corpus = make_corpus([(0, 2016), (1, 2015)], citations=[(0, 1)])
        emb = {"10.1000/test.0000": np.ones(4)}
        with pytest.raises(ValueError, match="test.0001"):
            build_citation_graph(
                corpus, GraphSpec("citation", directed=True, weighted=True),
                emb=emb)

    def test_cross_journal_excluded(self):
        from dataclasses import replace
        corpus = make_corpus([(0, 2016), (1, 2015)], citations=[(0, 1)])
        cited = corpus.papers["10.1000/test.0001"]
        corpus.papers["10.1000/test.0001"] = replace(cited,
                                                     journal="other-journal")
        g = build_citation_graph(
            corpus, GraphSpec("citation", directed=True, weighted=False))
        assert g.edges == ()


class TestSimilarityGraph:
    def spec(self, k=5, directed=True, weighted=False):
        return GraphSpec("similarity", directed=directed, weighted=weighted,
                         k=k)

    def test_first_year_loner_has_no_out_edges(self):
        corpus = make_corpus([(0, 2009), (1, 2012), (2, 2012)])
        emb = {pid: np.ones(4) + i
               for i, pid in enumerate(sorted(corpus.papers))}
        g = build_similarity_graph(corpus, emb, self.spec(k=2))
        out = [e for e in g.edges if e[0] == "10.1000/test.0000"]
        assert out == []

    def test_few_candidates_clamped(self):
        corpus = make_corpus([(i, 2012) for i in range(4)])
        rng = np.random.default_rng(1)
        emb = {pid: rng.normal(size=6) for pid in corpus.papers}
        g = build_similarity_graph(corpus, emb, self.spec(k=9))
        for pid in corpus.papers:
            out_degree = sum(1 for e in g.edges if e[0] == pid)
            assert out_degree == 3

    def test_matches_bruteforce_oracle(self):
        corpus, emb = random_vector_corpus(n=20, dim=8, seed=0)
        ids = sorted(corpus.papers)
        years = [corpus.papers[pid].pub_year for pid in ids]
        for k in (3, 5, 7, 9):
            g = build_similarity_graph(corpus, emb, self.spec(k=k))
            got = {(src, dst) for src, dst, _ in g.edges}
            expected = topk_similarity_oracle(
                ids, years, [emb[pid] for pid in ids], k)
            assert got == expected

    def test_out_degree_bound_invariant(self):
        corpus, emb = random_vector_corpus(n=30, dim=5, seed=3)
        g = build_similarity_graph(corpus, emb, self.spec(k=4))
        ids = sorted(corpus.papers)
        years = {pid: corpus.papers[pid].pub_year for pid in ids}
        for pid in ids:
            feasible = sum(1 for other in ids
                           if other != pid and years[other] <= years[pid])
            out_degree = sum(1 for e in g.edges if e[0] == pid)
            assert out_degree == min(4, feasible)

    def test_weights_in_range(self):
        corpus, emb = random_vector_corpus(n=15, dim=4, seed=5)
        g = build_similarity_graph(corpus, emb,
                                   self.spec(k=3, weighted=True))
        for _, _, w in g.edges:
            assert np.isfinite(w) and -1.0 <= w <= 1.0

    def test_deterministic(self):
        corpus, emb = random_vector_corpus(n=25, dim=6, seed=7)
        g1 = build_similarity_graph(corpus, emb, self.spec(k=3))
        g2 = build_similarity_graph(corpus, emb, self.spec(k=3))
        assert g1.edges == g2.edges

    def test_empty_embedding_map_rejected(self):
        corpus = make_corpus([(0, 2012)])
        with pytest.raises(ValueError, match="empty embedding map"):
            build_similarity_graph(corpus, {}, self.spec())


class TestTemporalConsistency:
    def test_hand_built_violation(self):
        corpus = make_corpus([(0, 2010), (1, 2012)])
        g = PaperGraph(
            spec=GraphSpec("citation", directed=True, weighted=False),
            nodes=tuple(sorted(corpus.papers)),
            edges=(("10.1000/test.0000", "10.1000/test.0001", 1.0),))
        assert len(check_temporal_consistency(g, corpus)) == 1

    def test_builder_outputs_clean(self, small_synth_corpus):
        emb = hash_vectors(small_synth_corpus)
        for spec in all_graph_specs(similarity_k=(3,)):
            if spec.kind == "citation":
                g = build_citation_graph(small_synth_corpus, spec, emb=emb)
            else:
                g = build_similarity_graph(small_synth_corpus, emb, spec)
            assert check_temporal_consistency(g, small_synth_corpus) == []

    def test_injected_violations_counted(self):
        rng = np.random.default_rng(8)
        corpus = make_corpus([(i, 2010 + i % 8) for i in range(40)])
        ids = sorted(corpus.papers)
        years = {pid: corpus.papers[pid].pub_year for pid in ids}
        for trial in range(10):
            edges = []
            injected = 0
            for _ in range(60):
                a, b = rng.choice(len(ids), size=2, replace=False)
                src, dst = ids[a], ids[b]
                if any(e[0] == src and e[1] == dst for e in edges):
                    continue
                edges.append((src, dst, 1.0))
                if years[dst] > years[src]:
                    injected += 1
            g = PaperGraph(
                spec=GraphSpec("citation", directed=True, weighted=False),
                nodes=tuple(ids), edges=tuple(edges))
            assert len(check_temporal_consistency(g, corpus)) == injected

    def test_unknown_endpoint_flagged(self):
        corpus = make_corpus([(0, 2010)])
        g = PaperGraph(
            spec=GraphSpec("citation", directed=True, weighted=False),
            nodes=("10.1000/test.0000", "ghost"),
            edges=(("10.1000/test.0000", "ghost", 1.0),))
        assert len(check_temporal_consistency(g, corpus)) == 1


class TestGraphSerialization:
    def test_round_trip_builder_output(self, tmp_path, small_synth_corpus):
        emb = hash_vectors(small_synth_corpus)
        spec = GraphSpec("similarity", directed=True, weighted=True, k=5)
        g = build_similarity_graph(small_synth_corpus, emb, spec)
        path = tmp_path / "g.csv"
        save_graph(g, path)
        loaded = load_graph(path)
        assert loaded.spec == g.spec
        assert loaded.edges == g.edges

    def test_nan_weight_rejected(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("citation,1,0,\na,b,NaN\n")
        with pytest.raises(GraphFormatError, match="non-finite"):
            load_graph(path)

    def test_malformed_edge_rejected(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("citation,1,0,\na,b\n")
        with pytest.raises(GraphFormatError, match="line 2"):
            load_graph(path)

    def test_10k_edges_byte_identical_reserialization(self, tmp_path):
        rng = np.random.default_rng(10)
        edges = []
        seen = set()
        while len(edges) < 10000:
            a, b = rng.integers(0, 2000, size=2)
            if a == b or (a, b) in seen:
                continue
            seen.add((a, b))
            edges.append((f"n{a:05d}", f"n{b:05d}",
                          float(rng.normal())))
        g = PaperGraph(
            spec=GraphSpec("citation", directed=True, weighted=True),
            nodes=tuple(sorted({x for e in edges for x in e[:2]})),
            edges=tuple(edges))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        save_graph(g, p1)
        save_graph(load_graph(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()
