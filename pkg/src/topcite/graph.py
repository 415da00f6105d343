"""Citation and textual-similarity paper graphs.

Both builders enforce temporal consistency: no edge may point from a paper
to one published in a later year. Similarity graphs link each paper to its
top-K most cosine-similar peers among papers published in the same or an
earlier year, with exact (non-approximate) all-pairs ranking.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus

log = logging.getLogger(__name__)

DEFAULT_SIMILARITY_K = (3, 5, 7, 9)


class GraphFormatError(ValueError):
    """Raised when a graph file cannot be parsed."""


@dataclass(frozen=True)
class GraphSpec:
    kind: str             # "citation" | "similarity"
    directed: bool
    weighted: bool
    k: int | None = None  # neighbor count, similarity graphs only

    def __post_init__(self):
        if self.kind not in ("citation", "similarity"):
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.kind == "similarity":
            if self.k is None or self.k < 1:
                raise ValueError("similarity graphs need k >= 1")
        elif self.k is not None:
            raise ValueError("citation graphs take no k")

    def label(self) -> str:
        name = self.kind if self.kind == "citation" else f"similarity_k{self.k}"
        direction = "directed" if self.directed else "undirected"
        weighting = "weighted" if self.weighted else "unweighted"
        return f"{name}_{direction}_{weighting}"


@dataclass(frozen=True)
class PaperGraph:
    spec: GraphSpec
    nodes: tuple[str, ...]                       # sorted paper ids
    edges: tuple[tuple[str, str, float], ...]    # sorted by (src, dst)

    def out_neighbors(self, node: str) -> list[str]:
        if self.spec.directed:
            return sorted(dst for src, dst, _ in self.edges if src == node)
        return self.neighborhood(node)

    def neighborhood(self, node: str) -> list[str]:
        """All neighbors regardless of stored orientation."""
        out = {dst for src, dst, _ in self.edges if src == node}
        out |= {src for src, dst, _ in self.edges if dst == node}
        return sorted(out)


def _normalized_rows(emb: dict[str, np.ndarray],
                     ids: list[str]) -> np.ndarray:
    mat = np.stack([np.asarray(emb[pid], dtype=np.float64) for pid in ids])
    norms = np.linalg.norm(mat, axis=1)
    bad = np.where(norms == 0.0)[0]
    if bad.size:
        raise ValueError(f"zero-norm embedding for id {ids[bad[0]]!r}")
    return mat / norms[:, None]


def _finalize(spec: GraphSpec, nodes: set[str],
              edges: dict[tuple[str, str], float]) -> PaperGraph:
    """Canonicalize: undirected pairs stored once with src < dst, edge list
    sorted by (src, dst)."""
    if not spec.directed:
        merged: dict[tuple[str, str], float] = {}
        for (a, b), w in edges.items():
            key = (a, b) if a < b else (b, a)
            if key in merged and not math.isclose(merged[key], w,
                                                  rel_tol=0, abs_tol=1e-9):
                raise ValueError(f"asymmetric weights for pair {key}")
            merged.setdefault(key, w)
        edges = merged
    ordered = tuple((src, dst, float(w))
                    for (src, dst), w in sorted(edges.items()))
    return PaperGraph(spec=spec, nodes=tuple(sorted(nodes)), edges=ordered)


def build_citation_graph(corpus: Corpus, spec: GraphSpec,
                         emb: dict[str, np.ndarray] | None = None,
                         ) -> PaperGraph:
    """One edge per within-journal citation pair.

    Weighted variants use the cosine similarity of the endpoints' text
    embeddings as the edge weight, so `emb` is required then.
    """
    if spec.kind != "citation":
        raise ValueError(f"expected a citation spec, got {spec.kind!r}")
    if spec.weighted and emb is None:
        raise ValueError("weighted citation graph requires text embeddings")

    pair_ids = sorted({pid for pair in corpus.citations for pid in pair})
    unit = {}
    if spec.weighted:
        missing = [pid for pid in pair_ids if pid not in emb]
        if missing:
            raise ValueError(f"no text embedding for id {missing[0]!r} "
                             f"({len(missing)} missing in total)")
        mat = _normalized_rows(emb, pair_ids)
        unit = {pid: mat[i] for i, pid in enumerate(pair_ids)}

    edges: dict[tuple[str, str], float] = {}
    for citing, cited in sorted(corpus.citations):
        if citing == cited:
            continue
        if corpus.papers[citing].journal != corpus.papers[cited].journal:
            continue
        if spec.weighted:
            w = float(np.dot(unit[citing], unit[cited]))
            w = min(1.0, max(-1.0, w))
        else:
            w = 1.0
        edges[(citing, cited)] = w
    return _finalize(spec, set(corpus.papers), edges)


def build_similarity_graph(corpus: Corpus, emb: dict[str, np.ndarray],
                           spec: GraphSpec) -> PaperGraph:
    """Link each paper to its top-K most similar same-or-earlier-year papers.

    Exact all-pairs cosine ranking (blocked matrix products), ties broken by
    ascending paper id; papers with fewer than K temporally feasible
    candidates link to all of them. Only papers present in `emb` take part.
    """
    if spec.kind != "similarity":
        raise ValueError(f"expected a similarity spec, got {spec.kind!r}")
    if not emb:
        raise ValueError("empty embedding map")

    ids = sorted(pid for pid in corpus.papers if pid in emb)
    if not ids:
        raise ValueError("no corpus paper has an embedding")
    unit = _normalized_rows(emb, ids)
    years = np.array([corpus.papers[pid].pub_year for pid in ids])

    edges: dict[tuple[str, str], float] = {}
    for year in np.unique(years):
        src_idx = np.where(years == year)[0]
        pool_idx = np.where(years <= year)[0]   # ascending-id order
        sims = unit[src_idx] @ unit[pool_idx].T
        for row, i in enumerate(src_idx):
            self_pos = np.searchsorted(pool_idx, i)
            row_sims = sims[row].copy()
            row_sims[self_pos] = -np.inf
            # stable sort on descending similarity = ties by ascending id
            order = np.argsort(-row_sims, kind="mergesort")
            take = min(spec.k, pool_idx.size - 1)
            src = ids[i]
            for j in order[:take]:
                dst = ids[pool_idx[j]]
                w = min(1.0, max(-1.0, float(row_sims[j]))) \
                    if spec.weighted else 1.0
                edges[(src, dst)] = w
    return _finalize(spec, set(ids), edges)


def check_temporal_consistency(graph: PaperGraph,
                               corpus: Corpus) -> list[tuple[str, str, float]]:
    """Edges that reference unknown papers or point at a later paper.

    For undirected graphs orientation is meaningless, so only endpoint
    membership is checked.
    """
    bad = []
    for src, dst, w in graph.edges:
        if src not in corpus.papers or dst not in corpus.papers:
            bad.append((src, dst, w))
            continue
        if graph.spec.directed and \
                corpus.papers[dst].pub_year > corpus.papers[src].pub_year:
            bad.append((src, dst, w))
    return bad


def save_graph(graph: PaperGraph, path: str | Path) -> None:
    """Header line `kind,directed,weighted,K` then CSV rows src,dst,weight."""
    with open(path, "w", encoding="utf-8") as f:
        k = "" if graph.spec.k is None else str(graph.spec.k)
        f.write(f"{graph.spec.kind},{int(graph.spec.directed)},"
                f"{int(graph.spec.weighted)},{k}\n")
        for src, dst, w in graph.edges:
            f.write(f"{src},{dst},{w!r}\n")


def load_graph(path: str | Path) -> PaperGraph:
    """Inverse of save_graph. Nodes are reconstructed from edge endpoints
    (isolated nodes are not part of the file format)."""
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        parts = header.split(",")
        if len(parts) != 4:
            raise GraphFormatError(f"bad header {header!r}")
        kind, directed, weighted, k = parts
        try:
            spec = GraphSpec(kind=kind, directed=bool(int(directed)),
                             weighted=bool(int(weighted)),
                             k=int(k) if k else None)
        except ValueError as exc:
            raise GraphFormatError(f"bad header {header!r}: {exc}") from exc
        edges = []
        nodes: set[str] = set()
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise GraphFormatError(f"line {lineno}: bad edge {line!r}")
            src, dst, w_raw = fields
            try:
                w = float(w_raw)
            except ValueError as exc:
                raise GraphFormatError(
                    f"line {lineno}: bad weight {w_raw!r}") from exc
            if not math.isfinite(w):
                raise GraphFormatError(
                    f"line {lineno}: non-finite weight {w_raw!r}")
            edges.append((src, dst, w))
            nodes.add(src)
            nodes.add(dst)
    return PaperGraph(spec=spec, nodes=tuple(sorted(nodes)),
                      edges=tuple(edges))


def all_graph_specs(similarity_k: tuple[int, ...] = DEFAULT_SIMILARITY_K,
                    ) -> list[GraphSpec]:
    """The full variant grid: 4 citation + 4 per similarity K."""
    specs = [GraphSpec("citation", directed=d, weighted=w)
             for d in (True, False) for w in (True, False)]
    for k in similarity_k:
        specs += [GraphSpec("similarity", directed=d, weighted=w, k=k)
                  for d in (True, False) for w in (True, False)]
    return specs


__all__ = [
    "GraphSpec", "PaperGraph", "GraphFormatError", "build_citation_graph",
    "build_similarity_graph", "check_temporal_consistency", "save_graph",
    "load_graph", "all_graph_specs", "DEFAULT_SIMILARITY_K",
]
