"""Retrieval, temporal masking, and the end-to-end prompting run."""

from __future__ import annotations

import csv
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import CitationHistory, Corpus, Paper, round_half_up
from ..embeddings.text import cosine_similarity
from ..graph import PaperGraph
from ..labeling import LabelKey, LabelTable, accumulated_citations
from ..seeding import derive_seed
from .parsing import ResponseParseError, parse_response
from .prompts import NeighborContext, PromptConfig, build_prompt

log = logging.getLogger(__name__)

NEIGHBOR_ENCODINGS = ("indicator", "acc")


class RunAbortedError(RuntimeError):
    """Raised when the aggregate parse-failure rate exceeds the threshold."""


@dataclass(frozen=True)
class RetrievalConfig:
    strategy: str = "none"    # "none" | "random" | "top_similar"
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in ("none", "random", "top_similar"):
            raise ValueError(f"unknown retrieval strategy {self.strategy!r}")
        if self.strategy != "none" and self.k < 1:
            raise ValueError("k must be >= 1 when retrieving")


@dataclass(frozen=True)
class PredictionVector:
    target_id: str
    years: tuple[int, ...]
    probabilities: tuple[float, ...]
    parse_mode: str

    def __post_init__(self):
        if len(self.years) != len(self.probabilities):
            raise ValueError("years and probabilities lengths differ")


def sample_targets(graph: PaperGraph, fraction: float, seed: int,
                   count: int | None = None) -> list[str]:
    """Uniform sample of graph nodes without replacement.

    The sample size is round-half-up(fraction * n) unless an explicit count
    overrides it; both knobs exist because corpora differ in how the
    evaluation subset is specified.
    """
    if count is None:
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"fraction must be in (0, 1], got {fraction}")
        count = round_half_up(fraction * len(graph.nodes))
    if count > len(graph.nodes):
        raise ValueError(f"cannot sample {count} of {len(graph.nodes)} nodes")
    rng = np.random.default_rng(seed)
    nodes = sorted(graph.nodes)
    picked = rng.choice(len(nodes), size=count, replace=False)
    return sorted(nodes[i] for i in picked)


def retrieve_neighbors(graph: PaperGraph, target: str, rc: RetrievalConfig,
                       emb: dict[str, np.ndarray] | None = None) -> list[str]:
    """Pick up to k context papers from the target's graph neighborhood.

    Directed graphs use out-neighbors; undirected graphs the full
    neighborhood. random draws uniformly with a per-target derived seed;
    top_similar ranks by cosine similarity of text embeddings, ties broken
    by ascending id.
    """
    if target not in graph.nodes:
        raise KeyError(f"target {target!r} not in graph")
    if rc.strategy == "none":
        return []
    pool = graph.out_neighbors(target) if graph.spec.directed \
        else graph.neighborhood(target)
    if len(pool) <= rc.k:
        return pool
    if rc.strategy == "random":
        rng = np.random.default_rng(derive_seed(rc.seed, "retrieve", target))
        picked = rng.choice(len(pool), size=rc.k, replace=False)
        return sorted(pool[i] for i in picked)
    # top_similar
    if emb is None:
        raise ValueError("top_similar retrieval requires text embeddings")
    missing = [pid for pid in [target, *pool] if pid not in emb]
    if missing:
        raise KeyError(f"no text embedding for {missing[0]!r}")
    scored = sorted(pool, key=lambda pid:
                    (-cosine_similarity(emb[target], emb[pid]), pid))
    return scored[:rc.k]


def mask_neighbor_history(paper: Paper, history: CitationHistory,
                          target_pub_year: int,
                          labels: dict[LabelKey, LabelTable],
                          percentile: int = 20,
                          encoding: str = "indicator") -> NeighborContext:
    """Disclose only offsets observable at the target's publication time.

    encoding "indicator" reports the neighbor's historical top-paper flag
    (0.0/1.0) per disclosed offset; "acc" reports raw accumulated counts.
    """
    if paper.pub_year > target_pub_year:
        raise ValueError(
            f"temporal breach: neighbor {paper.id} published "
            f"{paper.pub_year}, after target year {target_pub_year}")
    if encoding not in NEIGHBOR_ENCODINGS:
        raise ValueError(f"unknown neighbor encoding {encoding!r}")
    offsets = tuple(range(target_pub_year - paper.pub_year + 1))
    values = []
    for off in offsets:
        if encoding == "acc":
            values.append(float(accumulated_citations(history, off)))
        else:
            table = labels.get(LabelKey(Y=off, P=percentile))
            if table is None or paper.id not in table.labels:
                raise KeyError(
                    f"no label for neighbor {paper.id!r} at Y={off} "
                    f"P={percentile}")
            values.append(1.0 if table.labels[paper.id] else 0.0)
    return NeighborContext(paper=paper, years=offsets,
                           y_acc_vector=tuple(values))


def _safe_filename(paper_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", paper_id)


@dataclass
class RunRecord:
    target_id: str
    latency_s: float
    parse_mode: str | None    # None when the target failed
    error: str | None = None
    retried: bool = False


def run_graphrag(corpus: Corpus, graph: PaperGraph, rc: RetrievalConfig,
                 targets: list[str], client,
                 labels: dict[LabelKey, LabelTable], percentile: int = 20,
                 emb: dict[str, np.ndarray] | None = None,
                 neighbor_encoding: str = "indicator",
                 max_horizon: int = 10, workers: int = 1,
                 audit_dir: str | Path | None = None,
                 failure_threshold: float = 0.5,
                 ) -> tuple[list[PredictionVector], list[RunRecord]]:
    """One LLM request per target, strict parsing with one retry, full audit.

    Horizons per target run from 0 to the observability limit (capped at
    max_horizon). Failed parses are retried once against the client and then
    recorded as missing. Results are ordered by target id regardless of the
    worker pool schedule. Raises RunAbortedError if the failure rate exceeds
    failure_threshold.
    """
    if audit_dir is not None:
        audit_dir = Path(audit_dir)
        audit_dir.mkdir(parents=True, exist_ok=True)

    cfg = PromptConfig(
        graph_name=graph.spec.kind if graph.spec.kind == "citation"
        else f"similarity_k{graph.spec.k}",
        retrieval_type=rc.strategy, k_neighbors=rc.k,
        is_directed=graph.spec.directed, is_weighted=graph.spec.weighted,
        q_value=1.0 - percentile / 100.0)

    def process(target_id: str) -> tuple[PredictionVector | None, RunRecord]:
        start = time.perf_counter()
        target = corpus.papers[target_id]
        horizons = list(range(
            min(corpus.max_data_year - target.pub_year, max_horizon) + 1))
        neighbor_ids = retrieve_neighbors(graph, target_id, rc, emb=emb)
        contexts = [
            mask_neighbor_history(corpus.papers[nid], corpus.histories[nid],
                                  target.pub_year, labels,
                                  percentile=percentile,
                                  encoding=neighbor_encoding)
            for nid in neighbor_ids]
        bundle = build_prompt(cfg, target, horizons, corpus.max_data_year,
                              neighbors=contexts)

        response = client.complete(bundle)
        retried = False
        try:
            parsed = parse_response(response, bundle.n_years)
        except ResponseParseError as first_error:
            retried = True
            log.warning("parse failed for %s (%s: %s), retrying once",
                        target_id, first_error.kind, first_error)
            response = client.complete(bundle)
            try:
                parsed = parse_response(response, bundle.n_years)
            except ResponseParseError as exc:
                record = RunRecord(target_id=target_id,
                                   latency_s=time.perf_counter() - start,
                                   parse_mode=None, retried=True,
                                   error=f"{exc.kind}: {exc}")
                _write_audit(audit_dir, target_id, bundle, response)
                return None, record
        _write_audit(audit_dir, target_id, bundle, response)
        vector = PredictionVector(target_id=target_id, years=tuple(horizons),
                                  probabilities=parsed.probabilities,
                                  parse_mode=parsed.parse_mode)
        return vector, RunRecord(target_id=target_id,
                                 latency_s=time.perf_counter() - start,
                                 parse_mode=parsed.parse_mode,
                                 retried=retried)

    ordered = sorted(targets)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(process, ordered))
    else:
        outcomes = [process(t) for t in ordered]

    results = [vec for vec, _ in outcomes if vec is not None]
    records = [rec for _, rec in outcomes]
    failures = sum(1 for vec, _ in outcomes if vec is None)
    if ordered and failures / len(ordered) > failure_threshold:
        raise RunAbortedError(
            f"{failures}/{len(ordered)} targets failed to parse, above the "
            f"{failure_threshold:.0%} threshold")
    return results, records


def _write_audit(audit_dir: Path | None, target_id: str, bundle,
                 response: str) -> None:
    if audit_dir is None:
        return
    stem = _safe_filename(target_id)
    (audit_dir / f"{stem}.system.txt").write_text(bundle.system,
                                                  encoding="utf-8")
    (audit_dir / f"{stem}.developer.txt").write_text(bundle.developer,
                                                     encoding="utf-8")
    (audit_dir / f"{stem}.user.xml").write_text(bundle.user, encoding="utf-8")
    (audit_dir / f"{stem}.response.json").write_text(response,
                                                     encoding="utf-8")


def write_predictions_csv(results: list[PredictionVector],
                          path: str | Path) -> None:
    """CSV rows target_id,Y,probability,parse_mode, ordered by (id, Y)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["target_id", "Y", "probability", "parse_mode"])
        for vec in sorted(results, key=lambda v: v.target_id):
            for year, prob in zip(vec.years, vec.probabilities):
                writer.writerow([vec.target_id, year, prob, vec.parse_mode])


def load_predictions_csv(path: str | Path) -> list[tuple[str, int, float]]:
    """(target_id, Y, probability) triples for horizon_report."""
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            rows.append((row["target_id"], int(row["Y"]),
                         float(row["probability"])))
    return rows
