"""Command-line front end orchestrating the pipeline.

Stages (in dependency order):

    synth        generate a synthetic corpus at the configured corpus path
    validate     corpus invariant check -> validation_report.csv
    label        cohort-percentile labels -> labels.csv
    embed-text   text embeddings -> text_embeddings.jsonl (cache)
    build-graph  graph variants -> graph_<label>.csv
    embed-nodes  walks + skip-gram -> walks_<label>.txt, node_emb_<label>.f64
    train        balanced-resampling grid -> grid_report.csv (+ aggregate)
    rag          LLM prompting run -> predictions.csv, rag_log.csv, audit/
    report       horizon-by-horizon AUC -> horizon_report.csv, plot_data.csv

Every stage is driven by one JSON run-configuration file (--config); the
--seed/--out/--workers flags override the file. Each stage writes a
manifest (config snapshot, input digests, seeds, wall time) next to its
outputs and is skipped byte-identically when inputs are unchanged.
Secrets (provider API keys) come from environment variables only:
TOPCITE_EMBED_API_KEY and TOPCITE_LLM_API_KEY.

Config file schema (defaults apply when a key is absent):

    {
      "corpus": "corpus.jsonl",            // path, required
      "journal": "synthetic-journal",      // cohort journal, required
      "out_dir": "runs/demo",
      "seed": 7,
      "workers": 1,
      "synth": {"n": 300, "params": {...SynthParams fields...}},
      "labels": {"horizons": [0,1,...], "percentiles": [10,...,50]},
      "graphs": [{"kind": "citation", "directed": true, "weighted": false},
                 {"kind": "similarity", "directed": true,
                  "weighted": false, "k": 5}],
      "modes": ["n2v", "te3", "n2v_te3"],
      "text_embedding": {"provider": "hash" | "remote",
                          "model_id": "...", "dimension": 256,
                          "endpoint": "https://...", "batch_size": 64},
      "walks": {...WalkParams fields...},
      "sgns": {...SgnsParams fields...},
      "mlp": {...MlpConfig fields...},
      "grid": {"repetitions": 10, "eval_split": "validation",
               "keys": [{"Y": 5, "P": 20}]},
      "rag": {"graph": {...graph spec...},
              "strategy": "none" | "random" | "top_similar", "k": 5,
              "fraction": 0.1, "count": null, "percentile": 20,
              "neighbor_encoding": "indicator", "max_horizon": 10,
              "failure_threshold": 0.5,
              "client": {"kind": "mock" | "remote", "mode": "hash" | "oracle",
                          "endpoint": "https://...", "model": "...",
                          "options": {}}}
    }
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from . import _kernels
from .classifier import (MlpConfig, aggregate_grid_report,
                         run_experiment_grid)
from .corpus import (Corpus, SynthParams, generate_synthetic_corpus,
                     load_corpus, save_corpus, validate_corpus)
from .embeddings import (EmbeddingCache, FeatureMatrix,
                         HashingEmbeddingProvider, HttpEmbeddingProvider,
                         SgnsParams, TextEmbedding, WalkParams,
                         assemble_features, embedding_vectors,
                         fetch_text_embeddings, generate_walks,
                         load_features, save_features, save_walks,
                         train_sgns)
from .graph import (GraphSpec, build_citation_graph, build_similarity_graph,
                    load_graph, save_graph)
from .graphrag import (MockLlmClient, RemoteLlmClient, RetrievalConfig,
                       load_predictions_csv, run_graphrag, sample_targets,
                       write_predictions_csv)
from .labeling import (DEFAULT_HORIZONS, DEFAULT_PERCENTILES, LabelKey,
                       export_labels, label_grid)
from .metrics import horizon_report, write_plot_data

log = logging.getLogger("topcite")


class CliError(RuntimeError):
    """User-facing stage failure; message already explains the fix."""


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

class RunConfig:
    """The declarative run configuration plus path helpers."""

    def __init__(self, data: dict, config_dir: Path):
        if "corpus" not in data or "journal" not in data:
            raise CliError("config must define 'corpus' and 'journal'")
        self.data = data
        self._dir = config_dir

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise CliError(f"config file {path} does not exist")
        with open(path, encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise CliError(f"{path}: invalid JSON ({exc})") from exc
        return cls(data, path.parent)

    def _resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self._dir / path

    @property
    def corpus_path(self) -> Path:
        return self._resolve(self.data["corpus"])

    @property
    def journal(self) -> str:
        return self.data["journal"]

    @property
    def out_dir(self) -> Path:
        return self._resolve(self.data.get("out_dir", "out"))

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def workers(self) -> int:
        return int(self.data.get("workers", 1))

    def label_keys(self) -> list[LabelKey]:
        grid = self.data.get("grid", {})
        if "keys" in grid:
            return [LabelKey(Y=int(k["Y"]), P=int(k["P"]))
                    for k in grid["keys"]]
        labels = self.data.get("labels", {})
        return [LabelKey(Y=y, P=p)
                for y in labels.get("horizons", DEFAULT_HORIZONS)
                for p in labels.get("percentiles", DEFAULT_PERCENTILES)]

    def graph_specs(self) -> list[GraphSpec]:
        specs = []
        for g in self.data.get("graphs",
                               [{"kind": "citation", "directed": True,
                                 "weighted": False}]):
            specs.append(GraphSpec(kind=g["kind"],
                                   directed=bool(g.get("directed", True)),
                                   weighted=bool(g.get("weighted", False)),
                                   k=g.get("k")))
        return specs

    def walk_params(self) -> WalkParams:
        return WalkParams(**{**self.data.get("walks", {}),
                             "seed": self.seed})

    def sgns_params(self) -> SgnsParams:
        return SgnsParams(**{**self.data.get("sgns", {}), "seed": self.seed})

    def mlp_config(self) -> MlpConfig:
        raw = dict(self.data.get("mlp", {}))
        if "hidden_sizes" in raw:
            raw["hidden_sizes"] = tuple(raw["hidden_sizes"])
        return MlpConfig(**{**raw, "seed": self.seed})

    def text_provider(self):
        te = self.data.get("text_embedding", {"provider": "hash"})
        if te.get("provider", "hash") == "hash":
            return HashingEmbeddingProvider(
                dimension=int(te.get("dimension", 256)),
                model_id=te.get("model_id", "hashing-v1"))
        if "endpoint" not in te:
            raise CliError("remote text_embedding config needs 'endpoint'")
        return HttpEmbeddingProvider(
            endpoint=te["endpoint"],
            model_id=te.get("model_id", "text-embedding-3-large"),
            dimension=int(te.get("dimension", 3072)))


# ---------------------------------------------------------------------------
# Manifests and idempotence
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class Stage:
    """Wraps one pipeline stage with manifest writing and cache skipping."""

    def __init__(self, name: str, cfg: RunConfig, inputs: list[Path],
                 outputs: list[Path]):
        self.name = name
        self.cfg = cfg
        self.inputs = inputs
        self.outputs = outputs
        self.manifest_path = cfg.out_dir / f"{name}.manifest.json"

    def require(self, path: Path, producer: str) -> Path:
        if not path.exists():
            raise CliError(
                f"{self.name}: missing upstream artifact {path}; "
                f"run `topcite {producer}` first")
        return path

    def _fingerprint(self) -> dict:
        return {
            "config": self.cfg.data,
            "inputs": {str(p): _sha256(p) for p in sorted(self.inputs)},
        }

    def cached(self) -> bool:
        if not self.manifest_path.exists():
            return False
        try:
            with open(self.manifest_path, encoding="utf-8") as f:
                previous = json.load(f)
        except (json.JSONDecodeError, OSError):
            return False
        current = self._fingerprint()
        if previous.get("config") != current["config"] or \
                previous.get("inputs") != current["inputs"]:
            return False
        return all(p.exists() for p in self.outputs)

    def write_manifest(self, wall_time_s: float, cache_hit: bool) -> None:
        manifest = self._fingerprint() | {
            "command": self.name,
            "seed": self.cfg.seed,
            "outputs": [str(p) for p in self.outputs],
            "output_digests": {str(p): _sha256(p) for p in self.outputs
                               if p.exists() and p.is_file()},
            "kernel_backend": _kernels.BACKEND,
            "wall_time_s": wall_time_s,
            "cache_hit": cache_hit,
        }
        with open(self.manifest_path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)

    def run(self, fn) -> None:
        self.cfg.out_dir.mkdir(parents=True, exist_ok=True)
        if self.cached():
            log.info("%s: inputs unchanged, keeping existing outputs",
                     self.name)
            self.write_manifest(0.0, cache_hit=True)
            return
        start = time.perf_counter()
        fn()
        self.write_manifest(time.perf_counter() - start, cache_hit=False)
        log.info("%s: done in %.2fs", self.name,
                 time.perf_counter() - start)


# ---------------------------------------------------------------------------
# Shared loaders
# ---------------------------------------------------------------------------

def _load_corpus(cfg: RunConfig, stage: str) -> Corpus:
    if not cfg.corpus_path.exists():
        raise CliError(f"{stage}: corpus file {cfg.corpus_path} not found; "
                       "run `topcite synth` or point 'corpus' at a JSONL file")
    return load_corpus(cfg.corpus_path)


def _text_cache_path(cfg: RunConfig) -> Path:
    return cfg.out_dir / "text_embeddings.jsonl"


def _load_text_vectors(cfg: RunConfig, corpus: Corpus, stage: str) -> dict:
    path = _text_cache_path(cfg)
    if not path.exists():
        raise CliError(f"{stage}: missing text embeddings {path}; "
                       "run `topcite embed-text` first")
    cache = EmbeddingCache(path)
    model_id = cfg.text_provider().model_id
    vectors = {}
    for pid in corpus.papers:
        vec = cache.get(pid, model_id)
        if vec is not None:
            vectors[pid] = vec
    return vectors


def _graph_path(cfg: RunConfig, spec: GraphSpec) -> Path:
    return cfg.out_dir / f"graph_{spec.label()}.csv"


def _needs_text(cfg: RunConfig) -> bool:
    specs = cfg.graph_specs()
    modes = cfg.data.get("modes", ["n2v"])
    return (any(s.weighted or s.kind == "similarity" for s in specs)
            or any(m in ("te3", "n2v_te3") for m in modes))


# ---------------------------------------------------------------------------
# Stage implementations
# ---------------------------------------------------------------------------

def cmd_synth(cfg: RunConfig) -> None:
    synth = cfg.data.get("synth", {})
    n = int(synth.get("n", 300))
    params = SynthParams(**synth.get("params", {}))
    stage = Stage("synth", cfg, inputs=[], outputs=[cfg.corpus_path])

    def body():
        corpus = generate_synthetic_corpus(n, cfg.seed, params)
        cfg.corpus_path.parent.mkdir(parents=True, exist_ok=True)
        save_corpus(corpus, cfg.corpus_path)
        log.info("synth: wrote %d papers to %s", len(corpus), cfg.corpus_path)
    stage.run(body)


def cmd_validate(cfg: RunConfig) -> None:
    out = cfg.out_dir / "validation_report.csv"
    stage = Stage("validate", cfg, inputs=[cfg.corpus_path], outputs=[out])
    stage.require(cfg.corpus_path, "synth")

    def body():
        corpus = _load_corpus(cfg, "validate")
        report = validate_corpus(corpus)
        report.to_csv(out)
        log.info("validate: %d violations -> %s",
                 len(report.violations), out)
    stage.run(body)


def cmd_label(cfg: RunConfig) -> None:
    out = cfg.out_dir / "labels.csv"
    stage = Stage("label", cfg, inputs=[cfg.corpus_path], outputs=[out])
    stage.require(cfg.corpus_path, "synth")

    def body():
        corpus = _load_corpus(cfg, "label")
        labels = cfg.data.get("labels", {})
        tables = label_grid(corpus, cfg.journal,
                            tuple(labels.get("horizons", DEFAULT_HORIZONS)),
                            tuple(labels.get("percentiles",
                                             DEFAULT_PERCENTILES)))
        export_labels(tables, out)
        log.info("label: %d tables -> %s", len(tables), out)
    stage.run(body)


def cmd_embed_text(cfg: RunConfig) -> None:
    out = _text_cache_path(cfg)
    stage = Stage("embed-text", cfg, inputs=[cfg.corpus_path], outputs=[out])
    stage.require(cfg.corpus_path, "synth")

    def body():
        corpus = _load_corpus(cfg, "embed-text")
        provider = cfg.text_provider()
        batch = int(cfg.data.get("text_embedding", {}).get("batch_size", 64))
        papers = [corpus.papers[pid] for pid in sorted(corpus.papers)]
        result = fetch_text_embeddings(provider, papers, out,
                                       batch_size=batch,
                                       workers=cfg.workers)
        log.info("embed-text: %d/%d papers embedded (%s)",
                 len(result), len(papers), provider.model_id)
    stage.run(body)


def cmd_build_graph(cfg: RunConfig) -> None:
    specs = cfg.graph_specs()
    rag_graph = cfg.data.get("rag", {}).get("graph")
    if rag_graph is not None:
        rag_spec = GraphSpec(kind=rag_graph["kind"],
                             directed=bool(rag_graph.get("directed", True)),
                             weighted=bool(rag_graph.get("weighted", False)),
                             k=rag_graph.get("k"))
        if rag_spec.label() not in {s.label() for s in specs}:
            specs.append(rag_spec)
    needs_text = any(s.weighted or s.kind == "similarity" for s in specs)
    inputs = [cfg.corpus_path]
    if needs_text:
        inputs.append(_text_cache_path(cfg))
    outputs = [_graph_path(cfg, s) for s in specs]
    stage = Stage("build-graph", cfg, inputs=inputs, outputs=outputs)
    stage.require(cfg.corpus_path, "synth")
    if needs_text:
        stage.require(_text_cache_path(cfg), "embed-text")

    def body():
        corpus = _load_corpus(cfg, "build-graph")
        vectors = _load_text_vectors(cfg, corpus, "build-graph") \
            if needs_text else None
        for spec in specs:
            if spec.kind == "citation":
                graph = build_citation_graph(corpus, spec, emb=vectors)
            else:
                graph = build_similarity_graph(corpus, vectors, spec)
            save_graph(graph, _graph_path(cfg, spec))
            log.info("build-graph: %s -> %d edges", spec.label(),
                     len(graph.edges))
    stage.run(body)


def cmd_embed_nodes(cfg: RunConfig) -> None:
    specs = cfg.graph_specs()
    graph_files = [_graph_path(cfg, s) for s in specs]
    outputs = []
    for spec in specs:
        outputs.append(cfg.out_dir / f"walks_{spec.label()}.txt")
        outputs.append(cfg.out_dir / f"node_emb_{spec.label()}.f64")
    stage = Stage("embed-nodes", cfg, inputs=[cfg.corpus_path, *graph_files],
                  outputs=outputs)
    for path in graph_files:
        stage.require(path, "build-graph")

    def body():
        from .seeding import derive_seed
        for spec in specs:
            graph = load_graph(_graph_path(cfg, spec))
            wp = cfg.walk_params()
            sp = cfg.sgns_params()
            spec_seed = derive_seed(cfg.seed, spec.label())
            walks = generate_walks(graph, WalkParams(
                num_walks_per_node=wp.num_walks_per_node,
                walk_length=wp.walk_length, p=wp.p, q=wp.q,
                seed=derive_seed(spec_seed, "walks")))
            save_walks(walks, cfg.out_dir / f"walks_{spec.label()}.txt")
            node_emb = train_sgns(walks, SgnsParams(
                dimension=sp.dimension, window=sp.window,
                negatives_per_positive=sp.negatives_per_positive,
                epochs=sp.epochs, lr_initial=sp.lr_initial,
                lr_final=sp.lr_final, noise_exponent=sp.noise_exponent,
                seed=derive_seed(spec_seed, "sgns")))
            save_features(node_emb,
                          cfg.out_dir / f"node_emb_{spec.label()}.f64")
            log.info("embed-nodes: %s -> %d x %d", spec.label(),
                     len(node_emb.ids), node_emb.dimension)
    stage.run(body)


def cmd_train(cfg: RunConfig) -> None:
    specs = cfg.graph_specs()
    modes = cfg.data.get("modes", ["n2v"])
    node_files = [cfg.out_dir / f"node_emb_{s.label()}.f64" for s in specs]
    needs_text = any(m in ("te3", "n2v_te3") for m in modes)
    inputs = [cfg.corpus_path, *node_files]
    if needs_text:
        inputs.append(_text_cache_path(cfg))
    out = cfg.out_dir / "grid_report.csv"
    out_agg = cfg.out_dir / "grid_report_agg.csv"
    stage = Stage("train", cfg, inputs=inputs, outputs=[out, out_agg])
    for path in node_files:
        stage.require(path, "embed-nodes")
    if needs_text:
        stage.require(_text_cache_path(cfg), "embed-text")

    def body():
        corpus = _load_corpus(cfg, "train")
        vectors = _load_text_vectors(cfg, corpus, "train") \
            if needs_text else {}
        features_by_spec: dict[str, dict[str, FeatureMatrix]] = {}
        for spec in specs:
            node_emb = load_features(
                cfg.out_dir / f"node_emb_{spec.label()}.f64")
            per_mode = {}
            for mode in modes:
                ids = list(node_emb.ids)
                if mode in ("te3", "n2v_te3"):
                    kept = [pid for pid in ids if pid in vectors]
                    if len(kept) < len(ids):
                        log.warning("train: %s/%s drops %d papers without "
                                    "text embeddings", spec.label(), mode,
                                    len(ids) - len(kept))
                    ids = kept
                per_mode[mode] = assemble_features(node_emb, vectors, mode,
                                                   ids=ids)
            features_by_spec[spec.label()] = per_mode
        grid = cfg.data.get("grid", {})
        report = run_experiment_grid(
            corpus, cfg.journal, specs, modes, cfg.label_keys(),
            repetitions=int(grid.get("repetitions", 10)),
            base_seed=cfg.seed, mlp_config=cfg.mlp_config(),
            eval_split=grid.get("eval_split", "validation"),
            features_by_spec=features_by_spec)
        report.write_csv(out)
        aggregate_grid_report(report).write_csv(out_agg)
        log.info("train: %d rows -> %s", len(report.rows), out)
    stage.run(body)


def cmd_rag(cfg: RunConfig) -> None:
    rag = cfg.data.get("rag", {})
    graph_cfg = rag.get("graph", {"kind": "citation", "directed": True,
                                  "weighted": False})
    spec = GraphSpec(kind=graph_cfg["kind"],
                     directed=bool(graph_cfg.get("directed", True)),
                     weighted=bool(graph_cfg.get("weighted", False)),
                     k=graph_cfg.get("k"))
    strategy = rag.get("strategy", "none")
    needs_text = strategy == "top_similar" or spec.weighted \
        or spec.kind == "similarity"
    inputs = [cfg.corpus_path, _graph_path(cfg, spec)]
    if needs_text:
        inputs.append(_text_cache_path(cfg))
    out_pred = cfg.out_dir / "predictions.csv"
    out_log = cfg.out_dir / "rag_log.csv"
    stage = Stage("rag", cfg, inputs=inputs, outputs=[out_pred, out_log])
    stage.require(cfg.corpus_path, "synth")
    stage.require(_graph_path(cfg, spec), "build-graph")
    if needs_text:
        stage.require(_text_cache_path(cfg), "embed-text")

    def body():
        corpus = _load_corpus(cfg, "rag")
        graph = load_graph(_graph_path(cfg, spec))
        percentile = int(rag.get("percentile", 20))
        horizons = tuple(range(int(rag.get("max_horizon", 10)) + 1))
        tables = label_grid(corpus, cfg.journal, horizons, (percentile,))
        rc = RetrievalConfig(strategy=strategy, k=int(rag.get("k", 5)),
                             seed=cfg.seed)
        client_cfg = rag.get("client", {"kind": "mock", "mode": "hash"})
        if client_cfg.get("kind", "mock") == "mock":
            client = MockLlmClient(mode=client_cfg.get("mode", "hash"),
                                   labels=tables, seed=cfg.seed)
        else:
            if "endpoint" not in client_cfg or "model" not in client_cfg:
                raise CliError("remote rag client needs 'endpoint' and "
                               "'model'")
            client = RemoteLlmClient(endpoint=client_cfg["endpoint"],
                                     model=client_cfg["model"],
                                     options=client_cfg.get("options"))
        vectors = _load_text_vectors(cfg, corpus, "rag") \
            if needs_text else None
        targets = sample_targets(graph, float(rag.get("fraction", 0.1)),
                                 cfg.seed, count=rag.get("count"))
        results, records = run_graphrag(
            corpus, graph, rc, targets, client, tables,
            percentile=percentile, emb=vectors,
            neighbor_encoding=rag.get("neighbor_encoding", "indicator"),
            max_horizon=int(rag.get("max_horizon", 10)),
            workers=cfg.workers, audit_dir=cfg.out_dir / "audit",
            failure_threshold=float(rag.get("failure_threshold", 0.5)))
        write_predictions_csv(results, out_pred)
        with open(out_log, "w", encoding="utf-8") as f:
            f.write("target_id,latency_s,parse_mode,retried,error\n")
            for r in records:
                f.write(f"{r.target_id},{r.latency_s:.6f},"
                        f"{r.parse_mode or ''},{int(r.retried)},"
                        f"\"{r.error or ''}\"\n")
        log.info("rag: %d/%d targets predicted -> %s", len(results),
                 len(targets), out_pred)
    stage.run(body)


def cmd_report(cfg: RunConfig) -> None:
    pred_path = cfg.out_dir / "predictions.csv"
    out = cfg.out_dir / "horizon_report.csv"
    out_plot = cfg.out_dir / "plot_data.csv"
    stage = Stage("report", cfg, inputs=[cfg.corpus_path, pred_path],
                  outputs=[out, out_plot])
    stage.require(cfg.corpus_path, "synth")
    stage.require(pred_path, "rag")

    def body():
        corpus = _load_corpus(cfg, "report")
        rag = cfg.data.get("rag", {})
        percentile = int(rag.get("percentile", 20))
        horizons = tuple(range(int(rag.get("max_horizon", 10)) + 1))
        tables = label_grid(corpus, cfg.journal, horizons, (percentile,))
        predictions = load_predictions_csv(pred_path)
        config_label = "{}_{}".format(
            rag.get("graph", {}).get("kind", "citation"),
            rag.get("strategy", "none"))
        report = horizon_report(predictions, tables, percentile,
                                config_label=config_label)
        report.write_csv(out)
        write_plot_data(report, out_plot)
        log.info("report: %d horizons -> %s", len(report.rows), out)
    stage.run(body)


COMMANDS = {
    "synth": cmd_synth,
    "validate": cmd_validate,
    "label": cmd_label,
    "embed-text": cmd_embed_text,
    "build-graph": cmd_build_graph,
    "embed-nodes": cmd_embed_nodes,
    "train": cmd_train,
    "rag": cmd_rag,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topcite",
        description="Cohort-percentile paper impact prediction pipeline")
    parser.add_argument("command", choices=sorted(COMMANDS),
                        help="pipeline stage to run")
    parser.add_argument("--config", required=True,
                        help="path to the JSON run configuration")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None,
                        help="override the output directory")
    parser.add_argument("--workers", type=int, default=None,
                        help="override the worker count")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg.data["seed"] = args.seed
        if args.out is not None:
            cfg.data["out_dir"] = str(Path(args.out).resolve())
        if args.workers is not None:
            cfg.data["workers"] = args.workers
        COMMANDS[args.command](cfg)
    except CliError as exc:
        log.error("%s", exc)
        return 1
    except Exception as exc:  # stage bug or bad data: fail loudly but cleanly
        log.error("%s failed: %s", args.command, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
