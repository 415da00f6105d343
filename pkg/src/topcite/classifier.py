"""Top-paper classification: balanced resampling, a small feed-forward
network trained with early stopping, and the factorial experiment grid.

The network is dense 64 -> dense 32 -> logistic output, minimizing binary
cross-entropy with mini-batch gradient descent plus momentum. Training is
single-threaded and fully seeded so repetitions are reproducible.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .embeddings.features import FeatureMatrix, assemble_features
from .embeddings.sgns import SgnsParams, train_sgns
from .embeddings.walks import WalkParams, generate_walks
from .graph import GraphSpec, build_citation_graph, build_similarity_graph
from .labeling import LabelKey, LabelTable, assign_labels
from .metrics import EvalReport, auc_roc
from .seeding import derive_seed

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MlpConfig:
    hidden_sizes: tuple[int, int] = (64, 32)
    batch_size: int = 2048
    max_epochs: int = 80
    validation_fraction: float = 0.15
    early_stop_patience: int = 5
    learning_rate: float = 1e-3
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden sizes must be positive")


@dataclass(frozen=True)
class BalancedDataset:
    features: FeatureMatrix
    labels: np.ndarray                    # bool per row
    provenance: tuple                     # (LabelKey, repetition, seed)

    def __post_init__(self):
        n_pos = int(self.labels.sum())
        if n_pos * 2 != self.labels.size:
            raise ValueError(
                f"dataset is not balanced: {n_pos} of {self.labels.size}")


@dataclass
class TrainedModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: MlpConfig
    history: list[dict] = field(default_factory=list)  # per-epoch losses
    best_epoch: int = 0
    val_indices: np.ndarray | None = None

    @property
    def input_dim(self) -> int:
        return int(self.weights[0].shape[0])

    @property
    def epochs_trained(self) -> int:
        return len(self.history)


def balanced_sample(table: LabelTable, features: FeatureMatrix,
                    seed: int) -> BalancedDataset:
    """All positives plus an equal number of uniformly drawn negatives.

    Only negatives with feature rows are eligible; every positive must have
    a feature row.
    """
    index = features.index()
    positives = table.positives()
    if not positives:
        raise ValueError("label table has no positives")
    missing = [pid for pid in positives if pid not in index]
    if missing:
        raise KeyError(f"no feature row for positive paper {missing[0]!r} "
                       f"({len(missing)} missing in total)")
    pool = [pid for pid in table.negatives() if pid in index]
    if len(pool) < len(positives):
        raise ValueError(
            f"cannot balance: {len(positives)} positives but only "
            f"{len(pool)} negatives with features")
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(np.asarray(pool, dtype=object),
                               size=len(positives), replace=False).tolist())
    ids = positives + chosen
    labels = np.zeros(len(ids), dtype=bool)
    labels[:len(positives)] = True
    return BalancedDataset(features=features.subset(ids), labels=labels,
                           provenance=(table.key, None, seed))


# ---------------------------------------------------------------------------
# Network internals
# ---------------------------------------------------------------------------

def _init_params(input_dim: int, cfg: MlpConfig,
                 ) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Uniform fan-in initialization, biases at zero."""
    rng = np.random.default_rng(derive_seed(cfg.seed, "mlp-init"))
    sizes = [input_dim, *cfg.hidden_sizes, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward(weights, biases, x: np.ndarray,
             ) -> tuple[list[np.ndarray], np.ndarray]:
    """Returns hidden activations and the output logits (pre-sigmoid)."""
    activations = [x]
    a = x
    for w, b in zip(weights[:-1], biases[:-1]):
        a = np.tanh(a @ w + b)
        activations.append(a)
    logits = (a @ weights[-1] + biases[-1]).ravel()
    return activations, logits


def _bce_from_logits(logits: np.ndarray, y: np.ndarray) -> float:
    # mean of softplus(z) - y*z, the stable form of binary cross-entropy
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def loss_and_gradients(weights, biases, x: np.ndarray, y: np.ndarray,
                       ) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Binary cross-entropy and its analytic gradients via backprop."""
    activations, logits = _forward(weights, biases, x)
    n = x.shape[0]
    loss = _bce_from_logits(logits, y)
    delta = ((1.0 / (1.0 + np.exp(-logits)) - y) / n)[:, None]
    grad_w = [None] * len(weights)
    grad_b = [None] * len(biases)
    for layer in reversed(range(len(weights))):
        a_prev = activations[layer]
        grad_w[layer] = a_prev.T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ weights[layer].T) * (1.0 - activations[layer] ** 2)
    return loss, grad_w, grad_b


class EarlyStopper:
    """Stop after `patience` consecutive epochs without a new best loss.

    With the best at epoch b, training halts after epoch b + patience.
    """

    def __init__(self, patience: int):
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch = 0
        self._since_best = 0

    def update(self, epoch: int, loss: float) -> bool:
        """Record one epoch's validation loss; True means stop now."""
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_epoch = epoch
            self._since_best = 0
            return False
        self._since_best += 1
        return self._since_best >= self.patience


def train_model(ds: BalancedDataset, cfg: MlpConfig | None = None,
                ) -> TrainedModel:
    """Mini-batch gradient descent with momentum, a held-out validation
    split, early stopping on validation loss, and best-weight restoration."""
    cfg = cfg or MlpConfig()
    x = ds.features.rows
    y = ds.labels.astype(np.float64)
    n = x.shape[0]
    if n < 2:
        raise ValueError("dataset too small to split")

    rng = np.random.default_rng(derive_seed(cfg.seed, "mlp-split"))
    order = rng.permutation(n)
    n_val = max(1, int(round(cfg.validation_fraction * n)))
    if n_val >= n:
        raise ValueError("validation split leaves no training rows")
    val_idx, train_idx = order[:n_val], order[n_val:]
    x_train, y_train = x[train_idx], y[train_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    weights, biases = _init_params(x.shape[1], cfg)
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    best_w, best_b = None, None
    stopper = EarlyStopper(cfg.early_stop_patience)
    history: list[dict] = []
    batch_rng = np.random.default_rng(derive_seed(cfg.seed, "mlp-batches"))

    for epoch in range(1, cfg.max_epochs + 1):
        perm = batch_rng.permutation(len(train_idx))
        epoch_loss = 0.0
        for start in range(0, len(perm), cfg.batch_size):
            batch = perm[start:start + cfg.batch_size]
            loss, grad_w, grad_b = loss_and_gradients(
                weights, biases, x_train[batch], y_train[batch])
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"non-finite training loss at epoch {epoch} "
                    f"(lr={cfg.learning_rate}); aborting")
            epoch_loss += loss * len(batch)
            for i in range(len(weights)):
                vel_w[i] = cfg.momentum * vel_w[i] - cfg.learning_rate * grad_w[i]
                vel_b[i] = cfg.momentum * vel_b[i] - cfg.learning_rate * grad_b[i]
                weights[i] += vel_w[i]
                biases[i] += vel_b[i]
        _, val_logits = _forward(weights, biases, x_val)
        val_loss = _bce_from_logits(val_logits, y_val)
        history.append({"epoch": epoch,
                        "train_loss": epoch_loss / len(train_idx),
                        "val_loss": val_loss})
        improved = val_loss < stopper.best_loss
        stop = stopper.update(epoch, val_loss)
        if improved:
            best_w = [w.copy() for w in weights]
            best_b = [b.copy() for b in biases]
        if stop:
            break

    return TrainedModel(weights=best_w or weights, biases=best_b or biases,
                        config=cfg, history=history,
                        best_epoch=stopper.best_epoch, val_indices=val_idx)


def predict(model: TrainedModel, rows) -> np.ndarray:
    """Per-row probability of the positive class."""
    x = rows.rows if isinstance(rows, FeatureMatrix) else np.asarray(rows)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(f"input dimension {x.shape} does not match model "
                         f"input {model.input_dim}")
    _, logits = _forward(model.weights, model.biases, x)
    return 1.0 / (1.0 + np.exp(-logits))


def save_model(model: TrainedModel, path: str | Path) -> None:
    """Binary dump: JSON header (config + shapes) then raw float64 arrays."""
    header = {
        "config": {
            "hidden_sizes": list(model.config.hidden_sizes),
            "batch_size": model.config.batch_size,
            "max_epochs": model.config.max_epochs,
            "validation_fraction": model.config.validation_fraction,
            "early_stop_patience": model.config.early_stop_patience,
            "learning_rate": model.config.learning_rate,
            "momentum": model.config.momentum,
            "seed": model.config.seed,
        },
        "shapes": [list(w.shape) for w in model.weights],
        "best_epoch": model.best_epoch,
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for w, b in zip(model.weights, model.biases):
            f.write(np.ascontiguousarray(w, dtype=np.float64).tobytes())
            f.write(np.ascontiguousarray(b, dtype=np.float64).tobytes())


def load_model(path: str | Path) -> TrainedModel:
    with open(path, "rb") as f:
        (header_len,) = struct.unpack("<Q", f.read(8))
        header = json.loads(f.read(header_len).decode("utf-8"))
        cfg = MlpConfig(
            hidden_sizes=tuple(header["config"]["hidden_sizes"]),
            batch_size=header["config"]["batch_size"],
            max_epochs=header["config"]["max_epochs"],
            validation_fraction=header["config"]["validation_fraction"],
            early_stop_patience=header["config"]["early_stop_patience"],
            learning_rate=header["config"]["learning_rate"],
            momentum=header["config"]["momentum"],
            seed=header["config"]["seed"],
        )
        weights, biases = [], []
        for shape in header["shapes"]:
            n = int(np.prod(shape))
            weights.append(np.frombuffer(f.read(8 * n), dtype=np.float64)
                           .reshape(shape).copy())
            biases.append(np.frombuffer(f.read(8 * shape[1]),
                                        dtype=np.float64).copy())
    return TrainedModel(weights=weights, biases=biases, config=cfg,
                        best_epoch=header["best_epoch"])


# ---------------------------------------------------------------------------
# Experiment grid
# ---------------------------------------------------------------------------

GRID_COLUMNS = ["graph_kind", "directed", "weighted", "K", "mode", "journal",
                "Y", "P", "rep", "auc", "n_pos", "n_neg"]


def prepare_features(corpus: Corpus, spec: GraphSpec,
                     text_emb: dict[str, np.ndarray] | None,
                     walk_params: WalkParams, sgns_params: SgnsParams,
                     modes: list[str]) -> dict[str, FeatureMatrix]:
    """Build the graph, walk it, train node embeddings, then assemble one
    feature matrix per requested mode. Ids lacking a text embedding are
    excluded from text-bearing modes and reported."""
    if spec.kind == "citation":
        graph = build_citation_graph(corpus, spec, emb=text_emb)
    else:
        if text_emb is None:
            raise ValueError("similarity graphs need text embeddings")
        graph = build_similarity_graph(corpus, text_emb, spec)
    walks = generate_walks(graph, walk_params)
    node_emb = train_sgns(walks, sgns_params)

    out: dict[str, FeatureMatrix] = {}
    for mode in modes:
        ids = list(node_emb.ids)
        if mode in ("te3", "n2v_te3"):
            kept = [pid for pid in ids if pid in (text_emb or {})]
            if len(kept) < len(ids):
                log.warning("%s/%s: excluding %d papers without text "
                            "embeddings", spec.label(), mode,
                            len(ids) - len(kept))
            ids = kept
        out[mode] = assemble_features(node_emb, text_emb or {}, mode, ids=ids)
    return out


def evaluate_repetition(table: LabelTable, features: FeatureMatrix,
                        cfg: MlpConfig, seed: int,
                        eval_split: str = "validation") -> tuple[float, int, int]:
    """One balanced resampling, training run, and AUC evaluation.

    eval_split "validation" scores the 15% split that early stopping also
    monitors (the selection bias is disclosed in the report); "three_way"
    holds out a separate test split never seen during training.
    """
    ds = balanced_sample(table, features, seed=derive_seed(seed, "sample"))
    if eval_split == "validation":
        model = train_model(ds, replace(cfg, seed=derive_seed(seed, "train")))
        idx = model.val_indices
        scores = predict(model, ds.features.rows[idx])
        truth = ds.labels[idx]
    elif eval_split == "three_way":
        rng = np.random.default_rng(derive_seed(seed, "test-split"))
        order = rng.permutation(ds.labels.size)
        n_test = max(1, int(round(0.15 * ds.labels.size)))
        test_idx, rest = order[:n_test], order[n_test:]
        rest_ds = BalancedDatasetView(ds, rest)
        inner = replace(cfg, seed=derive_seed(seed, "train"),
                        validation_fraction=min(0.15 / 0.85, 0.5))
        model = train_model(rest_ds, inner)
        scores = predict(model, ds.features.rows[test_idx])
        truth = ds.labels[test_idx]
    else:
        raise ValueError(f"unknown eval_split {eval_split!r}")
    n_pos = int(truth.sum())
    n_neg = int(truth.size - n_pos)
    return auc_roc(scores, truth), n_pos, n_neg


class BalancedDatasetView:
    """Row-subset view with the BalancedDataset interface train_model needs."""

    def __init__(self, ds: BalancedDataset, idx: np.ndarray):
        self.features = FeatureMatrix(
            ids=tuple(ds.features.ids[i] for i in idx),
            rows=ds.features.rows[idx])
        self.labels = ds.labels[idx]
        self.provenance = ds.provenance


def run_experiment_grid(corpus: Corpus, journal: str,
                        graph_specs: list[GraphSpec], modes: list[str],
                        keys: list[LabelKey], repetitions: int = 10,
                        base_seed: int = 0, *,
                        text_emb: dict[str, np.ndarray] | None = None,
                        walk_params: WalkParams | None = None,
                        sgns_params: SgnsParams | None = None,
                        mlp_config: MlpConfig | None = None,
                        eval_split: str = "validation",
                        features_by_spec: dict[str, dict[str, FeatureMatrix]]
                        | None = None) -> EvalReport:
    """Balanced-resampling evaluation over the factorial grid.

    For each (graph, mode, key) cell: `repetitions` independent balanced
    datasets with derived seeds, one training/evaluation cycle each. Cell
    failures are logged and skipped, never fatal. Precomputed features can
    be supplied per spec label (as the CLI does after its embed stages);
    otherwise graphs are built and embedded here.
    """
    walk_params = walk_params or WalkParams()
    sgns_params = sgns_params or SgnsParams()
    mlp_config = mlp_config or MlpConfig()
    report = EvalReport(columns=GRID_COLUMNS)

    tables: dict[LabelKey, LabelTable] = {}
    for key in keys:
        try:
            tables[key] = assign_labels(corpus, journal, key)
        except ValueError as exc:
            log.warning("grid: skipping %s (%s)", key, exc)

    for spec in graph_specs:
        spec_seed = derive_seed(base_seed, spec.label())
        try:
            if features_by_spec is not None:
                features = features_by_spec[spec.label()]
            else:
                features = prepare_features(
                    corpus, spec, text_emb,
                    replace(walk_params, seed=derive_seed(spec_seed, "walks")),
                    replace(sgns_params, seed=derive_seed(spec_seed, "sgns")),
                    modes)
        except Exception as exc:
            log.warning("grid: feature stage failed for %s: %s",
                        spec.label(), exc)
            continue
        for mode in modes:
            for key, table in tables.items():
                for rep in range(repetitions):
                    seed = derive_seed(spec_seed, mode, key.Y, key.P, rep)
                    try:
                        auc, n_pos, n_neg = evaluate_repetition(
                            table, features[mode], mlp_config, seed,
                            eval_split=eval_split)
                    except Exception as exc:
                        log.warning("grid cell failed (%s/%s/%s rep %d): %s",
                                    spec.label(), mode, key, rep, exc)
                        continue
                    report.add(graph_kind=spec.kind,
                               directed=int(spec.directed),
                               weighted=int(spec.weighted),
                               K=spec.k if spec.k is not None else "",
                               mode=mode, journal=journal, Y=key.Y, P=key.P,
                               rep=rep, auc=auc, n_pos=n_pos, n_neg=n_neg)
                log.info("grid: %s/%s/%s done", spec.label(), mode, key)
    return report


def aggregate_grid_report(report: EvalReport) -> EvalReport:
    """Mean/std AUC over repetitions for every grid cell."""
    return report.aggregate(
        group_by=["graph_kind", "directed", "weighted", "K", "mode",
                  "journal", "Y", "P"], value="auc")
