"""Skip-gram with negative sampling over random-walk node sequences.

Training is sequential SGD in a fixed pair order (deterministic for a given
seed); the hot update loop lives in the kernel backend. Negative samples are
drawn from the walk unigram distribution raised to a noise exponent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..seeding import derive_seed
from .features import FeatureMatrix

log = logging.getLogger(__name__)

_CHUNK_WALKS = 256  # walks per kernel call; bounds pair-array memory


@dataclass(frozen=True)
class SgnsParams:
    dimension: int = 256
    window: int = 10
    negatives_per_positive: int = 5
    epochs: int = 5
    lr_initial: float = 0.025
    lr_final: float = 0.0001
    noise_exponent: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.dimension < 1 or self.window < 1:
            raise ValueError("dimension and window must be >= 1")
        if self.negatives_per_positive < 1 or self.epochs < 1:
            raise ValueError("negatives and epochs must be >= 1")


def _encode_walks(walks: list[list[str]],
                  ) -> tuple[tuple[str, ...], list[np.ndarray]]:
    vocab = tuple(sorted({node for walk in walks for node in walk}))
    index = {pid: i for i, pid in enumerate(vocab)}
    encoded = [np.asarray([index[n] for n in walk], dtype=np.int64)
               for walk in walks]
    return vocab, encoded


def _chunk_pairs(encoded: list[np.ndarray],
                 window: int) -> tuple[np.ndarray, np.ndarray]:
    """All (center, context) pairs within the window for a chunk of walks."""
    centers, contexts = [], []
    for walk in encoded:
        for d in range(1, window + 1):
            if len(walk) <= d:
                break
            centers.append(walk[:-d])
            contexts.append(walk[d:])
            centers.append(walk[d:])
            contexts.append(walk[:-d])
    if not centers:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(centers), np.concatenate(contexts)


def train_sgns(walks: list[list[str]],
               params: SgnsParams | None = None) -> FeatureMatrix:
    """Train node embeddings; one `dimension`-d row per walked node."""
    features, _ = train_sgns_verbose(walks, params)
    return features


def train_sgns_verbose(walks: list[list[str]],
                       params: SgnsParams | None = None,
                       ) -> tuple[FeatureMatrix, list[float]]:
    """Like train_sgns but also returns the per-epoch mean pair loss."""
    if not walks:
        raise ValueError("empty walk set")
    params = params or SgnsParams()
    vocab, encoded = _encode_walks(walks)

    counts = np.zeros(len(vocab), dtype=np.int64)
    for walk in encoded:
        np.add.at(counts, walk, 1)
    noise = counts.astype(np.float64) ** params.noise_exponent
    noise_cdf = np.cumsum(noise / noise.sum())

    rng = np.random.default_rng(derive_seed(params.seed, "sgns-init"))
    w_in = (rng.random((len(vocab), params.dimension)) - 0.5) / params.dimension
    w_out = np.zeros_like(w_in)

    chunks = [encoded[i:i + _CHUNK_WALKS]
              for i in range(0, len(encoded), _CHUNK_WALKS)]
    chunk_pairs = [_chunk_pairs(chunk, params.window) for chunk in chunks]
    pairs_per_epoch = sum(len(c) for c, _ in chunk_pairs)
    if pairs_per_epoch == 0:
        raise ValueError(
            "no training pairs: every walk is a single node (the graph may "
            "have no edges)")
    pair_total = pairs_per_epoch * params.epochs

    n_neg = params.negatives_per_positive
    epoch_losses: list[float] = []
    offset = 0
    for epoch in range(params.epochs):
        epoch_loss = 0.0
        for chunk_idx, (centers, contexts) in enumerate(chunk_pairs):
            if centers.size == 0:
                continue
            neg_rng = np.random.default_rng(
                derive_seed(params.seed, "sgns-neg", epoch, chunk_idx))
            negatives = np.searchsorted(
                noise_cdf, neg_rng.random(centers.size * n_neg),
                side="right").astype(np.int64)
            epoch_loss += _kernels.sgns_train_chunk(
                w_in, w_out, centers, contexts, negatives, n_neg,
                params.lr_initial, params.lr_final, offset, pair_total)
            offset += centers.size
        epoch_losses.append(epoch_loss / ((n_neg + 1) * pairs_per_epoch))
        log.info("sgns epoch %d/%d: mean loss %.6f", epoch + 1,
                 params.epochs, epoch_losses[-1])
    return FeatureMatrix(ids=vocab, rows=w_in), epoch_losses


# ---------------------------------------------------------------------------
# Reference loss/gradient for a single training instance (used by the
# finite-difference checks; mirrors the kernel update math).
# ---------------------------------------------------------------------------

def sgns_pair_loss(center_vec: np.ndarray, target_rows: np.ndarray,
                   labels: np.ndarray) -> float:
    """Loss of one center against its positive/negative targets:
    sum of -log sigmoid(s) for positives and -log sigmoid(-s) for negatives.
    """
    s = target_rows @ center_vec
    signed = np.where(labels > 0.5, s, -s)
    return float(np.sum(np.logaddexp(0.0, -signed)))


def sgns_pair_gradients(center_vec: np.ndarray, target_rows: np.ndarray,
                        labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of sgns_pair_loss w.r.t. the center vector and
    each target row."""
    s = target_rows @ center_vec
    sig = 1.0 / (1.0 + np.exp(-s))
    coeff = sig - labels           # dL/ds
    grad_center = coeff @ target_rows
    grad_targets = coeff[:, None] * center_vec[None, :]
    return grad_center, grad_targets
