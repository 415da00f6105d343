"""Text embeddings: provider clients, persistent cache, cosine similarity.

The remote provider is an HTTP batch endpoint (OpenAI-style payload). The
hashing provider is a deterministic offline stand-in used for tests and
synthetic pipelines; it hashes abstract tokens into a fixed number of signed
buckets, so papers sharing vocabulary land close in cosine space.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

log = logging.getLogger(__name__)

DEFAULT_TEXT_MODEL = "text-embedding-3-large"
DEFAULT_TEXT_DIMENSION = 3072


class ProviderError(RuntimeError):
    """Remote embedding provider failed after bounded retries."""


class DimensionError(ValueError):
    """Provider returned a vector of unexpected dimension."""


class CacheError(RuntimeError):
    """Embedding cache file is corrupt."""


def cosine_similarity(a, b) -> float:
    """a.b / (|a||b|), clamped to [-1, 1] against rounding.

    The denominator is sqrt((a.a)(b.b)) so that identical (and negated)
    inputs give exactly +/-1.0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    aa = float(np.dot(a, a))
    bb = float(np.dot(b, b))
    if aa == 0.0 or bb == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm input")
    return min(1.0, max(-1.0, float(np.dot(a, b)) / np.sqrt(aa * bb)))


@dataclass(frozen=True)
class TextEmbedding:
    paper_id: str
    model_id: str
    vector: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.vector)):
            raise ValueError(f"{self.paper_id}: non-finite embedding entries")


class HashingEmbeddingProvider:
    """Deterministic offline provider: signed token hashing, L2-normalized."""

    def __init__(self, dimension: int = 256, model_id: str = "hashing-v1"):
        self.dimension = dimension
        self.model_id = model_id

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in text.lower().split():
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "little") % self.dimension
            sign = 1.0 if digest[4] & 1 else -1.0
            vec[bucket] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            # tokenless text: fall back to a unit vector from the text hash
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            vec[int.from_bytes(digest[:4], "little") % self.dimension] = 1.0
            norm = 1.0
        return vec / norm


class HttpEmbeddingProvider:
    """Batch HTTP client with bounded retries and exponential backoff.

    Expects an endpoint accepting {"model": ..., "input": [texts]} and
    returning {"data": [{"embedding": [...]}, ...]} in request order.
    The API key is read from the environment, never from config files.
    """

    RETRYABLE_STATUS = (429, 500, 502, 503, 504)

    def __init__(self, endpoint: str, model_id: str = DEFAULT_TEXT_MODEL,
                 dimension: int = DEFAULT_TEXT_DIMENSION,
                 api_key_env: str = "TOPCITE_EMBED_API_KEY",
                 timeout: float = 60.0, max_retries: int = 3,
                 backoff: float = 1.0, session=None):
        self.endpoint = endpoint
        self.model_id = model_id
        self.dimension = dimension
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._session = session or requests.Session()
        self._api_key = os.environ.get(api_key_env, "")

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = {"model": self.model_id, "input": texts}
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._session.post(self.endpoint, json=payload,
                                          headers=headers,
                                          timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code in self.RETRYABLE_STATUS:
                last_error = ProviderError(
                    f"HTTP {resp.status_code} from {self.endpoint}")
                continue
            if resp.status_code != 200:
                raise ProviderError(
                    f"HTTP {resp.status_code} from {self.endpoint}: "
                    f"{resp.text[:200]}")
            data = resp.json()["data"]
            if len(data) != len(texts):
                raise ProviderError(
                    f"provider returned {len(data)} vectors for "
                    f"{len(texts)} texts")
            return [np.asarray(item["embedding"], dtype=np.float64)
                    for item in data]
        raise ProviderError(
            f"giving up after {self.max_retries} retries: {last_error}")


class EmbeddingCache:
    """Append-only JSONL cache keyed by (paper_id, model_id)."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[tuple[str, str], np.ndarray] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    key = (str(obj["paper_id"]), str(obj["model_id"]))
                    vec = np.asarray(obj["vector"], dtype=np.float64)
                except (json.JSONDecodeError, KeyError, TypeError,
                        ValueError) as exc:
                    raise CacheError(
                        f"{self.path}: corrupt cache line {lineno} "
                        f"({exc})") from exc
                self._entries[key] = vec

    def get(self, paper_id: str, model_id: str) -> np.ndarray | None:
        return self._entries.get((paper_id, model_id))

    def put_many(self, items: list[tuple[str, str, np.ndarray]]) -> None:
        """Persist first, then make visible in memory."""
        with open(self.path, "a", encoding="utf-8") as f:
            for paper_id, model_id, vec in items:
                f.write(json.dumps({"paper_id": paper_id,
                                    "model_id": model_id,
                                    "vector": vec.tolist()}) + "\n")
            f.flush()
            os.fsync(f.fileno())
        for paper_id, model_id, vec in items:
            self._entries[(paper_id, model_id)] = vec

    def __len__(self) -> int:
        return len(self._entries)


def fetch_text_embeddings(provider, papers, cache: str | Path | EmbeddingCache,
                          batch_size: int = 64, workers: int = 1,
                          ) -> dict[str, TextEmbedding]:
    """Cache-first batch embedding of paper abstracts.

    Uncached abstracts go to the provider in batches (optionally with a
    bounded worker pool); results are persisted to the cache before
    returning. Papers with empty abstracts are skipped and reported.
    Raises DimensionError if any returned vector does not match the
    provider's declared dimension.
    """
    if not isinstance(cache, EmbeddingCache):
        cache = EmbeddingCache(cache)
    model_id = provider.model_id

    result: dict[str, TextEmbedding] = {}
    pending: list = []
    skipped: list[str] = []
    for paper in papers:
        if not paper.abstract.strip():
            skipped.append(paper.id)
            continue
        vec = cache.get(paper.id, model_id)
        if vec is not None:
            result[paper.id] = TextEmbedding(paper.id, model_id, vec)
        else:
            pending.append(paper)
    if skipped:
        log.warning("fetch_text_embeddings: skipped %d empty-abstract "
                    "papers: %s", len(skipped), ", ".join(skipped[:5]) +
                    ("..." if len(skipped) > 5 else ""))

    batches = [pending[i:i + batch_size]
               for i in range(0, len(pending), batch_size)]

    def run_batch(batch):
        return provider.embed_batch([p.abstract for p in batch])

    if workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors_per_batch = list(pool.map(run_batch, batches))
    else:
        vectors_per_batch = [run_batch(b) for b in batches]

    to_cache = []
    for batch, vectors in zip(batches, vectors_per_batch):
        for paper, vec in zip(batch, vectors):
            if vec.shape != (provider.dimension,):
                raise DimensionError(
                    f"{paper.id}: provider returned dimension "
                    f"{vec.shape[0] if vec.ndim == 1 else vec.shape}, "
                    f"expected {provider.dimension}")
            to_cache.append((paper.id, model_id, vec))
            result[paper.id] = TextEmbedding(paper.id, model_id, vec)
    if to_cache:
        cache.put_many(to_cache)
    return result


def embedding_vectors(embeddings: dict[str, TextEmbedding],
                      ) -> dict[str, np.ndarray]:
    """Plain id -> vector view of a TextEmbedding map."""
    return {pid: e.vector for pid, e in embeddings.items()}
