"""Feature matrices: uniform-dimension per-paper vectors plus assembly and
binary serialization (header + row-major float64, sidecar id list)."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FEATURE_MODES = ("n2v", "te3", "n2v_te3")


@dataclass(frozen=True)
class FeatureMatrix:
    ids: tuple[str, ...]
    rows: np.ndarray   # (n, d) float64

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[0] != len(self.ids):
            raise ValueError(
                f"row count {self.rows.shape} does not match "
                f"{len(self.ids)} ids")

    @property
    def dimension(self) -> int:
        return int(self.rows.shape[1])

    def index(self) -> dict[str, int]:
        return {pid: i for i, pid in enumerate(self.ids)}

    def row(self, paper_id: str) -> np.ndarray:
        return self.rows[self.index()[paper_id]]

    def subset(self, ids: list[str]) -> "FeatureMatrix":
        idx = self.index()
        rows = np.stack([self.rows[idx[pid]] for pid in ids])
        return FeatureMatrix(ids=tuple(ids), rows=rows)


def assemble_features(node_emb: FeatureMatrix,
                      text_emb: dict[str, np.ndarray],
                      mode: str,
                      ids: list[str] | None = None) -> FeatureMatrix:
    """Build classifier inputs: structural (n2v), textual (te3), or the
    concatenation with the structural part first (n2v_te3).

    Raises KeyError naming the first id missing from a required source.
    """
    if mode not in FEATURE_MODES:
        raise ValueError(f"unknown feature mode {mode!r}")
    if ids is None:
        ids = list(node_emb.ids)

    if mode in ("n2v", "n2v_te3"):
        node_index = node_emb.index()
        for pid in ids:
            if pid not in node_index:
                raise KeyError(f"no structural embedding for id {pid!r}")
    if mode in ("te3", "n2v_te3"):
        for pid in ids:
            if pid not in text_emb:
                raise KeyError(f"no text embedding for id {pid!r}")

    if mode == "n2v":
        return node_emb.subset(ids)
    if mode == "te3":
        rows = np.stack([np.asarray(text_emb[pid], dtype=np.float64)
                         for pid in ids])
        return FeatureMatrix(ids=tuple(ids), rows=rows)
    structural = node_emb.subset(ids).rows
    textual = np.stack([np.asarray(text_emb[pid], dtype=np.float64)
                        for pid in ids])
    return FeatureMatrix(ids=tuple(ids),
                         rows=np.hstack([structural, textual]))


def save_features(features: FeatureMatrix, path: str | Path) -> None:
    """Binary: uint64 (count, dimension) header then row-major float64;
    ids go to the `<path>.ids` sidecar, one per line."""
    path = Path(path)
    with open(path, "wb") as f:
        f.write(struct.pack("<QQ", len(features.ids), features.dimension))
        f.write(np.ascontiguousarray(features.rows,
                                     dtype=np.float64).tobytes())
    with open(str(path) + ".ids", "w", encoding="utf-8") as f:
        for pid in features.ids:
            f.write(pid + "\n")


def load_features(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    with open(path, "rb") as f:
        header = f.read(16)
        if len(header) != 16:
            raise ValueError(f"{path}: truncated feature file")
        count, dim = struct.unpack("<QQ", header)
        data = np.frombuffer(f.read(), dtype=np.float64)
    if data.size != count * dim:
        raise ValueError(f"{path}: expected {count * dim} values, "
                         f"got {data.size}")
    with open(str(path) + ".ids", encoding="utf-8") as f:
        ids = tuple(line.strip() for line in f if line.strip())
    if len(ids) != count:
        raise ValueError(f"{path}.ids: expected {count} ids, got {len(ids)}")
    return FeatureMatrix(ids=ids, rows=data.reshape(count, dim).copy())
