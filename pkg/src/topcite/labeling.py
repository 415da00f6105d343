"""Accumulated citation counts and cohort-percentile top-paper labels."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from .corpus import CitationHistory, Corpus, cohort, round_half_up

log = logging.getLogger(__name__)

DEFAULT_HORIZONS = tuple(range(11))          # Y in 0..10
DEFAULT_PERCENTILES = (10, 20, 30, 40, 50)   # top-P%


@dataclass(frozen=True, order=True)
class LabelKey:
    """Horizon Y (years since publication) and top-percentile threshold P."""

    Y: int
    P: int

    def __post_init__(self):
        if self.Y < 0:
            raise ValueError(f"Y must be >= 0, got {self.Y}")
        if not 0 < self.P < 100:
            raise ValueError(f"P must be in (0, 100), got {self.P}")

    @property
    def q_value(self) -> float:
        """Quantile form of the threshold: top 20% <-> q = 0.8."""
        return 1.0 - self.P / 100.0


@dataclass(frozen=True)
class LabelTable:
    key: LabelKey
    journal: str
    acc: dict[str, int]          # paper id -> accumulated citations at Y
    labels: dict[str, bool]      # paper id -> top-paper indicator
    cutoff_acc: int              # lowest ACC among positives (0 if none)
    n_pos: int

    def positives(self) -> list[str]:
        return sorted(pid for pid, lab in self.labels.items() if lab)

    def negatives(self) -> list[str]:
        return sorted(pid for pid, lab in self.labels.items() if not lab)


def accumulated_citations(history: CitationHistory, horizon: int) -> int:
    """Sum of yearly citations from publication through horizon Y."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if horizon >= len(history.counts):
        raise ValueError(
            f"{history.paper_id}: horizon {horizon} outside the observable "
            f"window of {len(history.counts)} years")
    return sum(history.counts[:horizon + 1])


def positive_count(n: int, percentile: int) -> int:
    """Number of positives in a cohort of n at threshold P, rounded half-up.

    Computed in exact integer arithmetic: floor(P*n/100 + 1/2).
    """
    return (2 * percentile * n + 100) // 200


def assign_labels(corpus: Corpus, journal: str, key: LabelKey) -> LabelTable:
    """Label the (journal, Y) cohort: the n_pos highest-ACC papers are
    positive, ties at the cutoff broken by ascending paper id."""
    members = cohort(corpus, journal, key.Y)
    if not members:
        raise ValueError(f"empty cohort for journal={journal!r} Y={key.Y}")
    acc = {pid: accumulated_citations(corpus.histories[pid], key.Y)
           for pid in members}
    n_pos = positive_count(len(members), key.P)
    ranked = sorted(members, key=lambda pid: (-acc[pid], pid))
    positives = set(ranked[:n_pos])
    labels = {pid: pid in positives for pid in members}
    cutoff = min((acc[pid] for pid in positives), default=0)
    return LabelTable(key=key, journal=journal, acc=acc, labels=labels,
                      cutoff_acc=cutoff, n_pos=n_pos)


def label_grid(corpus: Corpus, journal: str,
               horizons: tuple[int, ...] = DEFAULT_HORIZONS,
               percentiles: tuple[int, ...] = DEFAULT_PERCENTILES,
               ) -> dict[LabelKey, LabelTable]:
    """One LabelTable per feasible (Y, P); empty-cohort horizons are omitted
    with a logged notice."""
    tables: dict[LabelKey, LabelTable] = {}
    for yy in sorted(horizons):
        if not cohort(corpus, journal, yy):
            log.info("label_grid: no cohort for journal=%r Y=%d, skipping",
                     journal, yy)
            continue
        for pp in sorted(percentiles):
            key = LabelKey(Y=yy, P=pp)
            tables[key] = assign_labels(corpus, journal, key)
    return tables


def export_labels(tables: dict[LabelKey, LabelTable],
                  path: str | Path) -> None:
    """CSV export: journal,Y,P,paper_id,acc,label."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["journal", "Y", "P", "paper_id", "acc", "label"])
        for key in sorted(tables):
            table = tables[key]
            for pid in sorted(table.labels):
                writer.writerow([table.journal, key.Y, key.P, pid,
                                 table.acc[pid], int(table.labels[pid])])


__all__ = [
    "LabelKey", "LabelTable", "accumulated_citations", "positive_count",
    "assign_labels", "label_grid", "export_labels", "round_half_up",
    "DEFAULT_HORIZONS", "DEFAULT_PERCENTILES",
]
