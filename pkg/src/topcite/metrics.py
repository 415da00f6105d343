"""AUC-ROC evaluation and report emission.

auc_roc equals the Mann-Whitney statistic P(s+ > s-) + 0.5 P(s+ = s-),
computed via rank sums with average ranks for ties.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


def auc_roc(scores, labels) -> float:
    """Area under the ROC curve via the rank-sum formulation.

    Requires at least one positive and one negative label; ties receive
    average ranks so an all-equal score vector gives exactly 0.5.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-d and the same length")
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError(
            f"need both classes to score (got {n_pos} pos, {n_neg} neg)")
    ranks = _average_ranks(s)
    rank_sum_pos = float(ranks[y].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their group."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        # positions i..j (0-based) share the mean of ranks i+1..j+1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass
class EvalReport:
    """Tabular evaluation results with a fixed column order."""

    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    def add(self, **kwargs) -> None:
        missing = set(self.columns) - set(kwargs)
        if missing:
            raise ValueError(f"missing report columns: {sorted(missing)}")
        self.rows.append({c: kwargs[c] for c in self.columns})

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=self.columns)
            writer.writeheader()
            writer.writerows(self.rows)

    def aggregate(self, group_by: list[str], value: str = "auc") -> "EvalReport":
        """Mean/std of `value` over rows sharing the group_by columns."""
        groups: dict[tuple, list[float]] = {}
        for row in self.rows:
            key = tuple(row[c] for c in group_by)
            groups.setdefault(key, []).append(float(row[value]))
        out = EvalReport(columns=group_by + [f"{value}_mean", f"{value}_std", "n"])
        for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
            vals = np.asarray(groups[key])
            out.rows.append(dict(zip(group_by, key))
                            | {f"{value}_mean": float(vals.mean()),
                               f"{value}_std": float(vals.std(ddof=0)),
                               "n": int(vals.size)})
        return out


def horizon_report(predictions, label_tables, percentile: int,
                   config_label: str = "default") -> EvalReport:
    """Score predictions horizon by horizon against a label grid.

    predictions: iterable of (target_id, Y, probability) triples.
    label_tables: {LabelKey: LabelTable} as produced by label_grid.
    Horizons with a single class (or no joinable rows) are omitted with a
    notice; pct_available reports the per-horizon evaluated count as a
    percentage of the largest horizon count.
    """
    by_horizon: dict[int, list[tuple[str, float]]] = {}
    unjoinable = 0
    tables = {key.Y: table for key, table in label_tables.items()
              if key.P == percentile}
    for target_id, yy, prob in predictions:
        table = tables.get(int(yy))
        if table is None or target_id not in table.labels:
            unjoinable += 1
            continue
        by_horizon.setdefault(int(yy), []).append((target_id, float(prob)))
    if unjoinable:
        log.warning("horizon_report: %d prediction rows could not be joined "
                    "to labels and were excluded", unjoinable)

    counts = {yy: len(rows) for yy, rows in by_horizon.items()}
    max_count = max(counts.values(), default=0)
    report = EvalReport(columns=["config", "Y", "auc", "n_pos", "n_neg",
                                 "pct_available"])
    for yy in sorted(by_horizon):
        table = tables[yy]
        scores = [prob for _, prob in by_horizon[yy]]
        labels = [table.labels[pid] for pid, _ in by_horizon[yy]]
        n_pos = sum(labels)
        n_neg = len(labels) - n_pos
        if n_pos == 0 or n_neg == 0:
            log.info("horizon_report: Y=%d has a single class "
                     "(%d pos, %d neg), omitted", yy, n_pos, n_neg)
            continue
        report.add(config=config_label, Y=yy,
                   auc=auc_roc(scores, labels), n_pos=n_pos, n_neg=n_neg,
                   pct_available=100.0 * counts[yy] / max_count)
    return report


def write_plot_data(report: EvalReport, path: str | Path) -> None:
    """Plot-data CSV (config,Y,auc,pct_available) for external plotting."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["config", "Y", "auc", "pct_available"])
        for row in report.rows:
            writer.writerow([row["config"], row["Y"], row["auc"],
                             row.get("pct_available", math.nan)])


__all__ = ["auc_roc", "EvalReport", "horizon_report", "write_plot_data"]
