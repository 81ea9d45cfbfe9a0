"""Example-forgetting statistics and their relation to incompatibility.

A forgetting event is a correct -> incorrect transition for one example
across consecutive evaluated epochs. An example that is incorrect at the
first evaluated epoch has no preceding correct epoch, so nothing is counted
there. Counting is one linear pass over the epoch log.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compat import UpdateComparison, _correctness
from .errors import EmptyLog, IdCoverageMismatch
from .training import EpochEvalLog

QUADRANT_NAMES = ("both_correct", "both_wrong", "h1c_h2w", "h1w_h2c")


@dataclass(frozen=True)
class ForgettingCounts:
    counts: dict[str, int]  # example_id -> forgetting events; treat as immutable
    epochs_observed: int


@dataclass(frozen=True)
class ForgettingRow:
    quadrant: str
    model: str  # "h1" | "h2"
    mean: float  # nan for an empty quadrant
    std: float  # population std; nan for an empty quadrant
    n: int


def count_forgetting_events(log: EpochEvalLog) -> ForgettingCounts:
    """Per-example count of correct -> incorrect transitions."""
    if log.epochs < 1:
        raise EmptyLog("epoch log has no epochs")
    c = log.correct
    events = (c[:-1] & ~c[1:]).sum(axis=0) if log.epochs > 1 else np.zeros(c.shape[1], dtype=int)
    return ForgettingCounts(
        counts={example_id: int(events[j]) for j, example_id in enumerate(log.example_ids)},
        epochs_observed=log.epochs,
    )


def forgetting_by_quadrant(
    cmp: UpdateComparison, counts_h1: ForgettingCounts, counts_h2: ForgettingCounts
) -> list[ForgettingRow]:
    """Mean +/- std forgetting events per (quadrant, model).

    Both count tables must cover every aligned id. Rows come out
    quadrant-major (both_correct, both_wrong, h1c_h2w, h1w_h2c) with the
    h1w_h2c rows included for completeness.
    """
    for name, counts in (("h1", counts_h1), ("h2", counts_h2)):
        missing = [i for i in cmp.aligned_ids if i not in counts.counts]
        if missing:
            raise IdCoverageMismatch(
                f"forgetting counts for {name} miss {len(missing)} aligned ids "
                f"(e.g. {missing[:5]})"
            )
    c1, c2 = _correctness(cmp)
    quadrant_of = {}
    for i, example_id in enumerate(cmp.aligned_ids):
        if c1[i] and c2[i]:
            quadrant_of[example_id] = "both_correct"
        elif not c1[i] and not c2[i]:
            quadrant_of[example_id] = "both_wrong"
        elif c1[i]:
            quadrant_of[example_id] = "h1c_h2w"
        else:
            quadrant_of[example_id] = "h1w_h2c"
    rows = []
    for quadrant in QUADRANT_NAMES:
        ids = [i for i in cmp.aligned_ids if quadrant_of[i] == quadrant]
        for model, counts in (("h1", counts_h1), ("h2", counts_h2)):
            values = np.array([counts.counts[i] for i in ids], dtype=np.float64)
            if len(values):
                mean, std = float(values.mean()), float(values.std())
            else:
                mean = std = math.nan
            rows.append(ForgettingRow(quadrant=quadrant, model=model, mean=mean, std=std, n=len(ids)))
    return rows


def write_forgetting_table(rows: list[ForgettingRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["quadrant", "model", "mean", "std", "n"])
        for row in rows:
            writer.writerow([row.quadrant, row.model, repr(row.mean), repr(row.std), row.n])
