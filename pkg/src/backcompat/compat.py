"""Backward-compatibility metrics over aligned prediction-log pairs.

Given the old model h1 and its update h2 evaluated on the same test set, the
two headline scores are

    BTC = |h1 correct AND h2 correct| / |h1 correct|   (trust preserved)
    BEC = |h1 wrong  AND h2 wrong |  / |h2 wrong|      (h2's mistakes not new)

with the degenerate denominators (h1 never correct for BTC, h2 never wrong
for BEC) defined as 1.0 plus an explicit flag. Every test point falls into
one quadrant of (h1 correct?, h2 correct?); points correct under h1 but wrong
under h2 are the *incompatible* points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyIntersection,
    IdSetMismatch,
    LabelSetMismatch,
    MissingConfidence,
    UnknownTagNamespace,
    ValidationError,
)
from .logs import PredictionLog

BTC_DENOM_ZERO = "BTC_DENOM_ZERO"
BEC_DENOM_ZERO = "BEC_DENOM_ZERO"

UNTAGGED = "(untagged)"


@dataclass(frozen=True)
class UpdateComparison:
    """An aligned (h1, h2) log pair; the unit of all compatibility analysis."""

    log_h1: PredictionLog
    log_h2: PredictionLog
    aligned_ids: tuple[str, ...]


@dataclass(frozen=True)
class Quadrants:
    both_correct: int
    both_wrong: int
    h1c_h2w: int  # incompatible: h1 correct, h2 wrong
    h1w_h2c: int  # fixed: h1 wrong, h2 correct

    @property
    def total(self) -> int:
        return self.both_correct + self.both_wrong + self.h1c_h2w + self.h1w_h2c


@dataclass(frozen=True)
class CompatibilityReport:
    btc: float
    bec: float
    quadrants: Quadrants
    acc_h1: float
    acc_h2: float
    accuracy_gain: float
    degenerate_flags: frozenset[str]
    incompatible_ids: tuple[str, ...]


@dataclass(frozen=True)
class GroupRow:
    group: str
    n: int
    acc_h1: float
    acc_h2: float
    gain: float
    incompatible_count: int
    incompatible_share: float


@dataclass(frozen=True)
class ConfidenceHistogram:
    model: str  # "h1" | "h2"
    edges: tuple[float, ...]  # bin_count + 1 uniform edges over [1/|labels|, 1]
    counts: tuple[int, ...]


def align(
    log_h1: PredictionLog, log_h2: PredictionLog, allow_partial: bool = False
) -> UpdateComparison:
    """Pair two logs on their shared example ids, in log_h1 order.

    Strict by default: differing id sets raise unless ``allow_partial``.
    """
    if tuple(log_h1.label_set) != tuple(log_h2.label_set):
        raise LabelSetMismatch(
            f"label sets differ: {list(log_h1.label_set)} vs {list(log_h2.label_set)}"
        )
    ids1 = set(log_h1.by_id)
    ids2 = set(log_h2.by_id)
    if not allow_partial and ids1 != ids2:
        only1 = sorted(ids1 - ids2)[:5]
        only2 = sorted(ids2 - ids1)[:5]
        raise IdSetMismatch(
            f"id sets differ (use allow_partial to align on the intersection); "
            f"e.g. only in {log_h1.model_id!r}: {only1}, only in {log_h2.model_id!r}: {only2}"
        )
    aligned = tuple(r.example_id for r in log_h1.records if r.example_id in ids2)
    if not aligned:
        raise EmptyIntersection("the logs share no example ids")
    return UpdateComparison(log_h1=log_h1, log_h2=log_h2, aligned_ids=aligned)


def _correctness(cmp: UpdateComparison) -> tuple[np.ndarray, np.ndarray]:
    by1, by2 = cmp.log_h1.by_id, cmp.log_h2.by_id
    c1 = np.fromiter((by1[i].correct for i in cmp.aligned_ids), dtype=bool)
    c2 = np.fromiter((by2[i].correct for i in cmp.aligned_ids), dtype=bool)
    return c1, c2


def _btc(c1: np.ndarray, c2: np.ndarray) -> tuple[float, bool]:
    denom = int(c1.sum())
    if denom == 0:
        return 1.0, True
    return float((c1 & c2).sum() / denom), False


def _bec(c1: np.ndarray, c2: np.ndarray) -> tuple[float, bool]:
    denom = int((~c2).sum())
    if denom == 0:
        return 1.0, True
    return float((~c1 & ~c2).sum() / denom), False


def btc(cmp: UpdateComparison) -> float:
    """Backward Trust Compatibility; 1.0 when h1 is correct nowhere."""
    value, _ = _btc(*_correctness(cmp))
    return value


def bec(cmp: UpdateComparison) -> float:
    """Backward Error Compatibility; 1.0 when h2 makes no errors."""
    value, _ = _bec(*_correctness(cmp))
    return value


def compare(cmp: UpdateComparison) -> CompatibilityReport:
    """Full report: BTC, BEC, quadrants, accuracies, incompatible points."""
    c1, c2 = _correctness(cmp)
    n = len(cmp.aligned_ids)
    quadrants = Quadrants(
        both_correct=int((c1 & c2).sum()),
        both_wrong=int((~c1 & ~c2).sum()),
        h1c_h2w=int((c1 & ~c2).sum()),
        h1w_h2c=int((~c1 & c2).sum()),
    )
    btc_value, btc_degenerate = _btc(c1, c2)
    bec_value, bec_degenerate = _bec(c1, c2)
    flags = set()
    if btc_degenerate:
        flags.add(BTC_DENOM_ZERO)
    if bec_degenerate:
        flags.add(BEC_DENOM_ZERO)
    acc1 = float(c1.sum() / n)
    acc2 = float(c2.sum() / n)
    incompatible = tuple(
        sorted(i for i, a, b in zip(cmp.aligned_ids, c1, c2) if a and not b)
    )
    return CompatibilityReport(
        btc=btc_value,
        bec=bec_value,
        quadrants=quadrants,
        acc_h1=acc1,
        acc_h2=acc2,
        accuracy_gain=acc2 - acc1,
        degenerate_flags=frozenset(flags),
        incompatible_ids=incompatible,
    )


def _tag_value(record_groups: frozenset[str] | None, namespace: str, example_id: str) -> str:
    if not record_groups:
        return UNTAGGED
    prefix = namespace + ":"
    values = sorted(g[len(prefix):] for g in record_groups if g.startswith(prefix))
    if len(values) > 1:
        raise ValidationError(
            f"record {example_id!r} carries {len(values)} tags in namespace {namespace!r}; "
            f"grouping needs at most one"
        )
    return values[0] if values else UNTAGGED


def group_breakdown(cmp: UpdateComparison, by_tag: str | None = None) -> list[GroupRow]:
    """Per-group accuracies, gain, and incompatible-point concentration.

    Groups by true label, or by the value of the ``namespace:value`` tag
    carried in ``by_tag``'s namespace (tags read from log_h1; records without
    one fall into an ``(untagged)`` row). Rows partition the aligned ids, so
    they aggregate exactly to the global quadrant counts.
    """
    by1 = cmp.log_h1.by_id
    if by_tag is not None:
        prefix = by_tag + ":"
        if not any(
            by1[i].groups and any(g.startswith(prefix) for g in by1[i].groups)
            for i in cmp.aligned_ids
        ):
            raise UnknownTagNamespace(f"no record carries a tag in namespace {by_tag!r}")
        keys = [_tag_value(by1[i].groups, by_tag, i) for i in cmp.aligned_ids]
    else:
        keys = [str(by1[i].true_label) for i in cmp.aligned_ids]

    c1, c2 = _correctness(cmp)
    total_incompatible = int((c1 & ~c2).sum())
    rows = []
    for group in sorted(set(keys)):
        mask = np.fromiter((k == group for k in keys), dtype=bool)
        n = int(mask.sum())
        g1 = float(c1[mask].sum() / n)
        g2 = float(c2[mask].sum() / n)
        inc = int((c1[mask] & ~c2[mask]).sum())
        share = inc / total_incompatible if total_incompatible else 0.0
        rows.append(
            GroupRow(
                group=group,
                n=n,
                acc_h1=g1,
                acc_h2=g2,
                gain=g2 - g1,
                incompatible_count=inc,
                incompatible_share=share,
            )
        )
    return rows


def confidence_histogram(
    cmp: UpdateComparison, which_model: str, bin_count: int
) -> ConfidenceHistogram:
    """Histogram of the chosen model's confidence on incompatible points.

    Bins are uniform over [1/|labels|, 1], the range of a max-softmax score;
    out-of-range confidences are clamped into it so counts always sum to the
    incompatible-point count.
    """
    if which_model not in ("h1", "h2"):
        raise ValidationError(f"which_model must be 'h1' or 'h2', got {which_model!r}")
    if bin_count < 1:
        raise ValidationError("bin_count must be positive")
    c1, c2 = _correctness(cmp)
    incompatible = [i for i, a, b in zip(cmp.aligned_ids, c1, c2) if a and not b]
    log = cmp.log_h1 if which_model == "h1" else cmp.log_h2
    missing = [i for i in incompatible if log.by_id[i].confidence is None]
    if missing:
        raise MissingConfidence(which_model, sorted(missing))
    lo = 1.0 / len(cmp.log_h1.label_set)
    values = np.clip([log.by_id[i].confidence for i in incompatible], lo, 1.0)
    counts, edges = np.histogram(values, bins=bin_count, range=(lo, 1.0))
    return ConfidenceHistogram(
        model=which_model,
        edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
    )
