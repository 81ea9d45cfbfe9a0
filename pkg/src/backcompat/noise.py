"""Structured dataset corruptions, deterministic under a seed.

Four kinds: pairwise label swap, rectangular feature occlusion, outlier-class
merge, and group-biased label flip. Per-instance Bernoulli draws are keyed by
example_id (not sequence position), so shuffling a dataset does not change
which instances get corrupted, and equal (dataset, spec) inputs produce
byte-identical outputs on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .errors import (
    BadAreaFraction,
    IdenticalPair,
    NoShape,
    NotBinary,
    UnknownGroup,
    UnknownLabel,
    ValidationError,
)
from .rng import stream

LABEL_SWAP = "label_swap"
FEATURE_OCCLUSION = "feature_occlusion"
OUTLIER_MERGE = "outlier_merge"
GROUP_FLIP = "group_flip"

NOISE_KINDS = (LABEL_SWAP, FEATURE_OCCLUSION, OUTLIER_MERGE, GROUP_FLIP)


@dataclass(frozen=True)
class NoiseSpec:
    """Declarative description of one corruption; ``params`` are kind-specific:

    - label_swap: {"label_a", "label_b"}
    - feature_occlusion: {"target_label", "area_fraction"?, "fill_value"?}
    - outlier_merge: {"outlier_label", "target_label"}
    - group_flip: {"group_tag"}
    """

    kind: str
    rate: float
    seed: int
    params: dict

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValidationError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        _check_rate(self.rate)


def _check_rate(rate: float) -> None:
    if not (0.0 <= rate <= 1.0):
        raise ValidationError(f"rate {rate} outside [0, 1]")


def _check_label(d: Dataset, label: int, what: str) -> None:
    if label not in d.label_set:
        raise UnknownLabel(f"{what} {label} not in label set {list(d.label_set)}")


def _selected(seed: int, kind: str, example_id: str, rate: float) -> bool:
    # random() < 1.0 always holds, so rate 1 selects everything and rate 0 nothing.
    return stream(seed, kind, example_id).random() < rate


def inject_label_noise(
    d: Dataset, pair: tuple[int, int], rate: float, seed: int
) -> Dataset:
    """Swap labels within a confusable pair, each instance independently
    with probability ``rate``. At rate 1 this is an involution."""
    label_a, label_b = pair
    _check_rate(rate)
    _check_label(d, label_a, "label_a")
    _check_label(d, label_b, "label_b")
    if label_a == label_b:
        raise IdenticalPair(f"label pair must be distinct, got ({label_a}, {label_b})")
    labels = d.labels.copy()
    for i, example_id in enumerate(d.ids):
        if labels[i] == label_a or labels[i] == label_b:
            if _selected(seed, LABEL_SWAP, example_id, rate):
                labels[i] = label_b if labels[i] == label_a else label_a
    return replace(d, labels=labels)


def _occlusion_rect(area_fraction: float, height: int, width: int) -> tuple[int, int]:
    # Near-square rectangle covering at least ceil(area_fraction * H * W)
    # pixels (exactly that many whenever the target area factors as h*w).
    target = math.ceil(area_fraction * height * width)
    h = min(math.ceil(math.sqrt(target)), height)
    w = min(math.ceil(target / h), width)
    if h * w < target:
        h = min(math.ceil(target / w), height)
    return h, w


def inject_feature_occlusion(
    d: Dataset,
    target_label: int,
    rate: float,
    area_fraction: float = 0.2,
    fill_value: float = 0.0,
    seed: int = 0,
) -> Dataset:
    """Occlude target-class images with one axis-aligned constant-fill
    rectangle at a uniformly random position; labels are untouched."""
    if d.feature_shape is None:
        raise NoShape("feature occlusion needs image-shaped features (feature_shape)")
    if not (0.0 < area_fraction < 1.0):
        raise BadAreaFraction(f"area_fraction must be in (0, 1), got {area_fraction}")
    _check_rate(rate)
    _check_label(d, target_label, "target_label")
    height, width, channels = d.feature_shape
    rect_h, rect_w = _occlusion_rect(area_fraction, height, width)
    features = d.features.copy()
    for i, example_id in enumerate(d.ids):
        if d.labels[i] != target_label:
            continue
        g = stream(seed, FEATURE_OCCLUSION, example_id)
        if g.random() >= rate:
            continue
        row = int(g.integers(0, height - rect_h + 1))
        col = int(g.integers(0, width - rect_w + 1))
        image = features[i].reshape(height, width, channels)
        image[row : row + rect_h, col : col + rect_w, :] = fill_value
    return replace(d, features=features)


def inject_outlier_noise(
    base: Dataset, outlier_label: int, target_label: int, rate: float, seed: int
) -> Dataset:
    """Convert the task to n-1 classes: the outlier class leaves the label
    set; each outlier instance is kept under ``target_label`` with
    probability ``rate`` and dropped otherwise."""
    _check_rate(rate)
    _check_label(base, outlier_label, "outlier_label")
    _check_label(base, target_label, "target_label")
    if outlier_label == target_label:
        raise IdenticalPair(f"outlier and target labels must differ, got {outlier_label}")
    keep: list[int] = []
    labels = base.labels.copy()
    for i, example_id in enumerate(base.ids):
        if labels[i] != outlier_label:
            keep.append(i)
        elif _selected(seed, OUTLIER_MERGE, example_id, rate):
            labels[i] = target_label
            keep.append(i)
    keep_idx = np.array(keep, dtype=np.intp)
    return replace(
        base,
        ids=tuple(base.ids[i] for i in keep),
        features=base.features[keep_idx],
        labels=labels[keep_idx],
        groups=None if base.groups is None else tuple(base.groups[i] for i in keep),
        label_set=tuple(l for l in base.label_set if l != outlier_label),
    )


def inject_group_flip(d: Dataset, group_tag: str, rate: float, seed: int) -> Dataset:
    """Flip the binary label of instances carrying ``group_tag``, each
    independently with probability ``rate``."""
    if len(d.label_set) != 2:
        raise NotBinary(f"group flip needs a binary task, got {len(d.label_set)} labels")
    _check_rate(rate)
    if d.groups is None or not any(g and group_tag in g for g in d.groups):
        raise UnknownGroup(f"no instance carries group tag {group_tag!r}")
    a, b = d.label_set
    labels = d.labels.copy()
    for i, example_id in enumerate(d.ids):
        if d.groups[i] and group_tag in d.groups[i]:
            if _selected(seed, GROUP_FLIP, example_id, rate):
                labels[i] = b if labels[i] == a else a
    return replace(d, labels=labels)


def apply_noise(d: Dataset, spec: NoiseSpec) -> Dataset:
    """Dispatch a NoiseSpec to its injection."""
    p = spec.params
    if spec.kind == LABEL_SWAP:
        return inject_label_noise(d, (p["label_a"], p["label_b"]), spec.rate, spec.seed)
    if spec.kind == FEATURE_OCCLUSION:
        return inject_feature_occlusion(
            d,
            p["target_label"],
            spec.rate,
            area_fraction=p.get("area_fraction", 0.2),
            fill_value=p.get("fill_value", 0.0),
            seed=spec.seed,
        )
    if spec.kind == OUTLIER_MERGE:
        return inject_outlier_noise(d, p["outlier_label"], p["target_label"], spec.rate, spec.seed)
    if spec.kind == GROUP_FLIP:
        return inject_group_flip(d, p["group_tag"], spec.rate, spec.seed)
    raise ValidationError(f"unknown noise kind {spec.kind!r}")  # unreachable after __post_init__
