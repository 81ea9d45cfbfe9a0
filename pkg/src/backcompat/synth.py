"""Synthetic datasets for desk-scale experiments.

Four kinds, all balanced across classes and deterministic per seed:

- blobs-binary: two Gaussian blobs at -sep and +sep per axis; ``sep`` tunes
  the overlap (0.5 gives substantial overlap, 2.0 is near-separable).
- blobs-multi: k Gaussian clusters with mean scale * e_k on orthogonal axes
  (feature dim = class count), all class pairs equally confusable.
- glyph-grid: 12x12x1 images built from per-class random glyph templates
  plus pixel noise; templates come from ``concept_seed`` so train/test
  splits share the same classes.
- token-groups: binary bag-of-tokens sentiment with a planted "comedy"
  subgroup (tag ``genre:comedy``, 20% of documents by default) that carries
  its sentiment in genre-specific token blocks; the rest are tagged
  ``genre:other``.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .errors import ValidationError
from .rng import stream


def _balanced_labels(size: int, classes: int) -> np.ndarray:
    # size // classes each, remainder spread over the first classes
    counts = [size // classes + (1 if c < size % classes else 0) for c in range(classes)]
    return np.repeat(np.arange(classes), counts)


def make_blobs_binary(size: int, seed: int, sep: float = 0.5, dim: int = 2) -> Dataset:
    rng = stream(seed, "blobs-binary")
    labels = _balanced_labels(size, 2)
    means = np.where(labels[:, None] == 0, -sep, +sep)
    features = rng.normal(0.0, 1.0, size=(size, dim)) + means
    return Dataset(
        ids=tuple(f"bb{i:06d}" for i in range(size)),
        features=features,
        labels=labels,
        label_set=(0, 1),
        dataset_id=f"blobs-binary-s{seed}-n{size}",
    )


def make_blobs_multi(size: int, seed: int, classes: int = 10, scale: float = 2.2) -> Dataset:
    rng = stream(seed, "blobs-multi")
    labels = _balanced_labels(size, classes)
    means = scale * np.eye(classes)[labels]
    features = rng.normal(0.0, 1.0, size=(size, classes)) + means
    return Dataset(
        ids=tuple(f"bm{i:06d}" for i in range(size)),
        features=features,
        labels=labels,
        label_set=tuple(range(classes)),
        dataset_id=f"blobs-multi-s{seed}-n{size}",
    )


def make_glyph_grid(
    size: int, seed: int, classes: int = 8, noise: float = 0.3, concept_seed: int = 0
) -> Dataset:
    template_rng = stream(concept_seed, "glyph-templates")
    templates = (template_rng.random(size=(classes, 12, 12)) < 0.35).astype(np.float64)
    rng = stream(seed, "glyph-grid")
    labels = _balanced_labels(size, classes)
    features = templates[labels].reshape(size, 144)
    features = np.clip(features + rng.normal(0.0, noise, size=(size, 144)), 0.0, 1.0)
    return Dataset(
        ids=tuple(f"gg{i:06d}" for i in range(size)),
        features=features,
        labels=labels,
        label_set=tuple(range(classes)),
        feature_shape=(12, 12, 1),
        dataset_id=f"glyph-grid-s{seed}-n{size}",
    )


# token-groups vocabulary blocks. Comedy documents voice sentiment through
# their own genre vocabulary, so group-biased label flips collapse exactly
# the weights that comedy documents depend on.
_TG_VOCAB = 40
_TG_GEN_POS = np.arange(0, 10)
_TG_GEN_NEG = np.arange(10, 20)
_TG_COM_POS = np.arange(20, 26)
_TG_COM_NEG = np.arange(26, 32)
_TG_FILLER = np.arange(32, 40)


def make_token_groups(size: int, seed: int, group_frac: float = 0.2) -> Dataset:
    rng = stream(seed, "token-groups")
    labels = _balanced_labels(size, 2)
    n_comedy = round(size * group_frac)
    # spread the comedy tag evenly across both classes
    comedy = np.zeros(size, dtype=bool)
    comedy[np.linspace(0, size - 1, n_comedy).astype(int)] = True
    features = np.zeros((size, _TG_VOCAB))

    def add(i: int, block: np.ndarray, count: int) -> None:
        for token in rng.choice(block, size=count):
            features[i, token] += 1.0

    for i in range(size):
        positive = labels[i] == 1
        if comedy[i]:
            # generic evidence is ambiguous (1 vs 1); sentiment rides on the
            # comedy blocks, which group-biased flips then corrupt
            add(i, _TG_GEN_POS if positive else _TG_GEN_NEG, 1)
            add(i, _TG_GEN_NEG if positive else _TG_GEN_POS, 1)
            add(i, _TG_COM_POS if positive else _TG_COM_NEG, 3)
            add(i, _TG_COM_NEG if positive else _TG_COM_POS, 2)
        else:
            add(i, _TG_GEN_POS if positive else _TG_GEN_NEG, 3)
            add(i, _TG_GEN_NEG if positive else _TG_GEN_POS, 2)
        add(i, _TG_FILLER, 3)
    groups = tuple(
        frozenset({"genre:comedy"}) if comedy[i] else frozenset({"genre:other"})
        for i in range(size)
    )
    return Dataset(
        ids=tuple(f"tg{i:06d}" for i in range(size)),
        features=features,
        labels=labels,
        label_set=(0, 1),
        groups=groups,
        dataset_id=f"token-groups-s{seed}-n{size}",
    )


def stratified_head(d: Dataset, size: int) -> Dataset:
    """The first ceil/floor-balanced ``size`` instances per class, in dataset
    order; ids are a subset of ``d``'s, as the noisy-update setting requires."""
    if not (0 < size <= len(d)):
        raise ValidationError(f"subset size {size} outside (0, {len(d)}]")
    per_class = _balanced_labels(size, len(d.label_set))
    want = {label: int((per_class == i).sum()) for i, label in enumerate(d.label_set)}
    taken: list[int] = []
    for i in range(len(d)):
        label = int(d.labels[i])
        if want[label] > 0:
            want[label] -= 1
            taken.append(i)
    if any(want.values()):
        raise ValidationError("dataset too small per class for a balanced subset")
    return d.subset(np.array(taken, dtype=np.intp), dataset_id=f"{d.dataset_id}-head{size}")


SYNTH_KINDS = {
    "blobs-binary": make_blobs_binary,
    "blobs-multi": make_blobs_multi,
    "glyph-grid": make_glyph_grid,
    "token-groups": make_token_groups,
}


def make_dataset(kind: str, size: int, seed: int, **params) -> Dataset:
    if kind not in SYNTH_KINDS:
        raise ValidationError(f"unknown dataset kind {kind!r}; expected one of {sorted(SYNTH_KINDS)}")
    if size < 1:
        raise ValidationError("size must be positive")
    return SYNTH_KINDS[kind](size, seed, **params)
