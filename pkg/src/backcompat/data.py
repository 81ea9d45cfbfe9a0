"""Datasets: dense numeric feature vectors with integer labels.

File format (JSON Lines): a header object
``{"label_set": [...], "feature_shape": [h, w, c] | null}`` followed by one
``{"id": ..., "x": [floats], "y": int, "groups": [...] | null}`` per instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True, eq=False)
class Dataset:
    ids: tuple[str, ...]
    features: np.ndarray  # (n, d) float64, read-only
    labels: np.ndarray  # (n,) int64, read-only
    label_set: tuple[int, ...]
    groups: tuple[frozenset[str] | None, ...] | None = None
    feature_shape: tuple[int, int, int] | None = None
    dataset_id: str = ""

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "label_set", tuple(self.label_set))
        if self.groups is not None:
            object.__setattr__(self, "groups", tuple(self.groups))
        if self.feature_shape is not None:
            object.__setattr__(self, "feature_shape", tuple(self.feature_shape))

        if features.ndim != 2:
            raise ValidationError(f"features must be 2-d, got shape {features.shape}")
        n = features.shape[0]
        if len(self.ids) != n or labels.shape != (n,):
            raise ValidationError("ids, features, and labels must agree in length")
        if len(set(self.ids)) != n:
            raise ValidationError("duplicate example ids")
        if not self.label_set or len(set(self.label_set)) != len(self.label_set):
            raise ValidationError("label set must be non-empty and duplicate-free")
        if n and not np.isin(labels, self.label_set).all():
            bad = sorted(set(labels.tolist()) - set(self.label_set))
            raise ValidationError(f"labels {bad} not in the label set")
        if self.groups is not None and len(self.groups) != n:
            raise ValidationError("groups must match the instance count")
        if self.feature_shape is not None:
            h, w, c = self.feature_shape
            if h * w * c != features.shape[1]:
                raise ValidationError(
                    f"feature_shape {self.feature_shape} does not match "
                    f"feature length {features.shape[1]}"
                )

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: np.ndarray, dataset_id: str | None = None) -> "Dataset":
        indices = np.asarray(indices)
        return replace(
            self,
            ids=tuple(self.ids[i] for i in indices),
            features=self.features[indices],
            labels=self.labels[indices],
            groups=None if self.groups is None else tuple(self.groups[i] for i in indices),
            dataset_id=self.dataset_id if dataset_id is None else dataset_id,
        )

    def drop_labels(self, labels: list[int] | tuple[int, ...]) -> "Dataset":
        """Remove whole classes: their instances leave and the label set
        shrinks (as when a class is declared out-of-task)."""
        dropped = set(labels)
        missing = dropped - set(self.label_set)
        if missing:
            raise ValidationError(f"cannot drop labels {sorted(missing)}: not in the label set")
        if not set(self.label_set) - dropped:
            raise ValidationError("cannot drop every label")
        keep = np.flatnonzero(~np.isin(self.labels, list(dropped)))
        pruned = self.subset(keep)
        return replace(pruned, label_set=tuple(l for l in self.label_set if l not in dropped))


def load_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    label_set: tuple[int, ...] | None = None
    feature_shape = None
    ids: list[str] = []
    rows: list[list[float]] = []
    labels: list[int] = []
    groups: list[frozenset[str] | None] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), lineno, f"invalid JSON ({exc.msg})") from exc
            if label_set is None:
                if "label_set" not in obj:
                    raise ParseError(str(path), lineno, "header must carry label_set")
                label_set = tuple(obj["label_set"])
                shape = obj.get("feature_shape")
                feature_shape = None if shape is None else tuple(shape)
                continue
            try:
                ids.append(str(obj["id"]))
                rows.append([float(v) for v in obj["x"]])
                labels.append(int(obj["y"]))
                g = obj.get("groups")
                groups.append(None if g is None else frozenset(g))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(str(path), lineno, f"bad instance: {exc}") from exc
    if label_set is None:
        raise ParseError(str(path), 1, "empty file: missing header")
    try:
        features = np.array(rows, dtype=np.float64) if rows else np.zeros((0, 0))
    except ValueError as exc:
        raise ParseError(str(path), 1, f"feature vectors differ in length: {exc}") from exc
    if features.ndim != 2:
        raise ParseError(str(path), 1, "feature vectors differ in length")
    try:
        return Dataset(
            ids=tuple(ids),
            features=features,
            labels=np.array(labels, dtype=np.int64),
            label_set=label_set,
            groups=tuple(groups) if any(g is not None for g in groups) else None,
            feature_shape=feature_shape,
            dataset_id=path.stem,
        )
    except ValidationError as exc:
        raise ParseError(str(path), 1, str(exc)) from exc


def save_dataset(d: Dataset, path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            json.dumps(
                {
                    "label_set": list(d.label_set),
                    "feature_shape": None if d.feature_shape is None else list(d.feature_shape),
                }
            )
            + "\n"
        )
        for i, example_id in enumerate(d.ids):
            g = None if d.groups is None or d.groups[i] is None else sorted(d.groups[i])
            fh.write(
                json.dumps(
                    {
                        "id": example_id,
                        "x": d.features[i].tolist(),
                        "y": int(d.labels[i]),
                        "groups": g,
                    }
                )
                + "\n"
            )
