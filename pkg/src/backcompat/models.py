"""Model parameters, scoring, and prediction-log emission.

Two architectures: multinomial logistic regression ("linear") and a
one-hidden-layer rectifier MLP ("mlp"). Layers are stored as plain float64
arrays; serialization is a human-diffable JSON object
``{arch, label_set, feature_dim, layers: [{rows, cols, data}]}`` with data
row-major (bias vectors are rows x 1 entries).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import ShapeMismatch, ValidationError
from .logs import PredictionLog, PredictionRecord

LINEAR = "linear"
MLP = "mlp"


@dataclass(frozen=True, eq=False)
class ModelParams:
    arch: str  # LINEAR | MLP
    label_set: tuple[int, ...]
    feature_dim: int
    layers: tuple[np.ndarray, ...]  # linear: (W, b); mlp: (W1, b1, W2, b2)
    hidden_units: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "label_set", tuple(self.label_set))
        frozen = []
        for layer in self.layers:
            arr = np.array(layer, dtype=np.float64)
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "layers", tuple(frozen))
        n_classes = len(self.label_set)
        if self.arch == LINEAR:
            expected = [(n_classes, self.feature_dim), (n_classes,)]
        elif self.arch == MLP:
            if not self.hidden_units or self.hidden_units < 1:
                raise ValidationError("mlp needs hidden_units >= 1")
            h = self.hidden_units
            expected = [(h, self.feature_dim), (h,), (n_classes, h), (n_classes,)]
        else:
            raise ValidationError(f"unknown arch {self.arch!r}")
        shapes = [layer.shape for layer in self.layers]
        if shapes != expected:
            raise ShapeMismatch(f"arch {self.arch!r} expects layer shapes {expected}, got {shapes}")


def params_equal(a: ModelParams, b: ModelParams) -> bool:
    return (
        a.arch == b.arch
        and a.label_set == b.label_set
        and a.feature_dim == b.feature_dim
        and a.hidden_units == b.hidden_units
        and len(a.layers) == len(b.layers)
        and all(np.array_equal(x, y) for x, y in zip(a.layers, b.layers))
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stable under large logits."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def scores(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Class logits for a (n, feature_dim) batch."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != params.feature_dim:
        raise ShapeMismatch(
            f"expected features of shape (n, {params.feature_dim}), got {features.shape}"
        )
    if params.arch == LINEAR:
        weights, bias = params.layers
        return features @ weights.T + bias
    w1, b1, w2, b2 = params.layers
    hidden = np.maximum(features @ w1.T + b1, 0.0)
    return hidden @ w2.T + b2


def predicted_indices(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Argmax class indices (ties resolve to the lowest index)."""
    return scores(params, features).argmax(axis=1)


def predict(params: ModelParams, d: Dataset, model_id: str = "model") -> PredictionLog:
    """Evaluate the model on a dataset: argmax labels, max-softmax
    confidences, dataset group tags carried through to the records."""
    if tuple(d.label_set) != tuple(params.label_set):
        raise ShapeMismatch(
            f"dataset label set {list(d.label_set)} != model label set {list(params.label_set)}"
        )
    probs = softmax(scores(params, d.features))
    pred_idx = probs.argmax(axis=1)
    conf = probs[np.arange(len(d)), pred_idx]
    records = tuple(
        PredictionRecord(
            example_id=d.ids[i],
            true_label=int(d.labels[i]),
            predicted_label=int(params.label_set[pred_idx[i]]),
            confidence=float(conf[i]),
            groups=None if d.groups is None else d.groups[i],
        )
        for i in range(len(d))
    )
    return PredictionLog(model_id=model_id, label_set=params.label_set, records=records)


def save_params(params: ModelParams, path: str | Path) -> None:
    def entry(arr: np.ndarray) -> dict:
        mat = arr.reshape(arr.shape[0], -1) if arr.ndim == 1 else arr
        rows, cols = (arr.shape[0], 1) if arr.ndim == 1 else arr.shape
        return {"rows": rows, "cols": cols, "data": mat.reshape(-1).tolist()}

    doc = {
        "arch": params.arch,
        "label_set": list(params.label_set),
        "feature_dim": params.feature_dim,
        "layers": [entry(layer) for layer in params.layers],
    }
    if params.arch == MLP:
        doc["hidden_units"] = params.hidden_units
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_params(path: str | Path) -> ModelParams:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        arch = doc["arch"]
        label_set = tuple(int(l) for l in doc["label_set"])
        feature_dim = int(doc["feature_dim"])
        raw = [
            np.array(entry["data"], dtype=np.float64).reshape(entry["rows"], entry["cols"])
            for entry in doc["layers"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed model file: {exc}") from exc
    layers = tuple(arr[:, 0] if arr.shape[1] == 1 and i % 2 == 1 else arr for i, arr in enumerate(raw))
    return ModelParams(
        arch=arch,
        label_set=label_set,
        feature_dim=feature_dim,
        layers=layers,
        hidden_units=doc.get("hidden_units"),
    )
