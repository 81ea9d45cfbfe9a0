"""Desk-scale SGD training with seed control and compatibility penalty.

The loss is softmax cross-entropy; with a reference model h1 and penalty
lambda_c it becomes, per example,

    L_c = L + lambda_c * 1(h1(x) = y) * L

i.e. examples the reference model gets right are up-weighted by
(1 + lambda_c). The indicator is computed once from the frozen reference
model; no gradient flows through it. Training is plain constant-rate
minibatch SGD: no momentum, no weight decay, no schedule. A full run is a
pure function of (dataset, config), bit-reproducible from cfg.seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import (
    EmptyDataset,
    MissingReferenceModel,
    ParseError,
    ShapeMismatch,
    ValidationError,
)
from .models import LINEAR, MLP, ModelParams, predicted_indices
from .rng import stream


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int
    arch: str = LINEAR
    hidden_units: int | None = None
    warm_start_from: ModelParams | None = None
    lambda_c: float = 0.0
    reference_model: ModelParams | None = None
    shuffle_each_epoch: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if self.lambda_c < 0:
            raise ValidationError("lambda_c must be non-negative")
        if self.lambda_c > 0 and self.reference_model is None:
            raise MissingReferenceModel("lambda_c > 0 requires a reference_model")


@dataclass(frozen=True, eq=False)
class EpochEvalLog:
    """Per-epoch correctness bits over one evaluation dataset."""

    dataset_id: str
    example_ids: tuple[str, ...]
    correct: np.ndarray  # (epochs, n) bool

    def __post_init__(self):
        arr = np.array(self.correct, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "correct", arr)
        object.__setattr__(self, "example_ids", tuple(self.example_ids))
        if arr.ndim != 2 or arr.shape[1] != len(self.example_ids):
            raise ValidationError(
                f"correctness matrix {arr.shape} does not match {len(self.example_ids)} ids"
            )

    @property
    def epochs(self) -> int:
        return int(self.correct.shape[0])


def _label_indices(d: Dataset) -> np.ndarray:
    index = {label: i for i, label in enumerate(d.label_set)}
    return np.fromiter((index[int(l)] for l in d.labels), dtype=np.int64, count=len(d))


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _forward_backward(
    arch: str,
    layers: list[np.ndarray],
    features: np.ndarray,
    y_idx: np.ndarray,
    weights: np.ndarray,
) -> tuple[float, list[np.ndarray]]:
    n = features.shape[0]
    if arch == LINEAR:
        w, b = layers
        logits = features @ w.T + b
        logp = _log_softmax(logits)
        value = float(-(weights * logp[np.arange(n), y_idx]).mean())
        delta = np.exp(logp)
        delta[np.arange(n), y_idx] -= 1.0
        delta *= weights[:, None] / n
        return value, [delta.T @ features, delta.sum(axis=0)]
    w1, b1, w2, b2 = layers
    pre = features @ w1.T + b1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ w2.T + b2
    logp = _log_softmax(logits)
    value = float(-(weights * logp[np.arange(n), y_idx]).mean())
    delta = np.exp(logp)
    delta[np.arange(n), y_idx] -= 1.0
    delta *= weights[:, None] / n
    d_hidden = delta @ w2
    d_hidden[pre <= 0.0] = 0.0
    return value, [d_hidden.T @ features, d_hidden.sum(axis=0), delta.T @ hidden, delta.sum(axis=0)]


def loss_and_grads(
    params: ModelParams, features: np.ndarray, y_idx: np.ndarray, weights: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Weighted-mean cross-entropy and its analytic gradients.

    ``weights`` are the per-example factors (1 + lambda_c * indicator);
    the value returned is mean_i weights[i] * CE_i.
    """
    return _forward_backward(params.arch, list(params.layers), features, y_idx, weights)


def _reference_weights(cfg: TrainConfig, d: Dataset, y_idx: np.ndarray) -> np.ndarray:
    if cfg.lambda_c == 0.0:
        return np.ones(len(d))
    ref = cfg.reference_model
    if tuple(ref.label_set) != tuple(d.label_set):
        raise ShapeMismatch("reference model label set does not match the dataset")
    ref_correct = predicted_indices(ref, d.features) == y_idx
    return 1.0 + cfg.lambda_c * ref_correct.astype(np.float64)


def loss(params: ModelParams, batch: tuple[np.ndarray, np.ndarray], cfg: TrainConfig) -> float:
    """Mean compatibility-penalized cross-entropy over a (features, labels)
    batch; reduces to plain cross-entropy at lambda_c = 0."""
    features, labels = np.asarray(batch[0], dtype=np.float64), np.asarray(batch[1])
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValidationError("batch must be a non-empty 2-d feature array")
    index = {label: i for i, label in enumerate(params.label_set)}
    y_idx = np.fromiter((index[int(l)] for l in labels), dtype=np.int64, count=len(labels))
    if cfg.lambda_c == 0.0:
        weights = np.ones(len(labels))
    else:
        ref_correct = predicted_indices(cfg.reference_model, features) == y_idx
        weights = 1.0 + cfg.lambda_c * ref_correct.astype(np.float64)
    value, _ = loss_and_grads(params, features, y_idx, weights)
    return value


def _cold_start(cfg: TrainConfig, d: Dataset) -> ModelParams:
    # Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer keeps the initial
    # softmax near uniform at any feature scale.
    rng = stream(cfg.seed, "init")
    n_classes = len(d.label_set)
    if cfg.arch == LINEAR:
        shapes = [(n_classes, d.feature_dim), (n_classes,)]
        fan_in = [d.feature_dim, d.feature_dim]
    elif cfg.arch == MLP:
        if not cfg.hidden_units or cfg.hidden_units < 1:
            raise ValidationError("mlp needs hidden_units >= 1")
        h = cfg.hidden_units
        shapes = [(h, d.feature_dim), (h,), (n_classes, h), (n_classes,)]
        fan_in = [d.feature_dim, d.feature_dim, h, h]
    else:
        raise ValidationError(f"unknown arch {cfg.arch!r}")
    layers = []
    for shape, fan in zip(shapes, fan_in):
        bound = 1.0 / np.sqrt(fan)
        layers.append(rng.uniform(-bound, bound, size=shape))
    return ModelParams(
        arch=cfg.arch,
        label_set=d.label_set,
        feature_dim=d.feature_dim,
        layers=tuple(layers),
        hidden_units=cfg.hidden_units if cfg.arch == MLP else None,
    )


def train(
    d: Dataset, cfg: TrainConfig, eval_sets: list[Dataset] | tuple[Dataset, ...] = ()
) -> tuple[ModelParams, list[EpochEvalLog]]:
    """Train on ``d``; evaluate every eval set at the end of each epoch.

    With ``warm_start_from`` the epoch-0 parameters equal it exactly, so
    epochs=0 returns it unchanged. Bit-reproducible given cfg.seed.
    """
    if len(d) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    for e in eval_sets:
        if tuple(e.label_set) != tuple(d.label_set):
            raise ValidationError(
                f"eval set {e.dataset_id!r} label set differs from the training set"
            )
        if e.feature_dim != d.feature_dim:
            raise ShapeMismatch(
                f"eval set {e.dataset_id!r} feature dim {e.feature_dim} != {d.feature_dim}"
            )

    if cfg.warm_start_from is not None:
        init = cfg.warm_start_from
        if init.feature_dim != d.feature_dim or tuple(init.label_set) != tuple(d.label_set):
            raise ShapeMismatch("warm-start model does not match the dataset")
        if init.arch != cfg.arch or (cfg.arch == MLP and init.hidden_units != cfg.hidden_units):
            raise ShapeMismatch("warm-start model does not match the configured architecture")
        layers = [layer.copy() for layer in init.layers]
    else:
        layers = [layer.copy() for layer in _cold_start(cfg, d).layers]

    y_idx = _label_indices(d)
    weights = _reference_weights(cfg, d, y_idx)
    eval_idx = [_label_indices(e) for e in eval_sets]
    eval_rows: list[list[np.ndarray]] = [[] for _ in eval_sets]

    def snapshot() -> ModelParams:
        return ModelParams(
            arch=cfg.arch,
            label_set=d.label_set,
            feature_dim=d.feature_dim,
            layers=tuple(layers),
            hidden_units=cfg.hidden_units if cfg.arch == MLP else None,
        )

    rng = stream(cfg.seed, "shuffle")
    n = len(d)
    lr = cfg.learning_rate
    for _ in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle_each_epoch else np.arange(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            _, grads = _forward_backward(cfg.arch, layers, d.features[idx], y_idx[idx], weights[idx])
            layers = [layer - lr * g for layer, g in zip(layers, grads)]
        if eval_sets:
            at_epoch_end = snapshot()
            for j, e in enumerate(eval_sets):
                eval_rows[j].append(predicted_indices(at_epoch_end, e.features) == eval_idx[j])

    final = snapshot()
    logs = [
        EpochEvalLog(
            dataset_id=e.dataset_id,
            example_ids=e.ids,
            correct=np.array(eval_rows[j], dtype=bool).reshape(cfg.epochs, len(e)),
        )
        for j, e in enumerate(eval_sets)
    ]
    return final, logs


def save_epoch_log(log: EpochEvalLog, path: str | Path) -> None:
    """JSON Lines: a header with the id universe, then one line per epoch
    listing the ids predicted correctly at that epoch's end."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            json.dumps({"dataset_id": log.dataset_id, "example_ids": list(log.example_ids)}) + "\n"
        )
        for epoch in range(log.epochs):
            correct_ids = [log.example_ids[j] for j in np.flatnonzero(log.correct[epoch])]
            fh.write(json.dumps({"epoch": epoch, "correct_ids": correct_ids}) + "\n")


def load_epoch_log(path: str | Path) -> EpochEvalLog:
    path = Path(path)
    header = None
    rows: list[tuple[int, set[str]]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), lineno, f"invalid JSON ({exc.msg})") from exc
            if header is None:
                if "example_ids" not in obj:
                    raise ParseError(str(path), lineno, "header must carry example_ids")
                header = obj
                continue
            if "epoch" not in obj or "correct_ids" not in obj:
                raise ParseError(str(path), lineno, "epoch line must carry epoch and correct_ids")
            rows.append((int(obj["epoch"]), set(obj["correct_ids"])))
    if header is None:
        raise ParseError(str(path), 1, "empty file: missing header")
    ids = tuple(str(i) for i in header["example_ids"])
    id_pos = {example_id: j for j, example_id in enumerate(ids)}
    rows.sort(key=lambda r: r[0])
    correct = np.zeros((len(rows), len(ids)), dtype=bool)
    for k, (_, correct_ids) in enumerate(rows):
        for example_id in correct_ids:
            if example_id not in id_pos:
                raise ParseError(
                    str(path), 1, f"correct id {example_id!r} not in the header id universe"
                )
            correct[k, id_pos[example_id]] = True
    return EpochEvalLog(
        dataset_id=str(header.get("dataset_id", path.stem)), example_ids=ids, correct=correct
    )
