"""Prediction logs: one model's labeled predictions over a test set.

File format (JSON Lines, UTF-8, one object per line):

    {"model_id": "h1", "label_set": [0, 1]}          <- header, line 1
    {"id": "a", "y": 0, "pred": 0, "conf": 0.9, "groups": ["genre:comedy"]}
    ...

``conf`` and ``groups`` may be null or omitted. A CSV variant with columns
``id,y,pred,conf,groups`` (groups semicolon-delimited, empty cells for null)
is accepted with identical semantics; lacking a header object, its model_id
is the file stem and its label set is the sorted union of y and pred values.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import ParseError, ValidationError

_RECORD_KEYS = {"id", "y", "pred", "conf", "groups"}
_CSV_COLUMNS = ["id", "y", "pred", "conf", "groups"]


@dataclass(frozen=True)
class PredictionRecord:
    """A single labeled prediction. ``confidence`` is the model's score for
    its predicted label (max softmax), when available."""

    example_id: str
    true_label: int
    predicted_label: int
    confidence: float | None = None
    groups: frozenset[str] | None = None

    def __post_init__(self):
        if self.confidence is not None and not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(
                f"record {self.example_id!r}: confidence {self.confidence} outside [0, 1]"
            )

    @property
    def correct(self) -> bool:
        return self.predicted_label == self.true_label


@dataclass(frozen=True)
class PredictionLog:
    model_id: str
    label_set: tuple[int, ...]
    records: tuple[PredictionRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "label_set", tuple(self.label_set))
        object.__setattr__(self, "records", tuple(self.records))
        if not self.label_set:
            raise ValidationError(f"log {self.model_id!r}: empty label set")
        if len(set(self.label_set)) != len(self.label_set):
            raise ValidationError(f"log {self.model_id!r}: duplicate labels in label set")
        labels = set(self.label_set)
        seen: set[str] = set()
        for rec in self.records:
            if rec.example_id in seen:
                raise ValidationError(
                    f"log {self.model_id!r}: duplicate example id {rec.example_id!r}"
                )
            seen.add(rec.example_id)
            if rec.true_label not in labels or rec.predicted_label not in labels:
                raise ValidationError(
                    f"log {self.model_id!r}: record {rec.example_id!r} uses labels "
                    f"({rec.true_label}, {rec.predicted_label}) outside the label set"
                )

    @cached_property
    def by_id(self) -> dict[str, PredictionRecord]:
        return {rec.example_id: rec for rec in self.records}

    @property
    def accuracy(self) -> float:
        if not self.records:
            return 0.0
        return sum(rec.correct for rec in self.records) / len(self.records)


def _parse_groups(value, where: str) -> frozenset[str] | None:
    if value is None:
        return None
    if not isinstance(value, list) or not all(isinstance(g, str) for g in value):
        raise ValidationError(f"{where}: groups must be a list of strings")
    return frozenset(value)


def load_prediction_log(path: str | Path, warnings_out: list[str] | None = None) -> PredictionLog:
    """Load a prediction log from JSON Lines (or CSV when the suffix is .csv).

    Recoverable oddities (e.g. unknown record fields) are appended to
    ``warnings_out`` when given; structural problems raise :class:`ParseError`
    with the offending line number.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _load_csv(path)

    model_id: str | None = None
    label_set: list[int] = []
    records: list[PredictionRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), lineno, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(str(path), lineno, "expected a JSON object")
            if model_id is None:
                if "model_id" not in obj or "label_set" not in obj:
                    raise ParseError(
                        str(path), lineno, "header must carry model_id and label_set"
                    )
                model_id = str(obj["model_id"])
                label_set = list(obj["label_set"])
                if not all(isinstance(x, int) for x in label_set):
                    raise ParseError(str(path), lineno, "label_set must be a list of ints")
                extra = set(obj) - {"model_id", "label_set"}
                if extra and warnings_out is not None:
                    warnings_out.append(
                        f"{path}: line {lineno}: ignoring unknown header fields {sorted(extra)}"
                    )
                continue
            if "id" not in obj or "y" not in obj or "pred" not in obj:
                raise ParseError(str(path), lineno, "record must carry id, y, and pred")
            extra = set(obj) - _RECORD_KEYS
            if extra and warnings_out is not None:
                warnings_out.append(
                    f"{path}: line {lineno}: ignoring unknown record fields {sorted(extra)}"
                )
            conf = obj.get("conf")
            try:
                records.append(
                    PredictionRecord(
                        example_id=str(obj["id"]),
                        true_label=int(obj["y"]),
                        predicted_label=int(obj["pred"]),
                        confidence=None if conf is None else float(conf),
                        groups=_parse_groups(obj.get("groups"), f"{path}: line {lineno}"),
                    )
                )
            except ValidationError as exc:
                raise ParseError(str(path), lineno, str(exc)) from exc
    if model_id is None:
        raise ParseError(str(path), 1, "empty file: missing header")
    try:
        return PredictionLog(model_id=model_id, label_set=tuple(label_set), records=tuple(records))
    except ValidationError as exc:
        raise ParseError(str(path), 1, str(exc)) from exc


def _load_csv(path: Path) -> PredictionLog:
    records: list[PredictionRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(str(path), 1, "empty file") from None
        if [h.strip() for h in header] != _CSV_COLUMNS:
            raise ParseError(str(path), 1, f"expected columns {','.join(_CSV_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(_CSV_COLUMNS):
                raise ParseError(str(path), lineno, f"expected {len(_CSV_COLUMNS)} columns")
            rid, y, pred, conf, groups = (cell.strip() for cell in row)
            try:
                records.append(
                    PredictionRecord(
                        example_id=rid,
                        true_label=int(y),
                        predicted_label=int(pred),
                        confidence=float(conf) if conf else None,
                        groups=frozenset(groups.split(";")) if groups else None,
                    )
                )
            except (ValueError, ValidationError) as exc:
                raise ParseError(str(path), lineno, str(exc)) from exc
    label_set = sorted({r.true_label for r in records} | {r.predicted_label for r in records})
    if not label_set:
        raise ParseError(str(path), 1, "no records; cannot infer a label set")
    try:
        return PredictionLog(model_id=path.stem, label_set=tuple(label_set), records=tuple(records))
    except ValidationError as exc:
        raise ParseError(str(path), 1, str(exc)) from exc


def save_prediction_log(log: PredictionLog, path: str | Path) -> None:
    """Write a log in the JSON Lines format above."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"model_id": log.model_id, "label_set": list(log.label_set)}) + "\n")
        for rec in log.records:
            fh.write(
                json.dumps(
                    {
                        "id": rec.example_id,
                        "y": rec.true_label,
                        "pred": rec.predicted_label,
                        "conf": rec.confidence,
                        "groups": None if rec.groups is None else sorted(rec.groups),
                    }
                )
                + "\n"
            )
