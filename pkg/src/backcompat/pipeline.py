"""OCR-to-blacklist failure propagation.

Models a character-recognition component feeding a word blacklist: assuming
per-character misrecognitions are independent and font-invariant, a word is
missed as soon as one character is misread, so

    error(word) = 1 - prod_i accuracy(c_i)

This is the conservative estimate (one wrong character suffices). Characters
are case-sensitive.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .errors import (
    CharmapIncomplete,
    EmptyWord,
    ParseError,
    UnknownCharacter,
    ValidationError,
)
from .logs import PredictionLog


@dataclass(frozen=True)
class CharAccuracyTable:
    model_id: str
    accuracies: Mapping[str, float]  # character -> accuracy in [0, 1]

    def __post_init__(self):
        object.__setattr__(self, "accuracies", MappingProxyType(dict(self.accuracies)))
        for char, acc in self.accuracies.items():
            if len(char) != 1:
                raise ValidationError(f"table keys must be single characters, got {char!r}")
            if not (0.0 <= acc <= 1.0):
                raise ValidationError(f"accuracy for {char!r} is {acc}, outside [0, 1]")


def char_accuracy_from_log(log: PredictionLog, charmap: Mapping[int, str]) -> CharAccuracyTable:
    """Per-character accuracy = correct/total over records of that true
    label. Characters with zero support are omitted. Labels sharing a
    character pool their records."""
    missing = [l for l in log.label_set if l not in charmap]
    if missing:
        raise CharmapIncomplete(f"charmap misses labels {missing}")
    correct: dict[str, int] = {}
    total: dict[str, int] = {}
    for rec in log.records:
        char = charmap[rec.true_label]
        total[char] = total.get(char, 0) + 1
        correct[char] = correct.get(char, 0) + (1 if rec.correct else 0)
    return CharAccuracyTable(
        model_id=log.model_id,
        accuracies={char: correct[char] / total[char] for char in total},
    )


def word_error(word: str, table: CharAccuracyTable) -> float:
    """Probability at least one character of ``word`` is misrecognized."""
    if not word:
        raise EmptyWord("word must be non-empty")
    product = 1.0
    for char in word:
        if char not in table.accuracies:
            raise UnknownCharacter(
                f"character {char!r} of word {word!r} not in table {table.model_id!r}"
            )
        product *= table.accuracies[char]
    return 1.0 - product


@dataclass(frozen=True)
class Blacklist:
    words: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        if not self.words:
            raise ValidationError("blacklist must be non-empty")
        for word in self.words:
            if not word:
                raise EmptyWord("blacklist words must be non-empty")


@dataclass(frozen=True)
class BlacklistRow:
    word: str
    error_h1: float
    error_h2: float
    delta: float  # error_h2 - error_h1


def blacklist_report(
    bl: Blacklist | list[str], table_h1: CharAccuracyTable, table_h2: CharAccuracyTable
) -> list[BlacklistRow]:
    """Per-word error under both models, sorted by descending delta (ties by
    word). Words with characters absent from either table are errors, not
    skipped: silent skipping would understate fraud risk."""
    words = bl.words if isinstance(bl, Blacklist) else Blacklist(tuple(bl)).words
    rows = []
    for word in words:
        e1 = word_error(word, table_h1)
        e2 = word_error(word, table_h2)
        rows.append(BlacklistRow(word=word, error_h1=e1, error_h2=e2, delta=e2 - e1))
    return sorted(rows, key=lambda r: (-r.delta, r.word))


def load_char_table(path: str | Path, model_id: str | None = None) -> CharAccuracyTable:
    """CSV with columns char,accuracy (header row required)."""
    path = Path(path)
    accuracies: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(str(path), 1, "empty file") from None
        if [h.strip() for h in header] != ["char", "accuracy"]:
            raise ParseError(str(path), 1, "expected columns char,accuracy")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(str(path), lineno, "expected 2 columns")
            char, acc = row[0], row[1]
            if char in accuracies:
                raise ParseError(str(path), lineno, f"duplicate character {char!r}")
            try:
                value = float(acc)
            except ValueError as exc:
                raise ParseError(str(path), lineno, f"bad accuracy {acc!r}") from exc
            if not math.isfinite(value):
                raise ParseError(str(path), lineno, f"bad accuracy {acc!r}")
            accuracies[char] = value
    try:
        return CharAccuracyTable(model_id=model_id or path.stem, accuracies=accuracies)
    except ValidationError as exc:
        raise ParseError(str(path), 1, str(exc)) from exc


def save_char_table(table: CharAccuracyTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["char", "accuracy"])
        for char in sorted(table.accuracies):
            writer.writerow([char, repr(table.accuracies[char])])


def load_blacklist(path: str | Path) -> Blacklist:
    """One word per line, UTF-8; blank lines ignored."""
    words = [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines()]
    words = [w for w in words if w]
    if not words:
        raise ValidationError(f"{path}: blacklist is empty")
    return Blacklist(words=tuple(words))


def write_blacklist_report(rows: list[BlacklistRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["word", "error_h1", "error_h2", "delta"])
        for row in rows:
            writer.writerow([row.word, repr(row.error_h1), repr(row.error_h2), repr(row.delta)])
