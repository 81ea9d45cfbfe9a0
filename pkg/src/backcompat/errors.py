"""Semantic exception hierarchy.

Everything user-facing derives from :class:`ValidationError` (bad files,
bad configs, violated operation preconditions) and maps to CLI exit code 2.
Anything else escaping the library is treated as an internal error (exit 1).
"""

from __future__ import annotations


class BackcompatError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BackcompatError, ValueError):
    """Invalid input: file content, configuration, or precondition."""


class ParseError(ValidationError):
    """A file could not be parsed; carries the path and 1-based line number."""

    def __init__(self, path: str, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}: line {line}: {message}")


class ConfigError(ValidationError):
    """Experiment config is malformed; message names the offending field."""


# --- prediction logs & comparisons -----------------------------------------

class LabelSetMismatch(ValidationError):
    """The two logs declare different label sets."""


class IdSetMismatch(ValidationError):
    """Strict alignment requested but the logs cover different example ids."""


class EmptyIntersection(ValidationError):
    """The logs share no example ids."""


class UnknownTagNamespace(ValidationError):
    """No record carries a group tag in the requested namespace."""


class MissingConfidence(ValidationError):
    """Confidence histogram requested but some records lack confidence."""

    def __init__(self, model: str, example_ids: list[str]):
        self.model = model
        self.example_ids = list(example_ids)
        shown = ", ".join(self.example_ids[:10])
        more = "" if len(self.example_ids) <= 10 else f" (+{len(self.example_ids) - 10} more)"
        super().__init__(f"records without confidence for {model}: {shown}{more}")


# --- datasets & noise -------------------------------------------------------

class UnknownLabel(ValidationError):
    """A referenced label is not in the dataset's label set."""


class IdenticalPair(ValidationError):
    """A label pair that must be distinct is not."""


class NoShape(ValidationError):
    """Operation needs image-shaped features but the dataset has no shape."""


class BadAreaFraction(ValidationError):
    """Occlusion area fraction outside the open interval (0, 1)."""


class NotBinary(ValidationError):
    """Group flip requires a binary-labeled dataset."""


class UnknownGroup(ValidationError):
    """No instance carries the requested group tag."""


# --- trainer ----------------------------------------------------------------

class ShapeMismatch(ValidationError):
    """Feature dimensions or parameter shapes are inconsistent."""


class EmptyDataset(ValidationError):
    """Training requires at least one instance."""


class MissingReferenceModel(ValidationError):
    """lambda_c > 0 requires a reference model."""


# --- forgetting -------------------------------------------------------------

class EmptyLog(ValidationError):
    """Epoch evaluation log has no epochs."""


class IdCoverageMismatch(ValidationError):
    """Forgetting counts do not cover every aligned example id."""


# --- experiments ------------------------------------------------------------

class TestSetMismatch(ValidationError):
    """Trials were evaluated on different test sets."""

    __test__ = False  # name starts with Test; keep pytest from collecting it


class SubsetViolation(ValidationError):
    """The small training set is not an id-subset of the big one."""


# --- pipeline ---------------------------------------------------------------

class CharmapIncomplete(ValidationError):
    """Label-to-character map does not cover the log's label set."""


class UnknownCharacter(ValidationError):
    """A word contains a character absent from the accuracy table."""


class EmptyWord(ValidationError):
    """Blacklist words must be non-empty."""
