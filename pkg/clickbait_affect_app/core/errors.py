"""
Exception hierarchy for the clickbait affect toolkit.

Every error raised on purpose by the toolkit derives from ``ToolkitError`` so the
CLI can turn it into a one-line message. Input validation errors also derive from
``ValueError``.
"""

from typing import Optional


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ToolkitError, ValueError):
    """A value violates a domain invariant."""


class OutOfRange(ValidationError):
    """A numeric value lies outside its allowed interval."""


class UnknownLabel(ValidationError):
    """An emotion label is missing from the active lexicon."""

    def __init__(self, label: str):
        super().__init__(f"Unknown emotion label: {label!r}")
        self.label = label


class EmptyDistribution(ValidationError):
    """An emotion distribution carries no positive weight."""


class EmptyText(ValidationError):
    """A text is empty after whitespace trimming."""


class DimMismatch(ValidationError):
    """Embedding dimensions disagree."""


class ZeroVector(ValidationError):
    """A zero vector was given where a direction is required."""


class EmptyCorpus(ValidationError):
    """An alignment was requested over an empty corpus."""


class EmptyInput(ValidationError):
    """An aggregation was requested over no records."""


class UnknownStyle(ValidationError):
    """A style label is not part of the closed style set."""


class TemplateMissing(ValidationError):
    """The template set has no entry for the requested style."""


class TaxonomyMismatch(ValidationError):
    """A backend or lexicon disagrees with the configured taxonomy."""


class ConfigError(ValidationError):
    """The pipeline configuration is invalid."""


class ParseError(ToolkitError):
    """A newline-delimited input could not be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line_number = line_number


class MissingField(ParseError):
    """A mapped field is absent from an input record."""


class BackendError(ToolkitError):
    """Base class for backend failures."""


class BackendUnavailable(BackendError):
    """Transport failed after the bounded number of retries."""


class EmptyGeneration(BackendError):
    """The generation backend returned blank text."""


class ContextOverflow(BackendError):
    """The rendered prompt does not fit the backend context window."""


class OfflineViolation(BackendError):
    """A network endpoint was contacted in offline mode or outside the allow list."""


class AggregateFailure(ToolkitError):
    """Every item of a corpus operation failed."""

    def __init__(self, message: str, ledger=None):
        super().__init__(message)
        self.ledger = ledger


class UnknownPost(ToolkitError):
    """No pipeline artifacts exist for the requested post."""


class NoCandidates(ToolkitError):
    """No attack candidate survives the similarity floor."""


class IncompleteRun(ToolkitError):
    """A report was requested before the evaluation stage completed."""


class StageFailed(ToolkitError):
    """A pipeline stage failed; completed stages remain resumable."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"Stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
