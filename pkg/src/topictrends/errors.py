"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class TopicTrendsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TopicTrendsError):
    """Invalid or inconsistent configuration."""


# --- corpus parsing -------------------------------------------------------

class MalformedHeader(TopicTrendsError):
    """Export header is missing a required field tag."""


class MalformedRow(TopicTrendsError):
    """A data row cannot be parsed (wrong field count, invalid record)."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class BadYear(TopicTrendsError):
    """A year field is not a usable calendar year."""

    def __init__(self, line_number: int, value: str):
        super().__init__(f"line {line_number}: bad year {value!r}")
        self.line_number = line_number
        self.value = value


class MalformedLine(TopicTrendsError):
    """A JSON-lines record cannot be decoded or lacks required keys."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateId(TopicTrendsError):
    """Two records share the same document id."""

    def __init__(self, doc_id: str, line_number: int | None = None):
        where = f" (line {line_number})" if line_number is not None else ""
        super().__init__(f"duplicate document id {doc_id!r}{where}")
        self.doc_id = doc_id
        self.line_number = line_number


# --- remote annotation ----------------------------------------------------

class AuthError(TopicTrendsError):
    """The annotation service rejected the credentials."""


class RateLimited(TopicTrendsError):
    """The annotation service throttled the client beyond the retry budget."""


class TransportError(TopicTrendsError):
    """The annotation service could not be reached or failed mid-request."""


class MalformedResponse(TopicTrendsError):
    """The annotation service returned a body we cannot interpret."""


# --- series building ------------------------------------------------------

class DanglingAnnotation(TopicTrendsError):
    """An annotation references a document that is absent or undated."""

    def __init__(self, doc_id: str):
        super().__init__(f"annotation references unknown or undated document {doc_id!r}")
        self.doc_id = doc_id


# --- trend statistics -----------------------------------------------------

class InsufficientData(TopicTrendsError):
    """The series is too short for the requested statistic."""


class LagOutOfRange(TopicTrendsError):
    """Autocorrelation lag outside 1..n-1."""


# --- burst detection ------------------------------------------------------

class EmptySeries(TopicTrendsError):
    """The series has no observations to analyze."""


class CountExceedsTotal(TopicTrendsError):
    """A per-period event count exceeds that period's total."""


# --- pipeline orchestration -----------------------------------------------

class EmptyCorpus(TopicTrendsError):
    """No documents survived ingestion or filtering."""


class PipelineStageError(TopicTrendsError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
