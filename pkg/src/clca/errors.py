"""Exception types shared across the package."""

from __future__ import annotations


class ClcaError(Exception):
    """Base class for package errors."""


class SchemaError(ClcaError):
    """A record or payload violates its schema.

    `line` is set when the error was found while parsing a dataset file
    (1-based line number of the first invalid record).
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ProviderUnavailable(ClcaError):
    """Text provider could not be reached or returned an HTTP failure."""


class MalformedProviderOutput(ClcaError):
    """Provider replied, but the reply cannot be parsed into the expected
    structure. Carries the raw text for diagnostics."""

    def __init__(self, message: str, raw_text: str = ""):
        super().__init__(message)
        self.raw_text = raw_text


class PartialCandidates(ClcaError):
    """Fewer than the requested k candidates succeeded.

    Carries the usable candidates so callers can proceed when at least
    one generation call worked.
    """

    def __init__(self, candidates: list, failures: list["Exception"]):
        super().__init__(
            f"{len(candidates)} of {len(candidates) + len(failures)} candidates usable"
        )
        self.candidates = candidates
        self.failures = failures


class GenerationInterrupted(ClcaError):
    """Dataset generation stopped partway through.

    Carries the records completed before the failure so callers can
    report partial progress.
    """

    def __init__(self, message: str, records: list, cause: Exception):
        super().__init__(message)
        self.records = records
        self.cause = cause


class EmptyDataset(ClcaError):
    """Environment reset over a dataset with zero records."""


class EpisodeFinished(ClcaError):
    """step() called after the episode reported done."""


class NonFiniteAction(ClcaError):
    """Action passed to the environment contains NaN or infinity."""


class NonFiniteLoss(ClcaError):
    """Training loss diverged to NaN or infinity."""


class DimensionMismatch(ClcaError):
    """Input vector length does not match the declared parameter shapes."""


class FormatError(ClcaError):
    """Checkpoint file has an unrecognized tag, version, or tensor shape."""


class EmptyMessage(ClcaError):
    """Chat message text is empty."""
