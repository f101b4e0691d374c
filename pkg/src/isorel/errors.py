"""Exception types shared across the package."""

from __future__ import annotations


class IsorelError(Exception):
    """Base class for every error raised by this package."""


class DatasetParseError(IsorelError):
    """A CSV file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(IsorelError):
    """An input violates a documented invariant or contract."""


class MissingEmbeddingError(IsorelError):
    """A file-backed store has no vector for one or more requested texts."""

    def __init__(self, keys):
        self.keys = tuple(keys)
        shown = ", ".join(self.keys[:3])
        more = "" if len(self.keys) <= 3 else f" (+{len(self.keys) - 3} more)"
        super().__init__(
            f"missing embedding for {len(self.keys)} key(s): {shown}{more}"
        )


class TransportError(IsorelError):
    """The remote embedding service failed after the retry budget was spent."""

    def __init__(self, message: str, retries: int = 0):
        super().__init__(message)
        self.retries = retries


class DegenerateFitError(IsorelError):
    """Whitening cannot be fitted: no positive-variance direction exists."""


class UndefinedCosineError(IsorelError):
    """Cosine similarity is undefined for a zero vector."""


class UndefinedCorrelationError(IsorelError):
    """Spearman correlation is undefined when either input is constant."""


class ScoringError(IsorelError):
    """A pair could not be scored; carries the pair_id it failed on."""

    def __init__(self, message: str, pair_id: str):
        super().__init__(f"pair {pair_id!r}: {message}")
        self.pair_id = pair_id


class ProbeError(IsorelError):
    """A source-language probe failed; carries the language it failed on."""

    def __init__(self, message: str, lang: str):
        super().__init__(f"source {lang!r}: {message}")
        self.lang = lang


class EmptyTrainingPoolError(IsorelError):
    """Every candidate source language was excluded by the filter."""
