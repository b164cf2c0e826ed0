"""Exception and warning types shared across the package."""

from __future__ import annotations


class AffmemError(Exception):
    """Base class for all errors raised by this package."""


class DataError(AffmemError):
    """A session bundle is malformed or violates a validation rule."""


class IoError(AffmemError):
    """The on-disk store could not be read or written."""


class NotFound(AffmemError):
    """A session (or segment) selector resolved to nothing."""


class EmptyTranscript(AffmemError):
    """The session has no transcript sentences."""


class NoLexicalSentences(AffmemError):
    """No sentence in scope carries any token."""


class InvalidN(AffmemError):
    """Requested summary length is below 1."""


class InvalidDimension(AffmemError):
    """Embedding dimension below the supported minimum."""


class NotAvailable(AffmemError):
    """External embeddings were requested but the session has none."""


class InvalidK(AffmemError):
    """Cluster count outside [1, number of points]."""


class DimensionMismatch(AffmemError):
    """Vectors of different dimensions were mixed."""


class UnknownChannel(AffmemError):
    """A channel name is not one of the supported signal channels."""


class NoChannels(AffmemError):
    """No weighted channel has any data in the session."""


class EmptyRange(AffmemError):
    """A query time range contains no grid points."""


class QuerySyntaxError(AffmemError):
    """A search query failed to parse.

    Carries the byte offset of the failure and the set of tokens that
    would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.offset = offset
        self.expected = tuple(expected)


class DataWarning(UserWarning):
    """Non-fatal data issue (dropped frame, unmatched marker, clamped n)."""
