"""Exception types shared across the package.

Every failure raised by this package is a subclass of FsbenchError, so
callers (and the CLI) can map failures to exit codes without string
matching.
"""

from __future__ import annotations


class FsbenchError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(FsbenchError):
    """Invalid or incomplete run configuration."""

    exit_code = 2


class ValidationError(FsbenchError):
    """Data violates a structural invariant."""

    exit_code = 3


class FormatError(FsbenchError):
    """Byte stream is not a recognizable embedding file."""

    exit_code = 3


class CorruptionError(FsbenchError):
    """Recognizable embedding file with missing or inconsistent bytes."""

    exit_code = 3


class DimensionError(FsbenchError):
    """Operands disagree on vector dimensionality."""

    exit_code = 3


class DegenerateVectorError(FsbenchError):
    """A vector that must be normalized has zero norm."""

    exit_code = 3


class DomainError(FsbenchError):
    """Numeric argument outside the mathematical domain."""

    exit_code = 2


class MappingError(FsbenchError):
    """Label mapping does not fit the dataset it is applied to."""

    exit_code = 4


class EmptyResultError(MappingError):
    """A label remap retained no records."""


class ProtocolError(FsbenchError):
    """Episode or aggregation inputs violate the evaluation protocol."""

    exit_code = 4


class InfeasibleSpecError(ProtocolError):
    """Episode spec cannot be satisfied by the dataset."""


class InfeasibleQueryError(ProtocolError):
    """Requested query count exceeds what the dataset can supply."""


class InsufficientDataError(FsbenchError):
    """Too few values to compute the requested statistic."""

    exit_code = 4
