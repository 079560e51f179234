"""Typed extractor errors, each carrying a process exit code."""


class ExtractError(Exception):
    """Base class for everything this package raises on purpose."""

    exit_code = 1


class RecipeError(ExtractError):
    """Unknown backbone, malformed weights spec, or bad knob values."""

    exit_code = 2


class ImageRootError(ExtractError):
    """Missing, empty, or class-less image directory."""

    exit_code = 3


class ImageReadError(ExtractError):
    """Unreadable or corrupt image surfaced under fail-fast."""

    exit_code = 3
