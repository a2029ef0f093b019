"""Exceptions raised by opnet.

Every error derives from ``OpnetError`` and ``ValueError`` so callers can
catch either.
"""

from typing import Optional


class OpnetError(ValueError):
    """Base class for all opnet errors."""


class SeriesFormatError(OpnetError):
    """A series file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmbeddingError(OpnetError):
    """The series is too short for the requested (m, tau)."""


class FilterError(OpnetError):
    """The adaptive filter could not produce a usable series."""


class IntegrationError(OpnetError):
    """Numerical integration diverged."""

    def __init__(self, message: str, step: int) -> None:
        self.step = step
        super().__init__(f"{message} (step {step})")


class PeakCountError(OpnetError):
    """Fewer local maxima than requested were found."""

    def __init__(self, found: int, requested: int) -> None:
        self.found = found
        self.requested = requested
        super().__init__(f"found {found} peaks, {requested} requested")


class ConfigError(OpnetError):
    """Invalid run configuration."""


class DatasetError(OpnetError):
    """A manifest or dataset is inconsistent."""

    def __init__(self, message: str, missing: Optional[list[str]] = None) -> None:
        self.missing = missing or []
        if self.missing:
            message = f"{message}: {', '.join(self.missing)}"
        super().__init__(message)


class PipelineError(OpnetError):
    """The pipeline could not produce a report."""

    def __init__(self, message: str, reasons: Optional[dict[str, str]] = None) -> None:
        self.reasons = reasons or {}
        super().__init__(message)
