# pixel_eql/errors.py
"""
Exception hierarchy for pixel-eql.

Library code raises these; only the CLI turns them into exit codes. Each class
carries an ``exit_code`` so the CLI can report a failure category without a
lookup table.
"""

from __future__ import annotations

from pathlib import Path


class PixelEqlError(Exception):
    """Base class for every error raised on purpose by pixel-eql."""

    exit_code = 1
    category = "error"


class DimensionError(PixelEqlError):
    """Shapes do not conform, or an input that must be non-empty is empty."""

    category = "dimension"


class ContractError(PixelEqlError):
    """A documented precondition was violated by the caller."""

    category = "contract"


class ConfigError(PixelEqlError):
    """Invalid or unknown configuration, or a missing secret."""

    exit_code = 2
    category = "config"


class MissingArtifactError(PixelEqlError):
    """An artifact from an earlier pipeline stage is missing."""

    exit_code = 3
    category = "missing-artifact"

    def __init__(self, path: Path | str, producer: str) -> None:
        self.path = Path(path)
        self.producer = producer
        super().__init__(
            f"Missing artifact '{self.path}'. Run `pixel-eql {producer}` first to produce it."
        )


class FormatError(PixelEqlError):
    """A persisted artifact is corrupt, truncated, or has the wrong schema version."""

    exit_code = 4
    category = "format"


class NumericError(PixelEqlError):
    """A value became NaN or infinite."""

    exit_code = 5
    category = "numeric"


class GradientOracleError(NumericError):
    """The finite-difference oracle evaluated a non-finite function value."""

    def __init__(self, index: int, value: float) -> None:
        self.index = index
        self.value = value
        super().__init__(
            f"Finite-difference oracle got non-finite value {value!r} at coordinate {index}"
        )


class TrainingDivergedError(NumericError):
    """A training loss became non-finite; the last good state was saved."""

    def __init__(self, message: str, checkpoint: Path | None = None) -> None:
        self.checkpoint = checkpoint
        if checkpoint is not None:
            message = f"{message} (last good checkpoint: {checkpoint})"
        super().__init__(message)


class DegenerateDataError(PixelEqlError):
    """The data cannot support the requested computation, e.g. no object is ever present."""

    exit_code = 6
    category = "degenerate-data"


class UndefinedMetricError(PixelEqlError):
    """A metric is undefined for the given inputs (empty relevant set or no frames)."""

    exit_code = 6
    category = "undefined-metric"


class ExtractionError(PixelEqlError):
    """A network cannot be turned into a polynomial expression."""

    category = "extraction"


class TransportError(PixelEqlError):
    """The chat endpoint kept failing after all retries."""

    exit_code = 7
    category = "transport"

    def __init__(self, message: str, status: int | None = None) -> None:
        self.status = status
        super().__init__(message if status is None else f"{message} (HTTP {status})")
