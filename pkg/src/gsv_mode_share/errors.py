"""
Exception hierarchy for GSV Mode Share.
"""
from typing import List, Optional, Sequence


class ModeShareError(Exception):
    """Base class for every error raised by the pipeline."""


class SchemaError(ModeShareError, ValueError):
    """A tabular input is missing a required column."""

    def __init__(self, column: str, source: str = "") -> None:
        self.column = column
        self.source = source
        where = f" in {source}" if source else ""
        super().__init__(f"Missing required column '{column}'{where}")


class RowError(ModeShareError, ValueError):
    """A single row of a tabular input could not be parsed or validated."""

    def __init__(self, line: int, message: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}")


class ShareRangeError(ModeShareError, ValueError):
    """A mode share fell outside the open interval (0, 1)."""


class GeometryError(ModeShareError, ValueError):
    """A polygon, polyline or rectangle is malformed."""


class EmptyCoverageError(ModeShareError, ValueError):
    """No population cell centroid lies inside a boundary."""


class EmptyNetworkError(ModeShareError, ValueError):
    """A road network has no usable edges."""


class MetadataUnavailableError(ModeShareError):
    """The metadata client could not answer for a sample point."""

    def __init__(self, point_id: str, message: str, retryable: bool = True) -> None:
        self.point_id = point_id
        self.retryable = retryable
        super().__init__(f"metadata for point {point_id}: {message}")


class ConsistencyError(ModeShareError, ValueError):
    """Two inputs that must agree do not (e.g. detections vs. image manifest)."""


class UndefinedAPError(ModeShareError, ValueError):
    """Average precision requested for a class without ground truth."""


class NumericalDomainError(ModeShareError, ArithmeticError):
    """A fitted mean reached exactly 0 or 1 in floating point."""

    def __init__(self, row: int, message: str) -> None:
        self.row = row
        super().__init__(f"row {row}: {message}")


class ConvergenceError(ModeShareError):
    """The optimizer ran out of iterations."""

    def __init__(self, message: str, last_iterate: Optional[Sequence[float]] = None) -> None:
        self.last_iterate = list(last_iterate) if last_iterate is not None else None
        super().__init__(message)


class RankDeficiencyError(ModeShareError, ValueError):
    """The design matrix (or information matrix) is singular."""

    def __init__(self, columns: List[str]) -> None:
        self.columns = columns
        super().__init__(f"Design is rank deficient; collinear columns: {', '.join(columns)}")


class MissingCovariateError(ModeShareError, KeyError):
    """A prediction input lacks a covariate the model needs."""

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"Missing covariate '{name}'")

    def __str__(self) -> str:
        return self.args[0]


class FoldError(ModeShareError):
    """A cross-validation fold failed."""

    def __init__(self, city_id: str, cause: Exception) -> None:
        self.city_id = city_id
        self.cause = cause
        super().__init__(f"LOOCV fold holding out '{city_id}' failed: {cause}")


class ConfigError(ModeShareError, ValueError):
    """The pipeline configuration is invalid."""

    def __init__(self, messages: List[str]) -> None:
        self.messages = messages
        super().__init__("; ".join(messages))
