"""Exception hierarchy shared by all rbmset modules."""

from __future__ import annotations


class RbmSetError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(RbmSetError, ValueError):
    pass


class TooFewPoints(GeometryError):
    pass


class CollinearInput(GeometryError):
    pass


class DuplicatePointsBeyondTolerance(GeometryError):
    """All input points collapse onto fewer than three distinct sites."""


class EmptyReferenceSet(GeometryError):
    pass


class DegenerateAllCoincident(GeometryError):
    pass


class EmptyInput(GeometryError):
    pass


class DomainError(RbmSetError, ValueError):
    pass


class ProjectionDidNotConverge(DomainError):
    pass


class CellSizeTooLarge(DomainError):
    pass


class StartOutsideDomain(DomainError):
    pass


class GridMismatch(RbmSetError, ValueError):
    pass


class EpsTooSmallForGrid(RbmSetError, ValueError):
    pass


class DegenerateDesign(RbmSetError, ValueError):
    pass


class EmptyGrid(RbmSetError, ValueError):
    pass


class DataError(RbmSetError):
    """Problems with user supplied files (bad columns, rows, empty files)."""


class MissingColumn(DataError, KeyError):
    pass


class UnparseableRow(DataError, ValueError):
    def __init__(self, row_index: int, message: str):
        super().__init__(f"row {row_index}: {message}")
        self.row_index = row_index


class EmptyFile(DataError, ValueError):
    pass


class IoError(DataError, OSError):
    """A file could not be written or read at the operating system level."""
