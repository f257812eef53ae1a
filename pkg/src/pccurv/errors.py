"""Exception hierarchy.

Every error carries a short ``category`` so the CLI can report failures on a
single machine-parsable line.
"""

from __future__ import annotations


class CurvatureError(Exception):
    category = "error"


class InvalidArgument(CurvatureError, ValueError):
    category = "invalid-argument"


class EmptyCloud(InvalidArgument):
    category = "empty-cloud"


class InvalidCoordinate(InvalidArgument):
    category = "invalid-coordinate"

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"non-finite coordinate at point {index}")


class InvalidRadius(InvalidArgument):
    category = "invalid-radius"


class InvalidCount(InvalidArgument):
    category = "invalid-count"


class InvalidSurface(InvalidArgument):
    category = "invalid-surface"


# Per-point failures. The batch driver turns these into invalid results.

class PointFailure(CurvatureError):
    category = "point-failure"


class InsufficientNeighbors(PointFailure):
    category = "insufficient-neighbors"

    def __init__(self, count: int, required: int = 3):
        self.count = count
        self.required = required
        super().__init__(f"{count} neighbors, need at least {required}")


class DegenerateWeights(PointFailure):
    category = "degenerate-weights"


class DegenerateNeighborhood(PointFailure):
    category = "degenerate-neighborhood"


class NoUsableScale(PointFailure):
    category = "no-usable-scale"


# Metrics.

class ShapeMismatch(InvalidArgument):
    category = "shape-mismatch"


class EmptyInput(InvalidArgument):
    category = "empty-input"


class InvalidValue(InvalidArgument):
    category = "invalid-value"


class UndefinedCorrelation(CurvatureError):
    category = "undefined-correlation"


class FormatError(CurvatureError):
    category = "format-error"
