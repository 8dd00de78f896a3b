"""Exception types shared across the analysis pipeline."""


class MassimoError(Exception):
    """Base class for all package-specific errors."""


class ParseError(MassimoError):
    """Keypoint file is not well-formed JSON. Carries the byte offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class SchemaError(MassimoError):
    """Keypoint JSON parsed but does not match the expected schema."""


class FitError(MassimoError):
    """Regression problem is underdetermined for the requested model."""


class DegenerateGeometryError(MassimoError):
    """Geometry admits no unique answer (all x identical, coincident endpoints)."""


class InsufficientDataError(MassimoError):
    """Too few points for the requested statistic."""


class DegenerateDistributionError(MassimoError):
    """All values fall in one histogram class; no threshold splits them."""


class UndefinedMetricError(MassimoError):
    """Metric denominator is empty (no ground-truth outliers)."""


class InsufficientQueueError(MassimoError):
    """Fewer than two usable people; the pipeline cannot run."""


class RenderError(MassimoError):
    """Base image could not be decoded."""
