"""Exception hierarchy shared by the package."""


class GeodesicError(Exception):
    """Base class for all package errors."""


class DomainError(GeodesicError, ValueError):
    """A point lies outside the chart, or too close to its edge."""


class ModelError(GeodesicError):
    """The metric data violates a standing assumption (e.g. K not timelike)."""


class ProjectionError(GeodesicError):
    """Gauss-Newton projection onto a level set did not converge."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class DegenerateSubmanifoldError(GeodesicError):
    """The constraint Jacobian lost rank."""


class DegenerateCurveError(GeodesicError, ValueError):
    """A curve has a zero-velocity segment where one is not allowed."""


class NotFoundError(GeodesicError):
    """No acceptable solution was found; ``best`` holds the best attempt."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ScenarioError(GeodesicError, ValueError):
    """Invalid scenario or boundary data."""
