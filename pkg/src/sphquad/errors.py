"""Exception hierarchy shared by the geometry, cubature and fitting modules."""


class SphquadError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(SphquadError, ValueError):
    """Invalid or degenerate spherical geometry."""


class DegeneratePolygonError(GeometryError):
    pass


class DegenerateTriangleError(GeometryError):
    pass


class ProjectionError(GeometryError):
    """A point cannot be projected onto the requested tangent plane."""


class InvalidPolygonError(GeometryError):
    pass


class HemisphereError(GeometryError):
    """The region is not contained in an open hemisphere around its centroid."""


class NumericalError(SphquadError, RuntimeError):
    """A numerical construction failed (exit code 3 in the CLI)."""


class ConvergenceError(NumericalError):
    def __init__(self, message, residual=None, **diagnostics):
        super().__init__(message)
        self.residual = residual
        self.diagnostics = dict(diagnostics, residual=residual)


class RankDeficiencyError(NumericalError):
    pass


class IllConditionedWarning(UserWarning):
    """A triangular factor has a large condition number estimate."""
