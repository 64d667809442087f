"""Exception types raised by the geometry engine."""


class GeometryError(Exception):
    """Base class for all pfaffgeo failures."""


class DomainError(GeometryError):
    """A parameter point lies outside (or too close to the edge of) a domain box."""


class EvaluationError(GeometryError):
    """An embedding or field produced non-finite values."""


class DegeneracyError(GeometryError):
    """The frame or a linear system is singular at the requested point."""


class ParabolicPointError(DegeneracyError):
    """The shape operator is not invertible, so the third form is degenerate."""


class ConfigError(GeometryError):
    """Unknown catalog name, wrong parameter arity or malformed run configuration."""
