"""Moving-frame calculus for hypersurfaces of R^N, evaluated numerically.

Submodules: :mod:`~pfaffgeo.surface` (embeddings and the fixture catalog),
:mod:`~pfaffgeo.frames`, :mod:`~pfaffgeo.connection`, :mod:`~pfaffgeo.operators`,
:mod:`~pfaffgeo.spherical`, :mod:`~pfaffgeo.curves`, :mod:`~pfaffgeo.exterior`,
:mod:`~pfaffgeo.checks` (the identity suite) and :mod:`~pfaffgeo.cli`.
"""

from .connection import connection_at, curvature_two_ways, semicolon_derivative, theta1, theta2
from .errors import (
    ConfigError,
    DegeneracyError,
    DomainError,
    EvaluationError,
    GeometryError,
    ParabolicPointError,
)
from .frames import frame_at, gradient_vector, pfaff_gradient
from .operators import beltrami2, beltrami_lambda, d_k, eta, invariants_report, pi_lambda, sr_diagnostic
from .spherical import spherical_at, beltrami3_check, tilde_gradient
from .surface import SurfacePatch, catalog, jet

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegeneracyError",
    "DomainError",
    "EvaluationError",
    "GeometryError",
    "ParabolicPointError",
    "SurfacePatch",
    "beltrami2",
    "beltrami_lambda",
    "catalog",
    "connection_at",
    "curvature_two_ways",
    "d_k",
    "eta",
    "frame_at",
    "gradient_vector",
    "invariants_report",
    "jet",
    "pfaff_gradient",
    "pi_lambda",
    "semicolon_derivative",
    "spherical_at",
    "sr_diagnostic",
    "beltrami3_check",
    "theta1",
    "theta2",
    "tilde_gradient",
]
