"""Exception and warning types shared across the package."""

from __future__ import annotations

__all__ = [
    "LqmleError",
    "BracketFailure",
    "QuadratureFailure",
    "NonIntegrableError",
    "ShapeMismatch",
    "DataFormatError",
    "InvertibilityError",
    "NonFiniteObjective",
    "SingularInformation",
    "RankDeficientConstraint",
    "InfeasibleConstraint",
    "NotScaleOnly",
    "DegenerateTail",
    "ExcessiveFailures",
    "NonstationaryRegionWarning",
]


class LqmleError(Exception):
    """Base class for errors raised by this package."""


class BracketFailure(LqmleError):
    """A root-finding bracket could not be established."""


class QuadratureFailure(LqmleError):
    """Numerical integration did not reach the requested accuracy."""


class NonIntegrableError(LqmleError, ValueError):
    """A requested moment or functional does not exist for the distribution."""


class ShapeMismatch(LqmleError, ValueError):
    """Array arguments have incompatible shapes."""


class DataFormatError(LqmleError, ValueError):
    """An input data file could not be parsed into a numeric series."""


class InvertibilityError(LqmleError, ValueError):
    """A moving-average polynomial lies outside the invertible region."""


class NonFiniteObjective(LqmleError, ArithmeticError):
    """The objective evaluated to NaN or infinity at a feasible point."""


class SingularInformation(LqmleError):
    """An information matrix is numerically singular."""


class RankDeficientConstraint(LqmleError, ValueError):
    """A restriction matrix does not have full row rank."""


class InfeasibleConstraint(LqmleError, ValueError):
    """No parameter point satisfies both the restriction and the box."""


class NotScaleOnly(LqmleError, ValueError):
    """An operation that requires a pure-scale model was given one with a mean part."""


class DegenerateTail(LqmleError, ValueError):
    """Order statistics needed by a tail estimator are degenerate (zero or constant)."""


class ExcessiveFailures(LqmleError):
    """Too many Monte Carlo replications failed for the summary to be trusted."""


class NonstationaryRegionWarning(UserWarning):
    """The parameter point lies in a region where the filter recursion diverges."""
