"""Exception hierarchy shared by all cvop modules."""


class CVOPError(Exception):
    """Base class for every error raised by cvop."""


# geometry
class GeometryError(CVOPError):
    """Polyhedral computation failed."""


class LinealityError(GeometryError):
    """The halfspace system describes a set containing a line."""


class EmptyError(GeometryError):
    """The halfspace system describes the empty set."""


class DimensionUnsupported(CVOPError):
    """Requested export is not available for this objective dimension."""


# cones
class ConeError(CVOPError):
    """Invalid ordering cone."""


class NotPointed(ConeError):
    """The cone contains a line."""


class NotSolid(ConeError):
    """The cone has empty interior."""


# problems
class UnknownName(CVOPError, KeyError):
    """No catalog entry with this name."""


# solver
class SolverError(CVOPError):
    """Interior-point solver failure."""


class InfeasibleError(SolverError):
    """No strictly feasible point exists."""


class MaxIterations(SolverError):
    """Newton step budget exhausted."""


class NumericalError(SolverError):
    """Newton system could not be solved."""


# scalarization
class DualDegenerate(CVOPError):
    """Exterior point produced a (numerically) zero dual vector."""


class DegenerateNormal(CVOPError):
    """Cannot build a halfspace from a zero normal."""


# approximation
class DimensionTooLarge(CVOPError):
    """Box-vertex enumeration would be too expensive."""


class IterationLimit(CVOPError):
    """The outer approximation loop hit max_iterations.

    The partial, non-certified report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# verification
class SamplingStarved(CVOPError):
    """Rejection sampling accepted too few points."""
