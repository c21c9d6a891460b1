"""Exception hierarchy shared by every module of the package."""


class FilippovError(Exception):
    """Base class for all errors raised by this package."""


# expressions ---------------------------------------------------------------

class ExpressionError(FilippovError, ValueError):
    pass


class ExprSyntaxError(ExpressionError):
    def __init__(self, message, offset, source=""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class UnknownFunctionError(ExpressionError):
    pass


class UnknownVariableError(ExpressionError):
    pass


class EvaluationDomainError(ExpressionError, ArithmeticError):
    """An operation was applied outside its domain (log of 0, x/0, ...)."""

    def __init__(self, message, subexpression=""):
        self.subexpression = subexpression
        super().__init__(message)


# planar Filippov model ------------------------------------------------------

class NotOnSigma(FilippovError, ValueError):
    pass


class DegenerateSwitch(FilippovError):
    """The gradient of the switching function vanishes on the switching set."""


class NotSlidingRegion(FilippovError, ValueError):
    pass


# index engine ----------------------------------------------------------------

class IndexComputationError(FilippovError):
    pass


class FieldVanishesOnArc(IndexComputationError):
    pass


class DegenerateDeterminant(IndexComputationError, ZeroDivisionError):
    pass


class SegmentThroughOrigin(IndexComputationError):
    pass


class SingularityOnBoundary(IndexComputationError):
    pass


class NonTransversalIntersection(IndexComputationError):
    pass


class IntegerResidualTooLarge(IndexComputationError):
    pass


class NotIsolated(IndexComputationError):
    pass


class RadiusDependence(IndexComputationError):
    """Two admissible radii gave different indices for one singularity."""


# manifolds ------------------------------------------------------------------

class DegenerateJacobian(FilippovError):
    pass


class SingularityTooCloseToChartBoundary(FilippovError):
    pass


class ChartDependence(FilippovError):
    """Two charts assigned different indices to the same singularity."""


class NonIsolatedSingularity(FilippovError):
    pass


# scenarios --------------------------------------------------------------------

class ScenarioError(FilippovError, ValueError):
    """A scenario document is missing, unreadable, or fails validation."""
