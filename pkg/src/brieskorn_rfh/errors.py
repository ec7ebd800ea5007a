"""Exception hierarchy.

``InputError`` covers malformed input (CLI exit code 1), ``MathError`` covers
well-formed input on which a computation cannot proceed (exit code 2).
"""


class BrieskornRFHError(Exception):
    """Base class for all package errors."""


class InputError(BrieskornRFHError, ValueError):
    pass


class MathError(BrieskornRFHError):
    pass


# cz_index
class NonSymmetricGenerator(InputError):
    pass


class SymplecticDriftExceeded(MathError):
    pass


class UnresolvedCrossingCluster(MathError):
    pass


class DegenerateCrossing(MathError):
    pass


class Unsupported(MathError):
    pass


class BoundViolated(MathError):
    pass


# brieskorn
class IndexOutOfRange(MathError):
    pass


class EmptyCriticalManifold(MathError):
    pass


class DimensionTooLow(MathError):
    pass


class UnsupportedCriticalManifold(MathError):
    pass


# floer_algebra
class AxiomViolation(MathError):
    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


class SectionConstructionFailed(MathError):
    pass


class IsomorphismFailed(MathError):
    pass


# rfh_brieskorn
class DegreeInForbiddenWindow(MathError):
    pass


class NotExact(MathError):
    pass


# morse_flow
class HessianDegenerate(MathError):
    pass


class ConstraintViolated(MathError):
    pass


class NoConvergence(MathError):
    pass


class ClusteringAmbiguous(MathError):
    pass


class MonotonicityViolated(MathError):
    pass
