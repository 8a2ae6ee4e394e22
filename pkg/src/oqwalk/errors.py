"""Exception types raised across the package."""


class OQWalkError(Exception):
    """Base class for all package errors."""


class NotHermitianError(OQWalkError):
    pass


class NegativeEigenvalueError(OQWalkError):
    pass


class NoConvergenceError(OQWalkError):
    pass


class SingularMatrixError(OQWalkError):
    pass


class DimensionMismatchError(OQWalkError):
    pass


class NotTracePreservingError(OQWalkError):
    def __init__(self, deviation: float):
        super().__init__(f"Kraus normalization off by {deviation:.3e}")
        self.deviation = deviation


class NumericalDegeneracyError(OQWalkError):
    pass


class NotAnEnclosureError(OQWalkError):
    pass


class SingularTransientSystemError(OQWalkError):
    pass


class NotIrreducibleError(OQWalkError):
    pass


class DegenerateStepError(OQWalkError):
    pass


class MissingTrackError(OQWalkError):
    pass


class MissingAxisError(OQWalkError):
    pass


class EmptyEnsembleError(OQWalkError):
    pass


class HorizonMismatchError(OQWalkError):
    pass


class SplitIdentityError(OQWalkError):
    """Raised when the spectral-radius split identity fails beyond tolerance."""
