class DecoherenceError(Exception):
    pass


class InvalidArgumentError(DecoherenceError):
    pass


class UnphysicalStateError(DecoherenceError):
    """Covariance violates the uncertainty relation (some symplectic eigenvalue < 1)."""


class DuplicateModeError(DecoherenceError):
    pass


class InvalidSelectionError(DecoherenceError):
    pass


class MalformedStateError(DecoherenceError):
    """Covariance is non-finite, non-square or not symmetric."""


class DimensionMismatchError(DecoherenceError):
    pass


class UnsupportedPartitionError(DecoherenceError):
    """PPT is only necessary, not sufficient, for the requested split."""


class NoBoundaryError(DecoherenceError):
    pass
