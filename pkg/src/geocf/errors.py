"""Exception types raised by the library.

Every error that can reach a caller derives from GeoCFError so CLI and
tests can catch one base class.  Errors flagged "internal corruption"
indicate a broken invariant inside the sweep state, not bad user input.
"""


class GeoCFError(Exception):
    pass


class NotSymmetric(GeoCFError):
    pass


class NotPositiveDefinite(GeoCFError):
    def __init__(self, minor_index: int):
        super().__init__(f"leading principal minor {minor_index} is not positive")
        self.minor_index = minor_index


class DimensionMismatch(GeoCFError):
    pass


class IndexOutOfRange(GeoCFError):
    pass


class ShiftDirectionInvalid(GeoCFError):
    pass


class OmegaOutOfRange(GeoCFError):
    pass


class IterationCapExceeded(GeoCFError):
    pass


class UnsupportedDimension(GeoCFError):
    pass


class InexactDivision(GeoCFError):
    """Polynomial division left a remainder; signals internal corruption."""


class NonAffineMinor(GeoCFError):
    """A recomputed minor failed the three-point affineness check."""


class InvalidStart(GeoCFError):
    pass


class StateNotReduced(GeoCFError):
    pass


class NonPositiveT(GeoCFError):
    pass


class NonPositiveEpsilon(GeoCFError):
    pass


class ConfigInvalid(GeoCFError):
    pass


class BoundTooSmall(GeoCFError):
    pass


class InsufficientTrace(GeoCFError):
    pass


class IOFailure(GeoCFError):
    pass
