"""Exception types raised across the package."""


class QuditCloningError(ValueError):
    """Base class for all input/contract violations."""


class DimensionTooSmallError(QuditCloningError):
    pass


class DimensionMismatchError(QuditCloningError):
    pass


class InvalidTargetError(QuditCloningError):
    """Register indices out of range, repeated, or an invalid subset."""


class InvalidIndexError(QuditCloningError):
    """Signal/noise index outside 1..n or conflicting loss-recovery indices."""


class MalformedStateFileError(QuditCloningError):
    pass


class NormOutOfRangeError(QuditCloningError):
    pass


class NotAmeError(QuditCloningError):
    pass


class NonOrthonormalError(QuditCloningError):
    pass


class UnauthorizedSubsetError(QuditCloningError):
    pass


class DegenerateBasisError(QuditCloningError):
    """Recovery vectors fail the orthonormality check."""


class UnsupportedDimensionWarning(UserWarning):
    """A closed form is only known for a specific dimension; result is numerical."""
