"""Exception hierarchy.

Everything raised on bad user input derives from :class:`ValidationError`;
the CLI maps that family to exit code 2.
"""


class TorusFiberError(Exception):
    """Base class for all package errors."""


class ValidationError(TorusFiberError):
    """Input data is rejected (malformed file, bad point, unsupported case)."""


# novikov
class NotAUnit(ValidationError):
    pass


class DegenerateSeed(ValidationError):
    pass


class TruncationTooShort(ValidationError):
    pass


# polytope
class Malformed(ValidationError):
    pass


class Unbounded(ValidationError):
    pass


class NotFullDim(ValidationError):
    pass


class NotSmooth(ValidationError):
    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


# locator / potential
class NotInterior(ValidationError):
    pass


class ZeroCoordinate(ValidationError):
    pass


# lte / lift
class DimensionUnsupported(ValidationError):
    pass


class DegenerateHessian(TorusFiberError):
    pass


class ObstructedLift(TorusFiberError):
    pass


# qcoh
class RelationFailed(TorusFiberError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SingularNormalMatrix(ValidationError):
    pass
