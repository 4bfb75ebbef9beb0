"""Exception types shared across the toolkit."""


class MpspaceError(Exception):
    """Base class for all errors raised by mpspace."""


class RingMismatchError(MpspaceError, ValueError):
    """Operands live in different polynomial rings."""


class UnknownVariableError(MpspaceError, KeyError):
    pass


class ParseError(MpspaceError, ValueError):
    def __init__(self, message, text="", pos=0):
        self.text = text
        self.pos = pos
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.column = line, col
        super().__init__(f"{message} (line {line}, column {col})")


class DimensionMismatchError(MpspaceError, ValueError):
    pass


class NotZeroDimensional(MpspaceError):
    """The quotient by the ideal is not a finite-dimensional vector space."""


class NotFinite(MpspaceError):
    """A local length did not stabilise before the configured cap."""


class IncompleteOverRationals(MpspaceError):
    """Some points of a zero-dimensional scheme are not rational.

    ``points`` holds the rational points that were found.
    """

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points


class CertificateError(MpspaceError):
    """A verification step that a pipeline depends on did not pass."""


class InconsistentSystem(MpspaceError, ValueError):
    pass


class UnderdeterminedPage(MpspaceError):
    def __init__(self, message, bounds=None):
        super().__init__(message)
        self.bounds = bounds
