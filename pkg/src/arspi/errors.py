"""Exception hierarchy shared by every module of the package."""


class ArspiError(Exception):
    """Base class for computation errors raised by this package."""


class DomainError(ArspiError, ValueError):
    """An argument lies outside the support of a function."""


class ParseError(ArspiError, ValueError):
    """A precipitation file could not be parsed.

    ``row`` is the 1-based line number in the file (the header is row 1).
    """

    def __init__(self, message, row):
        super().__init__(f"{type(self).__name__}(row {row}): {message}")
        self.row = row


class EmptyInput(ParseError):
    pass


class MalformedRow(ParseError):
    pass


class NegativeValue(ParseError):
    pass


class CalendarGap(ParseError):
    pass


class DuplicateMonth(CalendarGap):
    pass


class WindowTooLong(ArspiError, ValueError):
    pass


class DegenerateSeries(ArspiError, ValueError):
    pass


class AllDry(ArspiError, ValueError):
    pass


class DegenerateWet(ArspiError, ValueError):
    pass


class NonFiniteLikelihood(ArspiError, FloatingPointError):
    pass


class InsufficientChains(ArspiError, ValueError):
    pass


class IndexOutOfRange(ArspiError, IndexError):
    pass


class EmptyPosterior(ArspiError, ValueError):
    pass


class AlignmentError(ArspiError, ValueError):
    pass


class NonFinite(ArspiError, ValueError):
    pass


class ChecksumMismatch(ArspiError):
    pass
