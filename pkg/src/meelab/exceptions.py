"""
Exceptions that are raised by ``meelab``
"""


class MeeLabException(Exception):
    """
    Base class for exceptions raised by this package
    """

    exit_code = 1


class ParameterError(MeeLabException):
    """
    Raised when an argument violates the precondition of an operation,
    e.g. an order ``alpha`` of 1, an out-of-range component index or
    a shift beyond the family's ``s_max``.
    """


class ConfigError(ParameterError):
    """
    Raised when an experiment configuration cannot be loaded or validated.
    """

    def __init__(self, msg, *args, lineno=None, colno=None):
        if lineno is not None:
            msg = f"{msg} (line {lineno}, column {colno})"
        super().__init__(msg, *args)
        self.lineno = lineno
        self.colno = colno


class NumericalInputError(MeeLabException):
    """
    Raised when a numerical routine receives non-finite values.
    """

    exit_code = 2


class NumericalError(MeeLabException):
    """
    Raised when an evaluation does not produce a finite result,
    e.g. the logarithm of a vanishing information potential.
    """

    exit_code = 2

    def __init__(self, msg, *args, shifts=None):
        if shifts is not None:
            msg = f"{msg} at shifts {tuple(shifts)}"
        super().__init__(msg, *args)
        self.shifts = shifts


class TheoremViolation(MeeLabException):
    """
    Raised when a sweep over a CSUM family reports a violated inequality.
    This signals a bug (or a grid too coarse for the tolerance), since
    the inequality is a theorem for such families.
    """

    exit_code = 3

    def __init__(self, reports, msg=None):
        if msg is None:
            msg = f"{len(reports)} sweep cell(s) violate the information potential ordering"
        super().__init__(msg)
        self.reports = reports
