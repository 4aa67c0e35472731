"""Exception hierarchy shared by every module."""


class PSpinError(Exception):
    """Base class for all errors raised by :mod:`pspin`."""


class PreconditionError(PSpinError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class BudgetExceeded(PSpinError):
    """The requested work or memory exceeds the configured budget."""


class FactorizationError(PSpinError):
    """A covariance matrix could not be factorized (numerically not PD)."""


class OGPViolation(PSpinError):
    """The set does not exhibit the requested overlap gap.

    ``witnesses`` holds up to 16 offending ordered pairs as ``(bits, bits)``.
    """

    def __init__(self, message, witnesses=()):
        super().__init__(message)
        self.witnesses = list(witnesses)
