"""Exception hierarchy shared by every module of the package."""


class EverettError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(EverettError, ValueError):
    pass


class InvalidDimension(EverettError, ValueError):
    pass


class NotHermitian(EverettError, ValueError):
    pass


class NotNormalized(EverettError, ValueError):
    pass


class ConvergenceFailure(EverettError, RuntimeError):
    pass


class DegenerateSpectrum(EverettError, ValueError):
    pass


class ConditionM2Violation(EverettError, RuntimeError):
    pass


class RetriesExhausted(EverettError, RuntimeError):
    pass


class ConfigInvalid(EverettError, ValueError):
    """Scenario configuration failed validation.

    ``errors`` maps field names to human readable diagnostics.
    """

    def __init__(self, errors):
        self.errors = dict(errors)
        msg = "; ".join(f"{k}: {v}" for k, v in sorted(self.errors.items()))
        super().__init__(msg or "invalid configuration")


class IoFailure(EverettError, OSError):
    pass
