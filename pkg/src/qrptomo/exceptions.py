"""Exception and warning types shared across the package."""


class QrpError(Exception):
    """Base class for all package errors."""


class PhysicalityError(QrpError, ValueError):
    """A matrix failed the density-matrix invariants."""


class RankDeficiencyError(QrpError, ArithmeticError):
    """A linear system is singular or too ill-conditioned to invert.

    ``kappa`` carries the condition number when it was computed.
    """

    def __init__(self, message, kappa=None):
        super().__init__(message)
        self.kappa = kappa


class ConvergenceError(QrpError, ArithmeticError):
    """An iterative routine failed to reach its target."""


class TraceDriftError(QrpError, ArithmeticError):
    """Integration step changed the trace beyond tolerance."""


class ConfigError(QrpError, ValueError):
    """Invalid experiment configuration."""


class TruncationWarning(UserWarning):
    """Finite Fock cutoff discards more weight than expected."""
