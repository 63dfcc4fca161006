"""Exception hierarchy shared by every module."""


class FSPAError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVectorError(FSPAError, ValueError):
    """A vector was too small to normalize."""


class DimensionMismatch(FSPAError, ValueError):
    pass


class NotSymmetricError(FSPAError, ValueError):
    pass


class NonFiniteError(FSPAError, ValueError):
    pass


class NormViolation(FSPAError, ValueError):
    """Operator spectral norm exceeds the bound required by FSPA."""

    def __init__(self, norm: float, bound: float = 1.0):
        self.norm = norm
        self.bound = bound
        super().__init__(f"spectral norm {norm:.12g} exceeds {bound:.12g}")


class KernelAnnihilation(FSPAError, ArithmeticError):
    """The iterate was mapped to zero (it lies in the null space of rho).

    The partial trace up to the failing application is kept on ``trace``.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class GapRequired(FSPAError, ValueError):
    """A bound needs lambda_1 > lambda_2 strictly."""


class QpeConfigurationError(FSPAError, ValueError):
    pass


class DataFormatError(FSPAError, ValueError):
    pass


class ZeroVarianceError(FSPAError, ValueError):
    def __init__(self, feature: str):
        self.feature = feature
        super().__init__(f"feature {feature!r} has zero variance")


class EncodingError(FSPAError, ValueError):
    def __init__(self, row: int, message: str = "zero row cannot be amplitude-encoded"):
        self.row = row
        super().__init__(f"row {row}: {message}")


class ConfigError(FSPAError, ValueError):
    """Invalid scenario configuration or CLI parameters."""
