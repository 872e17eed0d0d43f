"""Exception hierarchy shared by the library and the CLI."""


class RescanError(Exception):
    """Base class for every error raised by :mod:`rescan`."""


class ConfigError(RescanError, ValueError):
    pass


class NumericalError(RescanError, ArithmeticError):
    pass


class ZeroSpectralParameter(NumericalError):
    """The spectral parameter is zero, where the Green's function is singular."""


class SingularDistance(NumericalError):
    """Green's function requested at r = 0 in d >= 2."""


class UnsupportedSheet(ConfigError):
    pass


class ZeroArgument(NumericalError):
    pass


class AccuracyLoss(NumericalError):
    """Neither the ascending series nor the asymptotic expansion reached the tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NonFiniteEntry(NumericalError):
    pass


class GridMismatch(ConfigError):
    pass


class EmptyLattice(RescanError):
    pass


class MalformedFile(ConfigError):
    pass


class IrregularGrid(MalformedFile):
    pass


class SupportMismatch(MalformedFile):
    pass


class ContourThroughZero(NumericalError):
    pass


class CountMismatch(NumericalError):
    pass
