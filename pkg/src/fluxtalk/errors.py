"""Exception hierarchy.

Every error raised by the package derives from :class:`FluxtalkError`, so the
CLI can map failures onto exit codes without catching unrelated exceptions.
"""


class FluxtalkError(Exception):
    """Base class for all package errors."""


class ConfigError(FluxtalkError, ValueError):
    """A device or scenario document violates an invariant."""


class DispersiveViolation(FluxtalkError):
    """Qubit-resonator detuning is too small for the dispersive approximation."""


class FrequencyOutOfRange(FluxtalkError):
    """A tone frequency lies outside a tabulated frequency domain."""


class NoInteriorMinimum(FluxtalkError):
    """The mean-frequency curve has no interior minimum on the search interval."""


class FitFailure(FluxtalkError):
    """A nonlinear fit did not converge."""


class DegenerateTraces(FluxtalkError):
    """Resonator traces carry no usable periodic signal."""


class ZeroDenominator(FluxtalkError):
    """The self-flux slope is not resolved above its noise."""


class InsufficientSpan(FluxtalkError):
    """An amplitude calibration sweep stops short of the sweet spot."""


class AmbiguousPhase(FluxtalkError):
    """An interference amplitude is too small to fix its phase."""


class PairMismatch(FluxtalkError):
    """Two crosstalk matrices do not cover the same ordered pairs."""


class ReconstructionIllConditioned(FluxtalkError):
    """Tomographic linear inversion is numerically ill conditioned."""
