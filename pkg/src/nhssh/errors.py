"""Exception types shared across the package.

Every error raised on a physics or numerics contract violation derives from
NhsshError, so callers (and the CLI) can distinguish domain failures from
programming errors.
"""


class NhsshError(Exception):
    """Base class for domain errors raised by this package."""


class ExceptionalCoupling(NhsshError):
    """One of the directional intracell couplings vanishes (delta = +/- t1)."""


class DefectiveMatrix(NhsshError):
    """Eigenvector basis is too ill-conditioned for a biorthogonal system."""


class AmbiguousFilling(NhsshError):
    """Occupation at the requested chemical potential is not well defined."""


class GapClosed(NhsshError):
    """Spectral gap closes on the sampled Brillouin zone; winding undefined."""


class OnCriticalLine(NhsshError):
    """Parameter point sits on a phase boundary; classification undefined."""


class ComplexLeakage(NhsshError):
    """Imaginary part of a nominally real observable exceeds tolerance."""


class NonPositiveTemperature(NhsshError):
    """Finite-temperature quantity requested at T <= 0."""


class StepTooLarge(NhsshError):
    """Finite-difference step too coarse for the requested derivative scan."""


class WindowTooNarrow(NhsshError):
    """Fit window contains too few samples."""


class InsufficientSizes(NhsshError):
    """Scaling fit requested with fewer than five system sizes."""


class NoPeaksFound(NhsshError):
    """Peak detection found fewer than two peaks."""
