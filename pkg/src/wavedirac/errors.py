"""Exception types shared across the package."""


class WaveDiracError(Exception):
    """Base class for all package errors."""


class DomainError(WaveDiracError, ValueError):
    """Input violates a precondition (shape, rank, definiteness, sign of t)."""


class SpectralPointError(WaveDiracError, ValueError):
    """Requested point lies on (or numerically at) the spectrum."""


class VerificationError(WaveDiracError, ArithmeticError):
    """A postcondition residual exceeded its tolerance."""
