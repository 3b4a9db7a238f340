"""Finite-dimensional verification toolkit for damped wave equations and their first-order block operators."""

__version__ = "0.1.0"

from .errors import DomainError, SpectralPointError, VerificationError, WaveDiracError

__all__ = [
    "__version__",
    "DomainError",
    "SpectralPointError",
    "VerificationError",
    "WaveDiracError",
]
