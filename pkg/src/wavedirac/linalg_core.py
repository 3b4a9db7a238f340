"""Dense complex linear algebra kernels.

Operators are plain 2-D ``numpy`` arrays of dtype ``complex128``; helpers in
this module validate and normalise inputs.  Weighted inner products
``<f, g>_G = f^* G g`` are carried by :class:`InnerProductSpace`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm, schur

from .errors import DomainError

EPS = np.finfo(float).eps
DEFAULT_TOL = 1e-10
HERMITIAN_TOL = 1e-10
NORMALITY_TOL = 1e-12


def as_operator(M, name: str = "operator") -> np.ndarray:
    """Return ``M`` as a finite complex 2-D array (rows, cols >= 1)."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def op_norm(M) -> float:
    """Operator 2-norm (largest singular value)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def within(residual: float, tol: float, scale: float = 0.0) -> bool:
    """Hybrid absolute/relative test ``residual <= tol * (1 + scale)``."""
    return residual <= tol * (1.0 + scale)


def rank_cutoff(singular_values: np.ndarray, shape: tuple[int, int]) -> float:
    if singular_values.size == 0:
        return 0.0
    return max(shape) * EPS * float(singular_values[0])


def numerical_rank(M) -> int:
    M = np.asarray(M)
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rank_cutoff(s, M.shape)))


def adjoint(M) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(M)).T


@dataclass(frozen=True)
class InnerProductSpace:
    """Coordinate space ``C^dim`` with a Hermitian positive-definite Gram matrix."""

    gram: np.ndarray

    def __post_init__(self):
        G = as_operator(self.gram, "gram")
        if G.shape[0] != G.shape[1]:
            raise DomainError("degenerate inner product: gram must be square")
        scale = max(op_norm(G), np.finfo(float).tiny)
        if op_norm(G - adjoint(G)) > 1e-12 * scale:
            raise DomainError("degenerate inner product: gram is not Hermitian")
        G = 0.5 * (G + adjoint(G))
        if np.linalg.eigvalsh(G)[0] <= 0.0:
            raise DomainError("degenerate inner product: gram is not positive definite")
        object.__setattr__(self, "gram", G)

    @classmethod
    def standard(cls, dim: int) -> "InnerProductSpace":
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def inner(self, f, g) -> complex:
        """``<f, g>``, conjugate-linear in the first slot."""
        return complex(np.vdot(f, self.gram @ np.asarray(g)))

    def norm(self, f) -> float:
        return float(np.sqrt(max(self.inner(f, f).real, 0.0)))


def weighted_adjoint(M, domain: InnerProductSpace, range: InnerProductSpace) -> np.ndarray:
    """Adjoint of ``M: domain -> range`` with respect to both Gram matrices.

    Returns ``G_domain^{-1} M^* G_range``, the unique operator with
    ``<M f, g>_range = <f, M^dagger g>_domain``.
    """
    M = as_operator(M)
    if M.shape != (range.dim, domain.dim):
        raise DomainError(
            f"operator shape {M.shape} does not map C^{domain.dim} -> C^{range.dim}"
        )
    try:
        chol = np.linalg.cholesky(domain.gram)
    except np.linalg.LinAlgError as exc:
        raise DomainError("degenerate inner product") from exc
    rhs = adjoint(M) @ range.gram
    y = np.linalg.solve(chol, rhs)
    return np.linalg.solve(adjoint(chol), y)


@dataclass(frozen=True)
class PolarParts:
    """``T = V |T| = |T^*| V`` with ``V`` vanishing on ``ker T``."""

    partial_isometry: np.ndarray
    modulus: np.ndarray
    comodulus: np.ndarray
    rank: int


def polar_decompose(T) -> PolarParts:
    """Polar decomposition from a full SVD with the standard rank cutoff."""
    T = as_operator(T, "T")
    W, s, Vh = np.linalg.svd(T, full_matrices=True)
    r = int(np.sum(s > rank_cutoff(s, T.shape))) if s.size else 0
    Wr, Vr = W[:, :r], adjoint(Vh)[:, :r]
    sr = s[:r]
    V_T = Wr @ adjoint(Vr)
    modulus = (Vr * sr) @ adjoint(Vr)
    comodulus = (Wr * sr) @ adjoint(Wr)
    # exact Hermitian symmetry for downstream eigensolvers
    modulus = 0.5 * (modulus + adjoint(modulus))
    comodulus = 0.5 * (comodulus + adjoint(comodulus))
    return PolarParts(V_T, modulus, comodulus, r)


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ adjoint(U)


def hermitize(S, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(S + S^*)/2``; raise if ``S`` is not Hermitian within ``tol``."""
    S = as_operator(S, "S")
    if S.shape[0] != S.shape[1]:
        raise DomainError("not Hermitian: matrix is not square")
    if op_norm(S - adjoint(S)) > tol * max(op_norm(S), 1.0):
        raise DomainError("not Hermitian")
    return 0.5 * (S + adjoint(S))


def hermitian_eig(S) -> HermitianSpectrum:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix."""
    H = hermitize(S)
    w, U = np.linalg.eigh(H)
    return HermitianSpectrum(w, U)


def _apply_scalar(phi: Callable, values: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        try:
            out = np.asarray(phi(values), dtype=complex)
            if out.shape != values.shape:
                raise ValueError
        except (TypeError, ValueError):
            out = np.array([complex(phi(float(v))) for v in values])
    return out


def func_calc(S, phi: Callable, spectrum: HermitianSpectrum | None = None) -> np.ndarray:
    """Spectral functional calculus ``phi(S) = U phi(Lambda) U^*``.

    ``phi`` is applied to the eigenvalue array (vectorised) and falls back to
    elementwise calls.  A precomputed ``spectrum`` of ``S`` may be supplied.
    """
    spec = spectrum if spectrum is not None else hermitian_eig(S)
    try:
        vals = _apply_scalar(phi, spec.eigenvalues)
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise DomainError("function undefined on spectrum") from exc
    if not np.all(np.isfinite(vals)):
        raise DomainError("function undefined on spectrum")
    U = spec.eigenvectors
    return (U * vals) @ adjoint(U)


def is_normal(M, tol: float = NORMALITY_TOL) -> bool:
    M = np.asarray(M)
    scale = op_norm(M) ** 2
    return op_norm(M @ adjoint(M) - adjoint(M) @ M) <= tol * max(scale, 1e-300)


def _expm_normal(M: np.ndarray, t: float) -> np.ndarray:
    # complex Schur form of a normal matrix is diagonal
    Tm, Z = schur(M, output="complex")
    return (Z * np.exp(t * np.diag(Tm))) @ adjoint(Z)


def _expm_general(M: np.ndarray, t: float) -> np.ndarray:
    return expm(t * M)


def matrix_exp(M, t: float = 1.0) -> np.ndarray:
    """``exp(t M)``; normal matrices are diagonalised, others use Pade scaling and squaring."""
    M = as_operator(M, "M")
    if M.shape[0] != M.shape[1]:
        raise DomainError("matrix_exp requires a square matrix")
    n = M.shape[0]
    if t == 0 or not np.any(M):
        return np.eye(n, dtype=complex)
    if is_normal(M):
        return _expm_normal(M, t)
    return _expm_general(M, t)


def orth_range(M) -> np.ndarray:
    """Orthonormal basis of ``ran M`` from left singular vectors above the cutoff."""
    M = np.asarray(M, dtype=complex)
    W, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > rank_cutoff(s, M.shape)))
    return W[:, :r]


def kernel_projection(M) -> np.ndarray:
    """Orthogonal projection onto ``ker M``."""
    M = np.asarray(M, dtype=complex)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > rank_cutoff(s, M.shape))) if s.size else 0
    N = adjoint(Vh)[:, r:]
    return N @ adjoint(N)
