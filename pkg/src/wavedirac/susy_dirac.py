"""Supersymmetric Dirac-type operator ``Q = [[0, T*], [T, 0]]``.

``Q`` acts on ``C^n (+) C^m`` for ``T`` of shape ``(m, n)``; its square is
``diag(T*T, TT*)``.  The checks here compare two independently computed
sides of each identity and return operator-norm residuals.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, SpectralPointError, VerificationError
from .linalg_core import (
    EPS,
    PolarParts,
    adjoint,
    as_operator,
    hermitian_eig,
    kernel_projection,
    op_norm,
    polar_decompose,
    rank_cutoff,
)


@dataclass(frozen=True)
class SuperchargeSystem:
    T: np.ndarray
    Q: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    polar: PolarParts

    @property
    def n(self) -> int:
        return self.T.shape[1]

    @property
    def m(self) -> int:
        return self.T.shape[0]

    @property
    def rank(self) -> int:
        return self.polar.rank

    @property
    def sigma3(self) -> np.ndarray:
        return np.diag(np.concatenate([np.ones(self.n), -np.ones(self.m)])).astype(complex)

    def kernel_projection(self) -> np.ndarray:
        """``P_ker(Q)`` assembled blockwise as ``P_ker(T) (+) P_ker(T*)``."""
        P = np.zeros_like(self.Q)
        P[: self.n, : self.n] = kernel_projection(self.T)
        P[self.n :, self.n :] = kernel_projection(adjoint(self.T))
        return P

    def partial_isometry_Q(self) -> np.ndarray:
        """``V_Q = [[0, V_T*], [V_T, 0]]``."""
        V = self.polar.partial_isometry
        VQ = np.zeros_like(self.Q)
        VQ[: self.n, self.n :] = adjoint(V)
        VQ[self.n :, : self.n] = V
        return VQ


def build_supercharge(T) -> SuperchargeSystem:
    T = as_operator(T, "T")
    m, n = T.shape
    Q = np.zeros((n + m, n + m), dtype=complex)
    Q[:n, n:] = adjoint(T)
    Q[n:, :n] = T
    H1 = adjoint(T) @ T
    H2 = T @ adjoint(T)
    return SuperchargeSystem(T, Q, 0.5 * (H1 + adjoint(H1)), 0.5 * (H2 + adjoint(H2)),
                             polar_decompose(T))


def _phi_with_kernel(H: np.ndarray, phi: Callable, kernel_dim: int) -> np.ndarray:
    # H is PSD: its kernel_dim smallest eigenvalues are the kernel, pinned to 0
    spec = hermitian_eig(H)
    lam = spec.eigenvalues.copy()
    lam[:kernel_dim] = 0.0
    lam[kernel_dim:] = np.maximum(lam[kernel_dim:], 0.0)
    with np.errstate(all="ignore"):
        vals = np.asarray([complex(phi(float(x))) for x in lam])
    if not np.all(np.isfinite(vals)):
        raise DomainError("function undefined on spectrum")
    U = spec.eigenvectors
    return (U * vals) @ adjoint(U)


def phi_pair(sys: SuperchargeSystem, phi: Callable) -> tuple[np.ndarray, np.ndarray]:
    """``(phi(H1), phi(H2))`` with kernels fixed by the numerical rank of ``T``."""
    return (
        _phi_with_kernel(sys.H1, phi, sys.n - sys.rank),
        _phi_with_kernel(sys.H2, phi, sys.m - sys.rank),
    )


def check_intertwining(sys: SuperchargeSystem, phi: Callable) -> float:
    """``||V_T phi(H1) - phi(H2) V_T||`` for a scalar function ``phi``."""
    f1, f2 = phi_pair(sys, phi)
    V = sys.polar.partial_isometry
    return op_norm(V @ f1 - f2 @ V)


def nonzero_spectra(sys: SuperchargeSystem) -> tuple[np.ndarray, np.ndarray]:
    """Sorted nonzero eigenvalues of ``H1`` and ``H2`` (``rank`` of each)."""
    r = sys.rank
    e1 = np.linalg.eigvalsh(sys.H1)
    e2 = np.linalg.eigvalsh(sys.H2)
    return e1[len(e1) - r :], e2[len(e2) - r :]


def isospectrality_residual(sys: SuperchargeSystem) -> float:
    """Largest ``|a - b| / (1 + |a|)`` over paired nonzero eigenvalues."""
    a, b = nonzero_spectra(sys)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(a))))


def _spectral_distance(sys: SuperchargeSystem, w: complex) -> float:
    spec = np.concatenate([np.linalg.eigvalsh(sys.H1), np.linalg.eigvalsh(sys.H2)])
    return float(np.min(np.abs(spec - w)))


def resolvent_Q(sys: SuperchargeSystem, zeta: complex) -> np.ndarray:
    """Block resolvent ``(Q - zeta)^{-1}`` built from ``(H_j - zeta^2)^{-1}``."""
    zeta = complex(zeta)
    z2 = zeta * zeta
    if _spectral_distance(sys, z2) < 1e-8 * (1.0 + abs(zeta) ** 2):
        raise SpectralPointError(f"spectral point: zeta^2 = {z2} lies on the spectrum")
    n, m = sys.n, sys.m
    R1 = np.linalg.inv(sys.H1 - z2 * np.eye(n))
    R2 = np.linalg.inv(sys.H2 - z2 * np.eye(m))
    out = np.empty((n + m, n + m), dtype=complex)
    out[:n, :n] = zeta * R1
    out[:n, n:] = adjoint(sys.T) @ R2
    out[n:, :n] = sys.T @ R1
    out[n:, n:] = zeta * R2
    return out


def resolvent_identity_residuals(sys: SuperchargeSystem, z: complex) -> tuple[float, float]:
    """Residuals of ``I + z(H2-z)^{-1} = T(H1-z)^{-1}T*`` and its mirror."""
    n, m = sys.n, sys.m
    T = sys.T
    R1 = np.linalg.inv(sys.H1 - z * np.eye(n))
    R2 = np.linalg.inv(sys.H2 - z * np.eye(m))
    r2 = op_norm(np.eye(m) + z * R2 - T @ R1 @ adjoint(T))
    r1 = op_norm(np.eye(n) + z * R1 - adjoint(T) @ R2 @ T)
    return r1, r2


class SuperchargeDiagonalization(NamedTuple):
    U: np.ndarray
    D: np.ndarray
    basis: np.ndarray


def orthogonal_kernel_complement(sys: SuperchargeSystem) -> np.ndarray:
    """Orthonormal basis of ``(ker Q)^perp``; the identity when ``ker Q = {0}``."""
    N = sys.Q.shape[0]
    _, s, Vh = np.linalg.svd(sys.Q)
    r = int(np.sum(s > rank_cutoff(s, sys.Q.shape)))
    if r == N:
        return np.eye(N, dtype=complex)
    return adjoint(Vh)[:, :r]


def diagonalize_supercharge(sys: SuperchargeSystem) -> SuperchargeDiagonalization:
    """``U = 2^{-1/2} [[I, V*], [-V, I]]`` and ``D = diag(|T|, -|T*|)`` on ``(ker Q)^perp``.

    Both are returned in the coordinates of ``basis`` (columns spanning
    ``(ker Q)^perp``), so kernel directions are excluded.
    """
    n, m = sys.n, sys.m
    V = sys.polar.partial_isometry
    U_full = np.block([[np.eye(n), adjoint(V)], [-V, np.eye(m)]]) / np.sqrt(2.0)
    D_full = np.zeros_like(sys.Q)
    D_full[:n, :n] = sys.polar.modulus
    D_full[n:, n:] = -sys.polar.comodulus
    K = orthogonal_kernel_complement(sys)
    return SuperchargeDiagonalization(adjoint(K) @ U_full @ K, adjoint(K) @ D_full @ K, K)


def diagonalization_residuals(sys: SuperchargeSystem) -> tuple[float, float]:
    """``(||U Q U^{-1} - D||, ||U^* U - I||)`` on ``(ker Q)^perp``."""
    U, D, K = diagonalize_supercharge(sys)
    Qc = adjoint(K) @ sys.Q @ K
    Uinv = np.linalg.inv(U)
    return op_norm(U @ Qc @ Uinv - D), op_norm(adjoint(U) @ U - np.eye(U.shape[0]))


def check_nelson_symmetry(sys: SuperchargeSystem) -> float:
    """``||sigma3 Q sigma3 + Q||``; zero exactly since only signs change."""
    s3 = sys.sigma3
    return op_norm(s3 @ sys.Q @ s3 + sys.Q)


def eigen_transfer(sys: SuperchargeSystem, f, lam: float, tol: float = 1e-9) -> np.ndarray:
    """Carry an eigenvector ``H1 f = lam^2 f`` to ``g = T f`` with ``H2 g = lam^2 g``.

    Also verifies that ``(f, g / lam)`` is an eigenvector of ``Q`` for ``lam``.
    """
    if lam == 0:
        raise DomainError("transfer undefined at zero")
    f = np.asarray(f, dtype=complex).reshape(-1)
    if f.shape[0] != sys.n:
        raise DomainError("eigenvector has the wrong length")
    lam2 = lam * lam
    scale = 1.0 + lam2
    if np.linalg.norm(sys.H1 @ f - lam2 * f) > tol * scale * max(np.linalg.norm(f), 1.0):
        raise DomainError("f is not an eigenvector of H1 for lam^2")
    g = sys.T @ f
    if np.linalg.norm(sys.H2 @ g - lam2 * g) > tol * scale:
        raise VerificationError("H2 (T f) != lam^2 T f")
    x = np.concatenate([f, g / lam])
    if np.linalg.norm(sys.Q @ x - lam * x) > tol * scale:
        raise VerificationError("(f, T f / lam) is not a Q-eigenvector")
    return g


def eigen_transfer_adjoint(sys: SuperchargeSystem, g, lam: float, tol: float = 1e-9) -> np.ndarray:
    """Mirror transfer ``H2 g = lam^2 g  =>  H1 (T* g) = lam^2 T* g``."""
    if lam == 0:
        raise DomainError("transfer undefined at zero")
    g = np.asarray(g, dtype=complex).reshape(-1)
    f = adjoint(sys.T) @ g
    if np.linalg.norm(sys.H1 @ f - lam * lam * f) > tol * (1.0 + lam * lam):
        raise VerificationError("H1 (T* g) != lam^2 T* g")
    return f


def kernel_dimensions(sys: SuperchargeSystem) -> tuple[int, int]:
    """``(dim ker H1, dim ker H2)`` counted from eigenvalues, independent of the SVD rank."""

    def count(H: np.ndarray) -> int:
        w = np.linalg.eigvalsh(H)
        top = float(np.max(np.abs(w)))
        if top == 0.0:
            return H.shape[0]
        return int(np.sum(w <= 16 * H.shape[0] * EPS * top))

    return count(sys.H1), count(sys.H2)
