"""Quadratic pencil and the damped Dirac-type operator.

The pencil is ``M(z) = A2 - i z R - z^2 I`` with ``A2 = |A|^2`` Hermitian PSD,
and the damped operator is ``Q = [[-iR, |A|], [|A|, 0]]``.  Invertibility of
``M(z)`` and of ``Q - z`` coincide; the resolvent of ``Q`` is assembled from
``M(z)^{-1}`` in two block forms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvals
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, SpectralPointError, VerificationError
from .linalg_core import (
    adjoint,
    as_operator,
    func_calc,
    hermitian_eig,
    hermitize,
    matrix_exp,
    op_norm,
)

ACCRETIVE_TOL = 1e-12
CONTRACTION_TOL = 1e-9


@dataclass(frozen=True)
class QuadraticPencil:
    A2: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        A2 = hermitize(self.A2, tol=1e-12)
        R = as_operator(self.R, "R")
        if R.shape != A2.shape:
            raise DomainError("A2 and R must have the same dimension")
        object.__setattr__(self, "A2", A2)
        object.__setattr__(self, "R", R)

    @property
    def n(self) -> int:
        return self.A2.shape[0]

    def is_singular(self) -> bool:
        w = hermitian_eig(self.A2).eigenvalues
        top = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
        return bool(w[0] <= self.n * np.finfo(float).eps * top * 16)


@dataclass(frozen=True)
class DampedDirac:
    Q: np.ndarray
    modA: np.ndarray
    R: np.ndarray

    @property
    def n(self) -> int:
        return self.modA.shape[0]

    def is_hermitian(self) -> bool:
        return not np.any(self.R)


def build_damped_dirac(p: QuadraticPencil) -> DampedDirac:
    """``Q = [[-iR, |A|], [|A|, 0]]`` with ``|A| = A2^{1/2}``."""
    mod = func_calc(p.A2, lambda x: np.sqrt(np.maximum(x, 0.0)))
    mod = 0.5 * (mod + adjoint(mod))
    n = p.n
    Q = np.block([[-1j * p.R, mod], [mod, np.zeros((n, n))]])
    return DampedDirac(Q, mod, p.R)


def pencil_from_operator(A, R=None) -> QuadraticPencil:
    A = as_operator(A, "A")
    n = A.shape[1]
    R = np.zeros((n, n)) if R is None else R
    return QuadraticPencil(adjoint(A) @ A, R)


def pencil_eval(p: QuadraticPencil, z: complex) -> np.ndarray:
    return p.A2 - 1j * z * p.R - z * z * np.eye(p.n)


def pencil_adjoint(p: QuadraticPencil, z: complex) -> np.ndarray:
    """Closed form ``A2 + i conj(z) R* - conj(z)^2 I`` of ``M(z)^*``."""
    zc = np.conj(z)
    return p.A2 + 1j * zc * adjoint(p.R) - zc * zc * np.eye(p.n)


def companion_matrix(p: QuadraticPencil) -> np.ndarray:
    """``[[0, I], [A2, -iR]]`` acting on ``(f, z f)``."""
    n = p.n
    return np.block([[np.zeros((n, n)), np.eye(n)], [p.A2, -1j * p.R]])


def _checked_eigvals(M: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    # LAPACK geev with balancing; residual checked per eigenpair
    w, V = np.linalg.eig(M)
    scale = max(op_norm(M), 1.0)
    for k in range(w.size):
        v = V[:, k]
        if np.linalg.norm(M @ v - w[k] * v) > tol * scale * np.linalg.norm(v):
            raise VerificationError(f"eigenpair residual too large at {w[k]}")
    return w


def pencil_spectrum(p: QuadraticPencil) -> np.ndarray:
    """Eigenvalues of the companion linearisation, sorted by (real, imag)."""
    w = _checked_eigvals(companion_matrix(p))
    return w[np.lexsort((w.imag, w.real))]


def supercharge_spectrum(d: DampedDirac) -> np.ndarray:
    w = np.asarray(eigvals(d.Q))
    return w[np.lexsort((w.imag, w.real))]


def match_spectra(a, b, drop_below: float | None = None) -> float:
    """Largest ``|a_i - b_pi(i)| / (1 + |a_i|)`` under an optimal pairing.

    With ``drop_below`` set, points of modulus below it are removed first.
    """
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if drop_below is not None:
        a, b = a[np.abs(a) >= drop_below], b[np.abs(b) >= drop_below]
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols] / (1.0 + np.abs(a[rows]))))


def distance_to_zero(d: DampedDirac) -> float:
    """Distance of the spectrum of ``Q`` to the origin (reported, not asserted)."""
    return float(np.min(np.abs(supercharge_spectrum(d))))


def _guard(p: QuadraticPencil, z: complex) -> None:
    spec = pencil_spectrum(p)
    if np.min(np.abs(spec - z)) < 1e-8 * (1.0 + abs(z)):
        raise SpectralPointError(f"pencil spectral point: z = {z}")


def resolvent_damped(d: DampedDirac, p: QuadraticPencil, z: complex, form: str = "auto") -> np.ndarray:
    """``(Q - z)^{-1}`` from the pencil.

    ``form="modulus"`` uses the block form with ``|A|^{-1}`` (needs
    invertible ``|A|``; valid at ``z = 0``).  ``form="pencil"`` uses the form
    with ``z^{-1}`` entries (needs ``z != 0``, any ``|A|``).  ``"auto"``
    picks the first when ``|A|`` is invertible.
    """
    z = complex(z)
    singular = p.is_singular()
    if z == 0 and singular:
        raise SpectralPointError("zero in spectrum")
    _guard(p, z)
    if form == "auto":
        form = "pencil" if singular else "modulus"
    n = p.n
    I = np.eye(n)
    Minv = np.linalg.inv(pencil_eval(p, z))
    mod = d.modA
    if form == "modulus":
        if singular:
            raise DomainError("modulus form needs invertible |A|")
        mod_inv = np.linalg.inv(mod)
        top_right = mod_inv + Minv @ (1j * z * p.R + z * z * I) @ mod_inv
        bottom_right = mod @ Minv @ (1j * p.R + z * I) @ mod_inv
    elif form == "pencil":
        if z == 0:
            raise DomainError("pencil form needs z != 0")
        top_right = Minv @ mod
        bottom_right = (mod @ Minv @ mod - I) / z
    else:
        raise ValueError(f"unknown resolvent form {form!r}")
    return np.block([[z * Minv, top_right], [mod @ Minv, bottom_right]])


def resolvent_at_zero(d: DampedDirac) -> np.ndarray:
    """``[[0, |A|^{-1}], [|A|^{-1}, i |A|^{-1} R |A|^{-1}]]``."""
    inv = np.linalg.inv(d.modA)
    n = d.n
    return np.block([[np.zeros((n, n)), inv], [inv, 1j * inv @ d.R @ inv]])


def neumann_inverse(p: QuadraticPencil, lam: float, max_terms: int = 10_000) -> np.ndarray:
    """``M(i lam)^{-1} = (A2 + lam^2)^{-1} [I + lam R (A2 + lam^2)^{-1}]^{-1}`` by a Neumann series.

    Requires ``||lam R (A2 + lam^2)^{-1}|| < 1``.
    """
    n = p.n
    base = np.linalg.inv(p.A2 + lam * lam * np.eye(n))
    K = lam * p.R @ base
    q = op_norm(K)
    if q >= 1.0:
        raise DomainError(f"Neumann series diverges: ||K|| = {q:.3g} >= 1")
    S = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for _ in range(max_terms):
        term = -term @ K
        S = S + term
        if op_norm(term) < 1e-17:
            break
    return base @ S


def accretivity_check(R) -> tuple[bool, float]:
    """``(margin >= -1e-12, margin)`` with margin the least eigenvalue of ``Re R``."""
    R = as_operator(R, "R")
    margin = float(np.linalg.eigvalsh(0.5 * (R + adjoint(R)))[0])
    return margin >= -ACCRETIVE_TOL, margin


def evolve_contraction(d: DampedDirac, t: float) -> np.ndarray:
    """``exp(-i Q t)``; for accretive ``R`` the result is checked to be a contraction."""
    if t < 0 and not d.is_hermitian():
        raise DomainError("semigroup only forward in time")
    S = matrix_exp(-1j * d.Q, t)
    accretive, _ = accretivity_check(d.R)
    if accretive and t >= 0 and op_norm(S) > 1.0 + CONTRACTION_TOL:
        raise VerificationError(f"contraction violated: ||exp(-iQt)|| = {op_norm(S)!r}")
    return S
