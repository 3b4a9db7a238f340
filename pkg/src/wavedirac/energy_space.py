"""Energy space of the wave equation and its unitary equivalences.

State vectors ``(u, v)`` live in ``C^n (+) C^n`` with Gram ``diag(A*A, I)``:
the first component carries the ``A``-weighted inner product, the second the
plain one.  The maps between the weighted and plain copies of ``C^n`` are
identity matrices in these coordinates.

The range of ``A`` is represented by the orthonormal columns ``W`` of
``ran_basis``; operators on ``C^n (+) ran(A)`` are written in the
coordinates ``C^n (+) C^r`` and embedded in ``C^n (+) C^m`` through
``E = diag(I, W)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .errors import DomainError
from .linalg_core import (
    InnerProductSpace,
    adjoint,
    as_operator,
    func_calc,
    matrix_exp,
    op_norm,
    polar_decompose,
    rank_cutoff,
)

CONDITION_GUARD = 1e12


@dataclass(frozen=True)
class EnergyModel:
    A: np.ndarray
    gram_A: np.ndarray
    ran_basis: np.ndarray
    tildeA: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def weighted_space(self) -> InnerProductSpace:
        return InnerProductSpace(self.gram_A)

    @property
    def energy_space(self) -> InnerProductSpace:
        return InnerProductSpace(_block_diag(self.gram_A, np.eye(self.n)))

    @property
    def modulus(self) -> np.ndarray:
        """``|A| = (A*A)^{1/2}`` via the Hermitian functional calculus."""
        return func_calc(self.gram_A, lambda x: np.sqrt(np.maximum(x, 0.0)))

    def embedding(self) -> np.ndarray:
        """``E = diag(I_n, W)`` from ``C^n (+) C^r`` into ``C^n (+) C^m``."""
        return _block_diag(np.eye(self.n), self.ran_basis)


@dataclass(frozen=True)
class GeneratorBlock:
    G: np.ndarray
    energy_gram: np.ndarray
    R: np.ndarray


def _block_diag(X, Y) -> np.ndarray:
    X, Y = np.asarray(X, dtype=complex), np.asarray(Y, dtype=complex)
    out = np.zeros((X.shape[0] + Y.shape[0], X.shape[1] + Y.shape[1]), dtype=complex)
    out[: X.shape[0], : X.shape[1]] = X
    out[X.shape[0] :, X.shape[1] :] = Y
    return out


def build_energy_model(A) -> EnergyModel:
    """Energy model of a full-column-rank ``A``; raises on a nontrivial kernel."""
    A = as_operator(A, "A")
    m, n = A.shape
    if m < n:
        raise DomainError("kernel nontrivial: A has more columns than rows")
    W, s, _ = np.linalg.svd(A, full_matrices=False)
    if s[-1] <= rank_cutoff(s, A.shape):
        raise DomainError("kernel nontrivial: A is rank deficient")
    if (s[0] / s[-1]) ** 2 > CONDITION_GUARD:
        raise DomainError("kernel nontrivial: condition number of A*A exceeds the guard")
    G = adjoint(A) @ A
    G = 0.5 * (G + adjoint(G))
    return EnergyModel(A, G, W, adjoint(W) @ A)


def build_block_unitary(model: EnergyModel) -> np.ndarray:
    """``[[0, I], [-i Atilde, 0]]`` from the energy space onto ``C^n (+) ran(A)``."""
    n = model.n
    return np.block([[np.zeros((n, n)), np.eye(n)], [-1j * model.tildeA, np.zeros((n, n))]])


def block_unitary_inverse(model: EnergyModel) -> np.ndarray:
    """``[[0, i Atilde^{-1}], [I, 0]]``."""
    n = model.n
    inv = np.linalg.inv(model.tildeA)
    return np.block([[np.zeros((n, n)), 1j * inv], [np.eye(n), np.zeros((n, n))]])


def build_modulus_unitary(model: EnergyModel) -> tuple[np.ndarray, np.ndarray]:
    """``[[0, I], [-i|A|, 0]]`` and its inverse ``[[0, i|A|^{-1}], [I, 0]]``.

    ``|A|`` is taken from the polar decomposition of ``A``.
    """
    n = model.n
    mod = polar_decompose(model.A).modulus
    Z, I = np.zeros((n, n)), np.eye(n)
    U = np.block([[Z, I], [-1j * mod, Z]])
    Uinv = np.block([[Z, 1j * np.linalg.inv(mod)], [I, Z]])
    return U, Uinv


def build_generator(model: EnergyModel, R=None) -> GeneratorBlock:
    """``G = [[0, I], [-A*A, -R]]`` in energy coordinates."""
    n = model.n
    R = np.zeros((n, n), dtype=complex) if R is None else as_operator(R, "R")
    if R.shape != (n, n):
        raise DomainError(f"dimension mismatch: R has shape {R.shape}, expected {(n, n)}")
    G = np.block([[np.zeros((n, n)), np.eye(n)], [-model.gram_A, -R]])
    return GeneratorBlock(G, _block_diag(model.gram_A, np.eye(n)), R)


def supercharge_blocks(model: EnergyModel, R=None) -> np.ndarray:
    """``[[-iR, A*], [A, 0]]`` on ``C^n (+) C^m``."""
    n, m = model.n, model.m
    R = np.zeros((n, n)) if R is None else R
    return np.block([[-1j * np.asarray(R), adjoint(model.A)], [model.A, np.zeros((m, m))]])


def range_projection_complement(model: EnergyModel) -> np.ndarray:
    """``I - P_ker(A*)`` with the kernel taken from an independent null-space solve."""
    N = null_space(adjoint(model.A))
    return np.eye(model.m) - N @ adjoint(N)


def _projected_residual(model: EnergyModel, R) -> float:
    U = build_block_unitary(model)
    Uinv = block_unitary_inverse(model)
    L = U @ (1j * build_generator(model, R).G) @ Uinv
    E = model.embedding()
    target = supercharge_blocks(model, R) @ _block_diag(np.eye(model.n), range_projection_complement(model))
    return op_norm(E @ L @ adjoint(E) - target)


def verify_equivalence_undamped(model: EnergyModel) -> float:
    """Residual of ``U (iG) U^{-1}`` against ``Q`` with its kernel projected out.

    The conjugated generator lives on ``C^n (+) ran(A)``; it is embedded into
    ``C^n (+) C^m`` and compared with ``Q (I - P_ker Q)``, whose kernel
    projection is computed from a null-space basis of ``A*``.
    """
    return _projected_residual(model, None)


def compressed_supercharge(model: EnergyModel) -> np.ndarray:
    """``[[0, A* W], [W* A, 0]]``: ``Q`` compressed to ``C^n (+) ran(A)``."""
    n = model.n
    Z = np.zeros((n, n))
    return np.block([[Z, adjoint(model.A) @ model.ran_basis], [model.tildeA, Z]])


def damped_supercharge(model: EnergyModel, R) -> np.ndarray:
    """``[[-iR, |A|], [|A|, 0]]`` with ``|A|`` from the functional calculus."""
    n = model.n
    mod = model.modulus
    return np.block([[-1j * np.asarray(R), mod], [mod, np.zeros((n, n))]])


def verify_equivalence_damped(model: EnergyModel, R) -> tuple[float, float]:
    """``(residual_abs, residual_proj)`` for the damped generator.

    ``residual_abs`` conjugates ``iG`` by the modulus unitary and compares with
    ``[[-iR, |A|], [|A|, 0]]``; ``residual_proj`` conjugates by the range
    unitary and compares with ``[[-iR, A*], [A, 0]]`` projected onto
    ``C^n (+) ran(A)``.
    """
    R = as_operator(R, "R")
    G = build_generator(model, R).G
    U, Uinv = build_modulus_unitary(model)
    res_abs = op_norm(U @ (1j * G) @ Uinv - damped_supercharge(model, R))
    return res_abs, _projected_residual(model, R)


def damping_block_residual(model: EnergyModel, R) -> float:
    """``||U diag(0, -iR) U^{-1} - diag(-iR, 0)||`` for the range unitary."""
    n = model.n
    R = as_operator(R, "R")
    Z = np.zeros((n, n))
    lhs = build_block_unitary(model) @ _block_diag(Z, -1j * R) @ block_unitary_inverse(model)
    return op_norm(lhs - _block_diag(-1j * R, Z))


def modulus_bridge(model: EnergyModel) -> np.ndarray:
    """``U_mod U_ran^{-1}`` acting from ``C^n (+) ran(A)`` onto ``C^n (+) C^n``."""
    U, _ = build_modulus_unitary(model)
    return U @ block_unitary_inverse(model)


def verify_modulus_bridge(model: EnergyModel) -> float:
    """``||U_mod U_ran^{-1} - diag(I, V_A^* W)||`` with ``V_A`` from the polar decomposition."""
    V = polar_decompose(model.A).partial_isometry
    target = _block_diag(np.eye(model.n), adjoint(V) @ model.ran_basis)
    return op_norm(modulus_bridge(model) - target)


def bridge_conjugation_residual(model: EnergyModel) -> float:
    """Residual of ``B Q_c B^{-1} = [[0, |A|], [|A|, 0]]`` for the bridge ``B``."""
    B = modulus_bridge(model)
    lhs = B @ compressed_supercharge(model) @ np.linalg.inv(B)
    return op_norm(lhs - damped_supercharge(model, np.zeros((model.n, model.n))))


def undamped_propagator(model: EnergyModel, t: float) -> np.ndarray:
    """``[[cos(|A|t), |A|^{-1} sin(|A|t)], [-|A| sin(|A|t), cos(|A|t)]]``."""
    G = model.gram_A
    c = func_calc(G, lambda x: np.cos(np.sqrt(np.maximum(x, 0.0)) * t))
    s_over = func_calc(G, lambda x: np.sin(np.sqrt(x) * t) / np.sqrt(x))
    s_times = func_calc(G, lambda x: np.sqrt(np.maximum(x, 0.0)) * np.sin(np.sqrt(np.maximum(x, 0.0)) * t))
    return np.block([[c, s_over], [-s_times, c]])


def solve_acp(model: EnergyModel, R, u0, u1, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Solution ``(u(t), u'(t))`` of ``u'' + R u' + A*A u = 0``."""
    n = model.n
    x0 = np.concatenate([np.asarray(u0, dtype=complex), np.asarray(u1, dtype=complex)])
    x = matrix_exp(build_generator(model, R).G, t) @ x0
    return x[:n], x[n:]


def norm_equivalence_bounds(model: EnergyModel, f) -> tuple[float, float, float]:
    """``(lower, ||f||_A, upper)`` for ``eps/(1+eps)(||Af||+||f||) <= ||f||_A <= ||Af||+||f||``.

    ``eps = min(sigma_min(A)^2, 1)``: the lower bound needs ``eps <= 1``.
    """
    f = np.asarray(f, dtype=complex)
    smin = np.linalg.svd(model.A, compute_uv=False)[-1]
    eps = min(smin**2, 1.0)
    nAf = float(np.linalg.norm(model.A @ f))
    nf = float(np.linalg.norm(f))
    return eps / (1 + eps) * (nAf + nf), model.weighted_space.norm(f), nAf + nf


def dirichlet_derivative_model(N: int) -> EnergyModel:
    """Discrete ``-i d/dx`` on ``(0, 1)`` with Dirichlet ends.

    ``A`` is the ``(N+1) x N`` forward-difference matrix scaled by ``-i/h``,
    ``h = 1/(N+1)``, so ``A*A = tridiag(-1, 2, -1) / h^2``.
    """
    if N < 1:
        raise DomainError("dirichlet model needs N >= 1")
    h = 1.0 / (N + 1)
    D = np.zeros((N + 1, N))
    idx = np.arange(N)
    D[idx, idx] = 1.0
    D[idx + 1, idx] = -1.0
    return build_energy_model(-1j * D / h)


def dirichlet_eigenvalues(N: int) -> np.ndarray:
    """Closed-form ``(4/h^2) sin^2(k pi h / 2)``, ``k = 1..N``, ascending."""
    h = 1.0 / (N + 1)
    k = np.arange(1, N + 1)
    return 4.0 / h**2 * np.sin(k * np.pi * h / 2.0) ** 2
