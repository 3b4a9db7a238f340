import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import crandn
from wavedirac.errors import DomainError
from wavedirac.linalg_core import (
    InnerProductSpace,
    adjoint,
    func_calc,
    hermitian_eig,
    hermitize,
    is_normal,
    kernel_projection,
    matrix_exp,
    numerical_rank,
    op_norm,
    polar_decompose,
    weighted_adjoint,
)


def test_adjoint_examples():
    assert np.array_equal(adjoint([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]]))
    assert np.array_equal(adjoint(np.eye(3)), np.eye(3))


def test_adjoint_conjugates():
    M = np.array([[1 + 2j, 3], [0, -1j]])
    assert np.array_equal(adjoint(M), M.conj().T)


def test_inner_product_is_conjugate_linear_in_first_slot():
    space = InnerProductSpace.standard(2)
    f, g = np.array([1j, 0]), np.array([1, 0])
    assert space.inner(f, g) == -1j


def test_degenerate_inner_product_rejected():
    with pytest.raises(ValueError, match="degenerate inner product"):
        InnerProductSpace(np.diag([1.0, 0.0]))
    with pytest.raises(ValueError, match="degenerate inner product"):
        InnerProductSpace(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_weighted_adjoint_identity_example():
    I = InnerProductSpace.standard(3)
    assert np.allclose(weighted_adjoint(np.eye(3), I, I), np.eye(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
def test_weighted_adjoint_defining_relation(seed, n, m):
    rng = np.random.default_rng(seed)
    Gd = crandn(rng, n, n)
    Gd = Gd @ adjoint(Gd) + np.eye(n)
    Gr = crandn(rng, m, m)
    Gr = Gr @ adjoint(Gr) + np.eye(m)
    D, Rg = InnerProductSpace(Gd), InnerProductSpace(Gr)
    M = crandn(rng, m, n)
    Ms = weighted_adjoint(M, D, Rg)
    f, g = crandn(rng, n), crandn(rng, m)
    lhs = Rg.inner(g, M @ f)
    rhs = D.inner(Ms @ g, f)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))


def test_polar_positive_diagonal():
    p = polar_decompose(np.diag([2.0, 3.0]))
    assert np.allclose(p.partial_isometry, np.eye(2))
    assert np.allclose(p.modulus, np.diag([2.0, 3.0]))


def test_polar_nilpotent_example():
    T = np.array([[0.0, 1.0], [0.0, 0.0]])
    p = polar_decompose(T)
    assert np.allclose(p.modulus, np.diag([0.0, 1.0]))
    assert np.allclose(p.partial_isometry, T)
    assert np.allclose(p.comodulus, np.diag([1.0, 0.0]))
    assert p.rank == 1


def test_polar_zero_matrix():
    p = polar_decompose(np.zeros((2, 3)))
    assert p.rank == 0
    assert not np.any(p.partial_isometry) and not np.any(p.modulus)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6), st.integers(0, 6))
def test_polar_invariants(seed, m, n, r):
    rng = np.random.default_rng(seed)
    r = min(r, m, n)
    T = crandn(rng, m, r) @ crandn(rng, r, n) if r else np.zeros((m, n), dtype=complex)
    p = polar_decompose(T)
    V = p.partial_isometry
    scale = 1 + op_norm(T)
    assert op_norm(V @ p.modulus - T) <= 1e-12 * scale * 10
    assert op_norm(p.comodulus @ V - T) <= 1e-12 * scale * 10
    # V*V and VV* are the projections onto the orthogonal complements of ker T and ker T*
    assert op_norm(adjoint(V) @ V - (np.eye(n) - kernel_projection(T))) <= 1e-9
    assert op_norm(V @ adjoint(V) - (np.eye(m) - kernel_projection(adjoint(T)))) <= 1e-9
    assert op_norm(V @ p.modulus @ adjoint(V) - p.comodulus) <= 1e-10 * scale
    assert p.rank == numerical_rank(T)


def test_hermitian_eig_examples():
    assert np.allclose(hermitian_eig(np.diag([3.0, 1.0, 2.0])).eigenvalues, [1, 2, 3])
    assert np.allclose(hermitian_eig([[2.0, 1.0], [1.0, 2.0]]).eigenvalues, [1, 3])


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        hermitian_eig([[1.0, 1.0], [0.0, 1.0]])


def test_hermitize_tolerates_roundoff():
    S = np.array([[1.0, 1e-14], [0.0, 1.0]])
    H = hermitize(S)
    assert np.array_equal(H, adjoint(H))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_hermitian_eig_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    X = crandn(rng, n, n)
    S = X + adjoint(X)
    spec = hermitian_eig(S)
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    assert op_norm(spec.reconstruct() - S) <= 1e-12 * (1 + op_norm(S)) * n
    U = spec.eigenvectors
    assert op_norm(adjoint(U) @ U - np.eye(n)) <= 1e-12 * n


def test_func_calc_examples():
    D = np.diag([1.0, 4.0])
    assert np.allclose(func_calc(D, lambda x: x), D)
    assert np.allclose(func_calc(D, np.sqrt), np.diag([1.0, 2.0]))
    assert np.allclose(func_calc(np.diag([1.0, 2.0]), lambda x: np.cos(np.pi * x)), np.diag([-1.0, 1.0]))


def test_func_calc_undefined_on_spectrum():
    with pytest.raises(DomainError, match="function undefined on spectrum"):
        func_calc(np.diag([0.0, 1.0]), lambda x: 1.0 / x)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_func_calc_is_multiplicative(seed, n):
    rng = np.random.default_rng(seed)
    X = crandn(rng, n, n)
    S = X + adjoint(X)
    f = func_calc(S, np.sin)
    g = func_calc(S, np.cos)
    fg = func_calc(S, lambda x: np.sin(x) * np.cos(x))
    assert op_norm(f @ g - fg) <= 1e-10
    assert op_norm(f @ f + g @ g - np.eye(n)) <= 1e-10


def test_matrix_exp_examples():
    assert np.array_equal(matrix_exp(np.zeros((3, 3)), 2.5), np.eye(3))
    assert np.allclose(matrix_exp(np.diag([1.0, -2.0]), 1.0), np.diag([np.e, np.exp(-2.0)]))
    t = 1.7
    assert np.allclose(matrix_exp([[0.0, 1.0], [0.0, 0.0]], t), [[1.0, t], [0.0, 1.0]], atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(-3.0, 3.0))
def test_matrix_exp_normal_path_matches_general(seed, n, t):
    rng = np.random.default_rng(seed)
    X = crandn(rng, n, n)
    S = 0.5 * (X - adjoint(X))
    assert is_normal(S)
    E = matrix_exp(S, t)
    assert op_norm(E - expm(S * t)) <= 1e-9
    assert op_norm(adjoint(E) @ E - np.eye(n)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_matrix_exp_semigroup_law(seed, n, s, t):
    rng = np.random.default_rng(seed)
    M = crandn(rng, n, n) * 0.5
    lhs = matrix_exp(M, s + t)
    rhs = matrix_exp(M, s) @ matrix_exp(M, t)
    assert op_norm(lhs - rhs) <= 1e-10 * (1 + op_norm(lhs))
