import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import conditioned, crandn
from wavedirac.errors import DomainError
from wavedirac.linalg_core import adjoint, hermitian_eig, op_norm, polar_decompose
from wavedirac.energy_space import (
    block_unitary_inverse,
    bridge_conjugation_residual,
    build_block_unitary,
    build_energy_model,
    build_generator,
    build_modulus_unitary,
    damped_supercharge,
    damping_block_residual,
    dirichlet_derivative_model,
    dirichlet_eigenvalues,
    modulus_bridge,
    norm_equivalence_bounds,
    solve_acp,
    undamped_propagator,
    verify_equivalence_damped,
    verify_equivalence_undamped,
    verify_modulus_bridge,
)


def test_identity_model():
    model = build_energy_model(np.eye(2))
    assert np.allclose(model.gram_A, np.eye(2))
    assert np.allclose(model.tildeA, np.eye(2)) or np.allclose(np.abs(model.tildeA), np.eye(2))
    assert verify_equivalence_undamped(model) <= 1e-12


def test_diagonal_weighted_inner_product():
    model = build_energy_model(np.diag([1.0, 2.0]))
    assert np.allclose(model.gram_A, np.diag([1.0, 4.0]))
    space = model.weighted_space
    assert space.inner([1, 0], [1, 0]) == pytest.approx(1.0)
    assert space.inner([0, 1], [0, 1]) == pytest.approx(4.0)
    assert verify_equivalence_undamped(model) <= 1e-10


def test_column_model():
    model = build_energy_model([[1.0], [1.0]])
    assert np.allclose(model.gram_A, [[2.0]])
    W = model.ran_basis
    # basis vector fixed up to a phase
    assert abs(abs(np.vdot(W[:, 0], np.array([1, 1]) / math.sqrt(2))) - 1) <= 1e-12
    assert abs(model.tildeA[0, 0]) == pytest.approx(math.sqrt(2))


def test_rank_deficient_rejected():
    with pytest.raises(DomainError, match="kernel nontrivial"):
        build_energy_model([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(DomainError, match="kernel nontrivial"):
        build_energy_model([[1.0, 0.0, 0.0]])


def test_generator_examples():
    model = build_energy_model([[1.0]])
    G = build_generator(model).G
    assert np.allclose(G, [[0, 1], [-1, 0]])
    assert np.allclose(np.sort(np.linalg.eigvals(G).imag), [-1, 1])
    assert np.allclose(np.linalg.eigvals(G).real, 0)
    G = build_generator(model, [[2.0]]).G
    assert np.allclose(G, [[0, 1], [-1, -2]])
    assert np.allclose(np.linalg.eigvals(G), [-1, -1], atol=1e-7)


def test_generator_dimension_mismatch():
    model = build_energy_model(np.eye(2))
    with pytest.raises(DomainError, match="dimension mismatch"):
        build_generator(model, np.eye(3))


def test_random_6x4_equivalence_and_spectrum(rng):
    A = conditioned(rng, 6, 4)
    model = build_energy_model(A)
    assert verify_equivalence_undamped(model) <= 1e-9
    ev = np.sort(np.linalg.eigvals(1j * build_generator(model).G).real)
    sv = np.linalg.svd(A, compute_uv=False)
    assert np.allclose(ev, np.sort(np.concatenate([sv, -sv])), atol=1e-9)


def test_damped_scalar_example():
    model = build_energy_model([[1.0]])
    R = np.array([[2.0]])
    Q = damped_supercharge(model, R)
    assert np.allclose(Q, [[-2j, 1], [1, 0]])
    evQ = np.linalg.eigvals(Q)
    evG = np.linalg.eigvals(build_generator(model, R).G)
    assert np.allclose(np.sort_complex(evQ), np.sort_complex(1j * evG), atol=1e-7)  # sigma(Q) = i sigma(G)
    assert np.allclose(evQ, [-1j, -1j], atol=1e-7)
    r_abs, r_proj = verify_equivalence_damped(model, R)
    assert r_abs <= 1e-12 and r_proj <= 1e-12


def test_block_unitary_is_weighted_unitary(rng):
    model = build_energy_model(conditioned(rng, 5, 3))
    U = build_block_unitary(model)
    # ||U x||^2 = <x, diag(A*A, I) x>
    assert op_norm(adjoint(U) @ U - model.energy_space.gram) <= 1e-10 * (1 + op_norm(model.gram_A))
    assert op_norm(U @ block_unitary_inverse(model) - np.eye(6)) <= 1e-10
    Um, Umi = build_modulus_unitary(model)
    assert op_norm(Um @ Umi - np.eye(6)) <= 1e-10
    assert op_norm(adjoint(Um) @ Um - model.energy_space.gram) <= 1e-10 * (1 + op_norm(model.gram_A))


def test_bridge_hermitian_positive_is_identity():
    X = np.array([[2.0, 0.5], [0.5, 1.0]])
    model = build_energy_model(X)
    B = modulus_bridge(model)
    # the range basis may carry phases; the bridge composed with W is the identity on C^n (+) C^n
    assert verify_modulus_bridge(model) <= 1e-12
    assert op_norm(B[2:, 2:] @ adjoint(model.ran_basis) - np.eye(2)) <= 1e-12


def test_bridge_swap_example():
    A = np.array([[0.0, 1.0], [1.0, 0.0]]) @ np.diag([1.0, 2.0])
    model = build_energy_model(A)
    V = polar_decompose(A).partial_isometry
    B = modulus_bridge(model)
    assert op_norm(B[2:, 2:] - adjoint(V) @ model.ran_basis) <= 1e-12
    assert np.allclose(V, [[0, 1], [1, 0]])


def test_norm_equivalence_needs_eps_at_most_one():
    model = build_energy_model(np.diag([2.0, 3.0]))
    f = np.array([1.0, 0.0])
    lower, mid, upper = norm_equivalence_bounds(model, f)
    assert lower <= mid <= upper
    # eps = sigma_min^2 = 4 without the cap would give 4/5 * 3 = 2.4 > ||f||_A = 2
    assert 4 / 5 * (2 + 1) > mid


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 4))
def test_norm_equivalence_bounds(seed, n, extra):
    rng = np.random.default_rng(seed)
    model = build_energy_model(conditioned(rng, n + extra, n) * rng.uniform(0.1, 10))
    lower, mid, upper = norm_equivalence_bounds(model, crandn(rng, n))
    assert lower <= mid * (1 + 1e-12) and mid <= upper * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 4))
def test_equivalences_on_random_models(seed, n, extra):
    rng = np.random.default_rng(seed)
    A = conditioned(rng, n + extra, n)
    model = build_energy_model(A)
    R = crandn(rng, n, n)
    scale = 1 + op_norm(A) + op_norm(R)
    assert verify_equivalence_undamped(model) <= 1e-9 * scale
    r_abs, r_proj = verify_equivalence_damped(model, R)
    assert r_abs <= 1e-9 * scale and r_proj <= 1e-9 * scale
    assert damping_block_residual(model, R) <= 1e-10 * scale
    assert verify_modulus_bridge(model) <= 1e-9
    assert bridge_conjugation_residual(model) <= 1e-9 * scale


def test_dirichlet_gram_is_laplacian():
    N = 10
    model = dirichlet_derivative_model(N)
    h = 1.0 / (N + 1)
    L = (2 * np.eye(N) - np.eye(N, k=1) - np.eye(N, k=-1)) / h**2
    assert np.allclose(model.gram_A, L)


@pytest.mark.parametrize("N", [10, 50])
def test_dirichlet_spectrum_oracle(N):
    model = dirichlet_derivative_model(N)
    h = 1.0 / (N + 1)
    w = hermitian_eig(model.gram_A).eigenvalues
    ref = dirichlet_eigenvalues(N)
    assert np.max(np.abs(w - ref) / ref) <= 1e-9
    smin = math.sqrt(w[0])
    assert math.pi * (1 - h**2) <= smin <= math.pi
    # largest eigenvalue of |A|^{-1} approaches 1/pi at rate h^2
    assert abs(1 / smin - 1 / math.pi) <= h**2


def test_undamped_propagator_matches_generator(rng):
    model = build_energy_model(conditioned(rng, 4, 3))
    u0, u1 = crandn(rng, 3), crandn(rng, 3)
    P = undamped_propagator(model, 0.7)
    u, v = solve_acp(model, None, u0, u1, 0.7)
    x = P @ np.concatenate([u0, u1])
    assert np.allclose(x, np.concatenate([u, v]), atol=1e-10)
