"""Multiplication-operator model of damped waves.

``|A|`` acts as multiplication by nodes ``lam_k`` carrying weights ``w_k``,
and the damping is ``R = 2 F(|A|)``.  Every node evolves independently under
``u'' + 2 F u' + lam^2 u = 0``, so semigroups, norms and energies reduce to
closed-form 2x2 computations per node.  Reductions over nodes (sums, max)
are taken in ascending node order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, VerificationError
from .linalg_core import matrix_exp

TAYLOR_THRESHOLD = 1e-3


@dataclass(frozen=True)
class SpectralModel:
    """Discrete spectral measure ``sum_k w_k delta_{lam_k}``.

    Nodes are sorted on construction.  A zero node is rejected unless
    ``allow_zero`` is set, which is reserved for kernel experiments.
    """

    nodes: np.ndarray
    weights: np.ndarray
    allow_zero: bool = False

    def __post_init__(self):
        lam = np.asarray(self.nodes, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if lam.size == 0 or lam.shape != w.shape:
            raise DomainError("nodes and weights must be non-empty and of equal length")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(w))):
            raise DomainError("nodes and weights must be finite")
        if np.any(lam < 0):
            raise DomainError("nodes must be nonnegative")
        if np.any(w <= 0):
            raise DomainError("weights must be positive")
        if np.any(lam == 0) and not self.allow_zero:
            raise DomainError("zero node requires allow_zero=True")
        order = np.argsort(lam, kind="stable")
        object.__setattr__(self, "nodes", lam[order])
        object.__setattr__(self, "weights", w[order])

    @property
    def count(self) -> int:
        return self.nodes.size

    @classmethod
    def uniform(cls, nodes, allow_zero: bool = False) -> "SpectralModel":
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, np.ones_like(nodes), allow_zero)


@dataclass(frozen=True)
class DampingProfile:
    """``F(lam) >= 0``; the damping operator is ``R = 2 F(|A|)``."""

    F: Callable[[np.ndarray], np.ndarray]
    c: float | None = None
    alpha: float | None = None

    @classmethod
    def power(cls, c: float, alpha: float) -> "DampingProfile":
        """``F(lam) = (c/2) lam^alpha``."""
        if c < 0:
            raise DomainError("damping coefficient c must be nonnegative")

        def F(lam):
            with np.errstate(divide="ignore"):
                return 0.5 * c * np.power(np.asarray(lam, dtype=float), alpha)

        return cls(F, c, alpha)

    @classmethod
    def none(cls) -> "DampingProfile":
        return cls.power(0.0, 0.0)

    def at(self, m: SpectralModel) -> np.ndarray:
        F = np.broadcast_to(np.asarray(self.F(m.nodes), dtype=float), m.nodes.shape).copy()
        if not np.all(np.isfinite(F)) or np.any(F < 0):
            raise DomainError("damping profile must be finite and nonnegative at every node")
        return F


@dataclass(frozen=True)
class WaveState:
    u: np.ndarray
    v: np.ndarray = field(default=None)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex).reshape(-1)
        v = np.zeros_like(u) if self.v is None else np.asarray(self.v, dtype=complex).reshape(-1)
        if u.shape != v.shape:
            raise DomainError("u and v must have equal length")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise DomainError("state must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


def _check_state(m: SpectralModel, state: WaveState) -> None:
    if state.u.size != m.count:
        raise DomainError(f"state has {state.u.size} entries, model has {m.count} nodes")


# ---------------------------------------------------------------- kernels


def _taylor_cs(mu, t):
    x = mu * t * t
    c = 1 - x / 2 + x * x / 24 - x**3 / 720 + x**4 / 40320
    s = t * (1 - x / 6 + x * x / 120 - x**3 / 5040 + x**4 / 362880)
    return c, s


def gamma_kernels(lam, F, t):
    """``(c, s)`` with ``mu = lam^2 - F^2``.

    ``c = cos(sqrt(mu) t)`` and ``s = sin(sqrt(mu) t)/sqrt(mu)`` for
    ``mu > 0``, the cosh/sinh analogues for ``mu < 0`` and ``(1, t)`` at
    ``mu = 0``.  Points with ``|mu| t^2`` below ``TAYLOR_THRESHOLD`` use a
    Taylor expansion in ``mu``.  Broadcasts over array inputs.
    """
    lam, F, t = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (lam, F, t)))
    mu = lam * lam - F * F
    c = np.empty(mu.shape)
    s = np.empty(mu.shape)
    near = np.abs(mu) * t * t < TAYLOR_THRESHOLD
    pos = (mu > 0) & ~near
    neg = (mu < 0) & ~near
    c[near], s[near] = _taylor_cs(mu[near], t[near])
    g = np.sqrt(mu[pos])
    c[pos], s[pos] = np.cos(g * t[pos]), np.sin(g * t[pos]) / g
    g = np.sqrt(-mu[neg])
    c[neg], s[neg] = np.cosh(g * t[neg]), np.sinh(g * t[neg]) / g
    if c.ndim == 0:
        return float(c), float(s)
    return c, s


def damped_kernels(lam, F, t: float):
    """``(e^{-Ft} c, e^{-Ft} s, e^{-Ft} (c + F s), e^{-Ft} (c - F s))`` per node.

    Overdamped nodes combine exponents, ``e^{-Ft} cosh(gt)`` etc., so that
    large ``F t`` neither overflows nor cancels.
    """
    lam = np.asarray(lam, dtype=float)
    F = np.broadcast_to(np.asarray(F, dtype=float), lam.shape)
    mu = lam * lam - F * F
    ec = np.empty(lam.shape)
    es = np.empty(lam.shape)
    ecp = np.empty(lam.shape)
    ecm = np.empty(lam.shape)
    near = np.abs(mu) * t * t < TAYLOR_THRESHOLD
    over = (mu < 0) & ~near
    rest = ~over
    c, s = gamma_kernels(lam[rest], F[rest], t)
    decay = np.exp(-F[rest] * t)
    ec[rest], es[rest] = decay * c, decay * s
    ecp[rest] = ec[rest] + F[rest] * es[rest]
    ecm[rest] = ec[rest] - F[rest] * es[rest]
    if np.any(over):
        Fo, lo = F[over], lam[over]
        g = np.sqrt(-mu[over])
        a = lo * lo / (Fo + g)  # F - g without cancellation
        b = Fo + g
        ea, eb = np.exp(-a * t), np.exp(-b * t)
        ec[over] = 0.5 * (ea + eb)
        es[over] = ea * (-np.expm1(-2.0 * g * t)) / (2.0 * g)
        ecp[over] = (b * ea - a * eb) / (2.0 * g)
        ecm[over] = (b * eb - a * ea) / (2.0 * g)
    return ec, es, ecp, ecm


def energy_node_matrices(m: SpectralModel, d: DampingProfile, t: float) -> np.ndarray:
    """Per-node ``e^{-Ft} [[c + F s, s], [-lam^2 s, c - F s]]``, shape ``(K, 2, 2)``."""
    if t < 0:
        raise DomainError("semigroup only forward in time")
    lam = m.nodes
    ec, es, ecp, ecm = damped_kernels(lam, d.at(m), t)
    out = np.empty((m.count, 2, 2))
    out[:, 0, 0], out[:, 0, 1] = ecp, es
    out[:, 1, 0], out[:, 1, 1] = -lam * lam * es, ecm
    return out


def energy_node_generator(lam: float, F: float) -> np.ndarray:
    return np.array([[0.0, 1.0], [-lam * lam, -2.0 * F]])


def dirac_node_generator(lam: float, F: float) -> np.ndarray:
    """``-i [[-2iF, lam], [lam, 0]]``."""
    return -1j * np.array([[-2j * F, lam], [lam, 0.0]])


def semigroup_commuting(m: SpectralModel, d: DampingProfile, t: float, state: WaveState) -> WaveState:
    """Apply the energy-space semigroup at time ``t`` to ``(u, u')``."""
    _check_state(m, state)
    N = energy_node_matrices(m, d, t)
    u = N[:, 0, 0] * state.u + N[:, 0, 1] * state.v
    v = N[:, 1, 0] * state.u + N[:, 1, 1] * state.v
    return WaveState(u, v)


def dirac_semigroup_commuting(m: SpectralModel, d: DampingProfile, t: float) -> np.ndarray:
    """Per-node ``e^{-Ft} [[c - F s, -i lam s], [-i lam s, c + F s]]``, shape ``(K, 2, 2)``."""
    if t < 0:
        raise DomainError("semigroup only forward in time")
    lam = m.nodes
    _, es, ecp, ecm = damped_kernels(lam, d.at(m), t)
    out = np.empty((m.count, 2, 2), dtype=complex)
    out[:, 0, 0], out[:, 1, 1] = ecm, ecp
    out[:, 0, 1] = out[:, 1, 0] = -1j * lam * es
    return out


def nodewise_expm_residual(m: SpectralModel, d: DampingProfile, t: float) -> tuple[float, float]:
    """Largest hybrid residuals of both closed forms against ``matrix_exp``."""
    F = d.at(m)
    E = energy_node_matrices(m, d, t)
    D = dirac_semigroup_commuting(m, d, t)
    r_energy = r_dirac = 0.0
    for k, lam in enumerate(m.nodes):
        ref = matrix_exp(energy_node_generator(lam, F[k]), t)
        r_energy = max(r_energy, np.abs(E[k] - ref).max() / (1 + np.abs(ref).max()))
        ref = matrix_exp(dirac_node_generator(lam, F[k]), t)
        r_dirac = max(r_dirac, np.abs(D[k] - ref).max() / (1 + np.abs(ref).max()))
    return float(r_energy), float(r_dirac)


# ---------------------------------------------------------------- norms and growth


def node_singular_values(m: SpectralModel, d: DampingProfile, t: float) -> np.ndarray:
    """Closed-form singular values ``e^{-Ft} (sqrt(1 + F^2 s^2) -/+ F |s|)``, shape ``(K, 2)``.

    The node matrix has unit determinant up to ``e^{-2Ft}``, so the smaller
    value is computed as ``e^{-2Ft} / s_2``.
    """
    F = d.at(m)
    _, es, _, _ = damped_kernels(m.nodes, F, t)
    e2 = np.exp(-2.0 * F * t)
    s2 = np.sqrt(e2 + (F * es) ** 2) + F * np.abs(es)
    s1 = np.divide(e2, s2, out=np.zeros_like(s2), where=s2 > 0)
    return np.stack([s1, s2], axis=1)


def node_singular_values_svd(m: SpectralModel, d: DampingProfile, t: float) -> np.ndarray:
    return np.linalg.svd(dirac_semigroup_commuting(m, d, t), compute_uv=False)[:, ::-1]


def semigroup_norm(m: SpectralModel, d: DampingProfile, t: float, tol: float = 1e-8) -> float:
    """``||exp(-iQt)||`` as the largest node singular value (closed form, checked by SVD)."""
    closed = node_singular_values(m, d, t)
    direct = node_singular_values_svd(m, d, t)
    if np.any(np.abs(closed - direct) > tol * (1.0 + np.abs(direct))):
        raise VerificationError("closed-form singular values disagree with SVD")
    return float(np.max(closed[:, 1]))


def node_rates(m: SpectralModel, d: DampingProfile) -> np.ndarray:
    """``F - sqrt((F^2 - lam^2)_+)`` per node."""
    F = d.at(m)
    lam = m.nodes
    over = F > lam
    g = np.sqrt(np.maximum(F * F - lam * lam, 0.0))
    return np.where(over, lam * lam / np.where(over, F + g, 1.0), F)


def growth_bound(m: SpectralModel, d: DampingProfile) -> float:
    """Exponential decay rate ``omega = min_k (F_k - sqrt((F_k^2 - lam_k^2)_+))``."""
    return float(np.min(node_rates(m, d)))


def critical_nodes(m: SpectralModel, d: DampingProfile, rtol: float = 1e-12) -> np.ndarray:
    F = d.at(m)
    return np.abs(F - m.nodes) <= rtol * np.maximum(m.nodes, 1.0)


def _upper_hull(x: np.ndarray, y: np.ndarray) -> list[int]:
    hull: list[int] = []
    for i in range(x.size):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def measured_decay_rate(
    m: SpectralModel, d: DampingProfile, t0: float = 5.0, t1: float = 50.0, samples: int = 4001
) -> float:
    """Decay rate of ``semigroup_norm`` on ``[t0, t1]``.

    Oscillating nodes make ``log ||.||`` a line plus a bounded periodic
    ripple.  The ripple maxima are collinear, so they merge into a single
    long edge of the upper concave hull of the samples; the slope of the
    longest hull edge is the rate.  For a non-oscillating norm the hull is
    the chord between the endpoints.
    """
    t = np.linspace(t0, t1, samples)
    y = np.log([semigroup_norm(m, d, float(x)) for x in t])
    hull = np.asarray(_upper_hull(t, y))
    k = int(np.argmax(np.diff(t[hull])))
    i, j = hull[k], hull[k + 1]
    return float(-(y[j] - y[i]) / (t[j] - t[i]))


def critical_envelope(
    m: SpectralModel, d: DampingProfile, t0: float = 5.0, t1: float = 50.0, samples: int = 2001
) -> dict:
    """Fit ``C`` in ``||exp(-iQt)|| <= C t e^{-omega t}`` on the first fifth of ``[t0, t1]``.

    Returns the fitted ``C``, the worst ratio ``||.|| / (C t e^{-omega t})`` over
    the full window, and the growth of ``||.|| e^{omega t}`` across the window
    (which exceeds one when the linear factor is needed).
    """
    omega = growth_bound(m, d)
    t = np.linspace(t0, t1, samples)
    scaled = np.array([semigroup_norm(m, d, float(x)) for x in t]) * np.exp(omega * t)
    fit = t <= t0 + 0.2 * (t1 - t0)
    C = float(np.max(scaled[fit] / t[fit]))
    return {
        "omega": omega,
        "C": C,
        "max_ratio": float(np.max(scaled / (C * t))),
        "exp_growth": float(scaled[-1] / scaled[0]),
    }


# ---------------------------------------------------------------- trajectories and energies


def solve_acp2(m: SpectralModel, d: DampingProfile, u0, u1, t: float) -> WaveState:
    """Solution of ``u'' + 2F u' + lam^2 u = 0`` with ``u(0) = u0``, ``u'(0) = u1``."""
    return semigroup_commuting(m, d, t, WaveState(u0, u1))


def conserved_family(
    m: SpectralModel, d: DampingProfile, B: Callable, state: WaveState
) -> tuple[float, float]:
    """``E_B = sum w (|B v|^2 + lam^2 |B u|^2)`` and its time derivative.

    The derivative is ``-2 sum w Re(conj(B v) B 2F v)``.
    """
    _check_state(m, state)
    Bk = np.broadcast_to(np.asarray(B(m.nodes), dtype=complex), m.nodes.shape)
    if not np.all(np.isfinite(Bk)):
        raise DomainError("B must be finite at every node")
    w, lam, F = m.weights, m.nodes, d.at(m)
    Bv, Bu = Bk * state.v, Bk * state.u
    E = np.sum(w * (np.abs(Bv) ** 2 + lam * lam * np.abs(Bu) ** 2))
    dE = -2.0 * np.sum(w * np.real(np.conj(Bv) * Bk * 2.0 * F * state.v))
    return float(E), float(dE)


def plate_stiffness(m: SpectralModel, B: Callable, C: Callable, alpha: float) -> np.ndarray:
    """``|B|^4 + |C|^2 |B|^{2 alpha}`` per node."""
    b = np.abs(np.broadcast_to(np.asarray(B(m.nodes), dtype=complex), m.nodes.shape))
    c = np.abs(np.broadcast_to(np.asarray(C(m.nodes), dtype=complex), m.nodes.shape))
    return b**4 + c * c * b ** (2 * alpha)


def plate_energy(
    m: SpectralModel, d: DampingProfile, B: Callable, C: Callable, alpha: float, state: WaveState
) -> tuple[float, float]:
    """Energy and dissipation of ``u'' + R u' + [|B|^4 + |C|^2 |B|^{2 alpha}] u = 0``.

    ``E = sum w (|B|^{2a} |v|^2 + |B|^{2a+4} |u|^2 + |C|^2 |B|^{4a} |u|^2)`` and
    ``dE/dt = -2 sum w |B|^{2a} 2F |v|^2``.
    """
    _check_state(m, state)
    b = np.abs(np.broadcast_to(np.asarray(B(m.nodes), dtype=complex), m.nodes.shape))
    c = np.abs(np.broadcast_to(np.asarray(C(m.nodes), dtype=complex), m.nodes.shape))
    w, F = m.weights, d.at(m)
    u2, v2 = np.abs(state.u) ** 2, np.abs(state.v) ** 2
    b2a = b ** (2 * alpha)
    E = np.sum(w * (b2a * v2 + b ** (2 * alpha + 4) * u2 + c * c * b ** (4 * alpha) * u2))
    dE = -2.0 * np.sum(w * b2a * 2.0 * F * v2)
    return float(E), float(dE)


def plate_model(m: SpectralModel, B: Callable, C: Callable, alpha: float) -> SpectralModel:
    """Spectral model whose nodes are ``sqrt`` of the plate stiffness, for time stepping."""
    return SpectralModel(np.sqrt(plate_stiffness(m, B, C, alpha)), m.weights, allow_zero=True)


def plate_evolve(
    m: SpectralModel, d: DampingProfile, B: Callable, C: Callable, alpha: float, t: float, state: WaveState
) -> WaveState:
    """Solution at time ``t`` of the plate equation with damping ``2 F`` read at the base nodes.

    The stiffness is indexed by the base nodes of ``m``, so the damping must
    be too; evolving on :func:`plate_model` with the same profile would
    evaluate ``F`` at the plate frequencies instead.
    """
    if t < 0:
        raise DomainError("semigroup only forward in time")
    _check_state(m, state)
    lam = np.sqrt(plate_stiffness(m, B, C, alpha))
    _, es, ecp, ecm = damped_kernels(lam, d.at(m), t)
    return WaveState(ecp * state.u + es * state.v, -lam * lam * es * state.u + ecm * state.v)


# ---------------------------------------------------------------- equipartition


def _vec(x, m: SpectralModel) -> np.ndarray:
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.size != m.count:
        raise DomainError("vector length does not match the number of nodes")
    return x


def equipartition_identity(m: SpectralModel, psi1, psi2, t: float) -> tuple[float, float]:
    """``||psi_1(t)||^2`` under the undamped Dirac group, and its closed form.

    The closed form is
    ``1/2 ||Psi||^2 + 1/2 Re <psi1 + psi2, e^{2i lam t} (psi1 - psi2)>``.
    """
    p1, p2 = _vec(psi1, m), _vec(psi2, m)
    w, lam = m.weights, m.nodes
    N = dirac_semigroup_commuting(m, DampingProfile.none(), abs(t))
    if t < 0:
        # real symmetric node generators: exp(iQ|t|) = conj(exp(-iQ|t|))
        N = np.conj(N)
    first = N[:, 0, 0] * p1 + N[:, 0, 1] * p2
    lhs = float(np.sum(w * np.abs(first) ** 2))
    total = float(np.sum(w * (np.abs(p1) ** 2 + np.abs(p2) ** 2)))
    cross = np.sum(w * np.conj(p1 + p2) * np.exp(2j * lam * t) * (p1 - p2))
    return lhs, 0.5 * total + 0.5 * float(np.real(cross))


def equipartition_rhs_swapped(m: SpectralModel, psi1, psi2, t: float) -> float:
    """The variant with ``psi1 - psi2`` and ``psi1 + psi2`` exchanged.

    Agrees with :func:`equipartition_identity` for real states only; kept to
    document the discrepancy.
    """
    p1, p2 = _vec(psi1, m), _vec(psi2, m)
    w, lam = m.weights, m.nodes
    total = float(np.sum(w * (np.abs(p1) ** 2 + np.abs(p2) ** 2)))
    cross = np.sum(w * np.conj(p1 - p2) * np.exp(2j * lam * t) * (p1 + p2))
    return 0.5 * total + 0.5 * float(np.real(cross))


def equipartition_identity_dense(A, psi1, psi2, t: float) -> tuple[float, float]:
    """Dense version for square invertible ``A`` with ``V_A`` from the polar decomposition."""
    from .linalg_core import adjoint, func_calc, polar_decompose
    from .susy_dirac import build_supercharge

    A = np.asarray(A, dtype=complex)
    sys = build_supercharge(A)
    n = A.shape[1]
    p1 = np.asarray(psi1, dtype=complex)
    p2 = np.asarray(psi2, dtype=complex)
    psi_t = matrix_exp(-1j * sys.Q, t) @ np.concatenate([p1, p2])
    lhs = float(np.linalg.norm(psi_t[:n]) ** 2)
    pol = polar_decompose(A)
    phi = adjoint(pol.partial_isometry) @ p2
    rot = func_calc(pol.modulus, lambda x: np.exp(2j * x * t))
    total = float(np.linalg.norm(p1) ** 2 + np.linalg.norm(p2) ** 2)
    cross = np.vdot(p1 + phi, rot @ (p1 - phi))
    return lhs, 0.5 * total + 0.5 * float(np.real(cross))


@dataclass(frozen=True)
class CesaroResult:
    mean_K: float
    mean_P: float
    target: float
    C: float
    kernel_defect: float
    kernel_energy: float


def kinetic_potential(m: SpectralModel, state: WaveState, t) -> tuple[np.ndarray, np.ndarray]:
    """``K(t) = ||u'(t)||^2`` and ``P(t) = ||lam u(t)||^2`` for the undamped flow."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    K = np.empty(t.shape)
    P = np.empty(t.shape)
    undamped = DampingProfile.none()
    for i, ti in enumerate(t):
        s = semigroup_commuting(m, undamped, float(ti), state)
        K[i] = np.sum(m.weights * np.abs(s.v) ** 2)
        P[i] = np.sum(m.weights * (m.nodes * np.abs(s.u)) ** 2)
    return K, P


def cesaro_equipartition(m: SpectralModel, state: WaveState, T: float) -> CesaroResult:
    """Time averages of kinetic and potential energy over ``[0, T]`` in closed form.

    Per node ``lam > 0``, with ``a = |u1|^2 - lam^2 |u0|^2`` and
    ``b = lam Re(conj(u0) u1)``::

        mean_K = E/2 + a sin(2 lam T)/(4 lam T) - b (1 - cos(2 lam T))/(2 lam T)

    and ``mean_P = E - mean_K``.  A zero node keeps ``K = |u1|^2`` and
    ``P = 0``.  ``C`` bounds ``T |mean - target|`` over the positive nodes;
    ``kernel_defect`` is the limit of ``mean_K - mean_P``.
    """
    if not T > 0:
        raise DomainError("averaging horizon T must be positive")
    _check_state(m, state)
    w, lam = m.weights, m.nodes
    u0, u1 = state.u, state.v
    zero = lam == 0
    pos = ~zero
    lp = lam[pos]
    a = np.abs(u1[pos]) ** 2 - lp * lp * np.abs(u0[pos]) ** 2
    b = lp * np.real(np.conj(u0[pos]) * u1[pos])
    e_pos = np.abs(u1[pos]) ** 2 + lp * lp * np.abs(u0[pos]) ** 2
    x = 2.0 * lp * T
    osc_K = a * np.sin(x) / (2.0 * x) - b * 2.0 * np.sin(0.5 * x) ** 2 / x
    mean_K_pos = 0.5 * e_pos + osc_K
    mean_P_pos = 0.5 * e_pos - osc_K
    k0 = np.abs(u1[zero]) ** 2
    mean_K = float(np.sum(w[pos] * mean_K_pos) + np.sum(w[zero] * k0))
    mean_P = float(np.sum(w[pos] * mean_P_pos))
    total = float(np.sum(w[pos] * e_pos) + np.sum(w[zero] * k0))
    C = float(np.sum(w[pos] * (np.abs(a) / (4.0 * lp) + np.abs(b) / lp)))
    kernel_energy = float(np.sum(w[zero] * k0))
    # limits of the averages: positive nodes split evenly, zero nodes stay kinetic
    lim_K = float(np.sum(w[pos] * 0.5 * e_pos) + np.sum(w[zero] * k0))
    lim_P = float(np.sum(w[pos] * 0.5 * e_pos))
    return CesaroResult(mean_K, mean_P, 0.5 * total, C, lim_K - lim_P, kernel_energy)


def cesaro_defect_envelope(
    m: SpectralModel, state: WaveState, T: float, samples: int = 512, window: float | None = None
) -> float:
    """``max |mean_K(T') - target|`` over ``T'`` in ``[T, T + window]``.

    ``window`` defaults to ``pi / lam_min``.  When every node is an integer
    multiple of ``lam_min`` the defect times ``T'`` is periodic with that
    period, so the window sees its full range and the envelope scales
    like ``1/T``; for incommensurate nodes it only bounds the range from below.
    """
    lam_min = float(np.min(m.nodes[m.nodes > 0]))
    width = np.pi / lam_min if window is None else float(window)
    grid = np.linspace(T, T + width, samples)
    return max(abs(cesaro_equipartition(m, state, float(x)).mean_K - 0.5 * _total(m, state)) for x in grid)


def _total(m: SpectralModel, state: WaveState) -> float:
    return float(np.sum(m.weights * (np.abs(state.v) ** 2 + (m.nodes * np.abs(state.u)) ** 2)))


def cesaro_dirac(m: SpectralModel, psi1, psi2, T: float) -> tuple[float, float]:
    """``(1/T) int_0^T ||psi_1(s)||^2 ds`` in closed form, and ``||Psi||^2 / 2``."""
    if not T > 0:
        raise DomainError("averaging horizon T must be positive")
    p1, p2 = _vec(psi1, m), _vec(psi2, m)
    w, lam = m.weights, m.nodes
    total = float(np.sum(w * (np.abs(p1) ** 2 + np.abs(p2) ** 2)))
    x = np.where(lam > 0, 2.0 * lam * T, 1.0)
    avg = np.where(lam > 0, np.expm1(1j * x) / (1j * x), 1.0)
    cross = np.sum(w * np.conj(p1 + p2) * avg * (p1 - p2))
    return 0.5 * total + 0.5 * float(np.real(cross)), 0.5 * total
