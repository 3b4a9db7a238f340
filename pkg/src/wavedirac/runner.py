"""Scenario files, task execution and report/CSV emission.

A scenario is a JSON object::

    {
      "name": "demo",
      "model": {"type": "dense", "A": [[1, 0], [0, 2]], "R": {"power": {"c": 1, "alpha": 1}}}
             | {"type": "dirichlet", "N": 50, "R": ...}
             | {"type": "spectral", "nodes": [...], "weights": [...],
                "damping": {"power": {"c": 1, "alpha": 1}}, "allow_zero": false},
      "tasks": ["verify-undamped", ...],
      "horizon": 20.0,
      "samples": 200,
      "tolerances": {"equivalence": 1e-9},
      "seed": 0
    }

Dense matrices may be given inline (numbers, ``[re, im]`` pairs or strings
such as ``"1-2j"``) or through ``"A_file"`` (``.npy`` or JSON), resolved
relative to the scenario file.  ``"R"`` may be omitted, ``null``, a matrix,
or ``{"power": {"c": c, "alpha": a}}`` meaning ``c |A|^a``.

Random fixtures are drawn from ``numpy.random.default_rng(seed)`` (PCG64).
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import damped_generator as dg
from . import energy_space as es
from . import spectral_dynamics as sdyn
from . import susy_dirac as susy
from .errors import WaveDiracError
from .linalg_core import adjoint, func_calc, matrix_exp, op_norm

TASKS = (
    "verify-undamped",
    "verify-damped",
    "pencil",
    "susy",
    "dynamics",
    "equipartition",
    "growth",
)

TASK_HELP = {
    "verify-undamped": "conjugated undamped generator vs projected Dirac operator",
    "verify-damped": "damped equivalences, damping block and modulus bridge",
    "pencil": "companion spectrum vs Dirac spectrum; block resolvents vs direct inverse",
    "susy": "intertwining, isospectrality, resolvent, diagonalisation, sign symmetry",
    "dynamics": "semigroup norm over the horizon with contraction check (CSV + PNG)",
    "equipartition": "exact equipartition identity and Cesaro means (CSV + PNG)",
    "growth": "growth bound vs measured decay rate of the semigroup norm",
}

DEFAULT_TOLERANCES = {
    "equivalence": 1e-9,
    "spectrum": 1e-8,
    "growth": 0.02,
    "resolvent": 1e-9,
    "susy": 1e-10,
    "contraction": 1e-9,
    "equipartition": 1e-10,
}

DENSE_LIMIT = 512
OUT_ENV = "WAVEDIRAC_OUT"


class ScenarioError(WaveDiracError, ValueError):
    """Malformed scenario (exit code 2)."""


class ModelError(WaveDiracError, ValueError):
    """Model could not be constructed (exit code 3)."""


# ---------------------------------------------------------------- scenario parsing


def _complex_entry(x) -> complex:
    if isinstance(x, bool):
        raise ScenarioError("booleans are not matrix entries")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", ""))
        except ValueError as exc:
            raise ScenarioError(f"cannot parse complex entry {x!r}") from exc
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ScenarioError(f"cannot parse matrix entry {x!r}")


def _matrix(value, name: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ScenarioError(f"{name} must be a non-empty list of rows")
    width = len(value[0])
    if width == 0 or any(len(r) != width for r in value):
        raise ScenarioError(f"{name} must be a rectangular matrix")
    return np.array([[_complex_entry(x) for x in r] for r in value], dtype=complex)


@dataclass
class Scenario:
    name: str
    model: dict
    tasks: list[str]
    horizon: float = 10.0
    samples: int = 200
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    base_dir: Path = field(default_factory=Path.cwd)

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))


def parse_scenario(text: str, base_dir: Path | None = None, name: str = "scenario") -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    known = {"name", "model", "tasks", "horizon", "samples", "tolerances", "seed"}
    extra = set(raw) - known
    if extra:
        raise ScenarioError(f"unknown scenario keys: {sorted(extra)}")
    model = raw.get("model")
    if not isinstance(model, dict) or model.get("type") not in ("dense", "dirichlet", "spectral"):
        raise ScenarioError("model must be an object with type dense, dirichlet or spectral")
    tasks = raw.get("tasks")
    if not isinstance(tasks, list) or not tasks:
        raise ScenarioError("tasks must be a non-empty list")
    for t in tasks:
        if t not in TASKS:
            raise ScenarioError(f"unknown task {t!r}; known tasks: {', '.join(TASKS)}")
    horizon = raw.get("horizon", 10.0)
    samples = raw.get("samples", 200)
    seed = raw.get("seed", 0)
    if not isinstance(horizon, (int, float)) or isinstance(horizon, bool) or not horizon > 0:
        raise ScenarioError("horizon must be a positive number")
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 2:
        raise ScenarioError("samples must be an integer >= 2")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ScenarioError("seed must be a nonnegative integer")
    tolerances = raw.get("tolerances", {}) or {}
    if not isinstance(tolerances, dict):
        raise ScenarioError("tolerances must be an object")
    for k, v in tolerances.items():
        _check_tolerance(k, v)
    return Scenario(
        name=str(raw.get("name", name)),
        model=model,
        tasks=list(tasks),
        horizon=float(horizon),
        samples=samples,
        tolerances={k: float(v) for k, v in tolerances.items()},
        seed=seed,
        base_dir=base_dir or Path.cwd(),
    )


def _check_tolerance(key, value) -> None:
    if key not in DEFAULT_TOLERANCES:
        raise ScenarioError(f"unknown tolerance {key!r}; known: {', '.join(DEFAULT_TOLERANCES)}")
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ScenarioError(f"tolerance {key} must be a positive number")


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    return parse_scenario(text, base_dir=path.parent, name=path.stem)


def parse_tolerance_override(item: str) -> tuple[str, float]:
    if "=" not in item:
        raise ScenarioError(f"--tol expects NAME=VALUE, got {item!r}")
    key, value = item.split("=", 1)
    try:
        val = float(value)
    except ValueError as exc:
        raise ScenarioError(f"--tol value for {key} is not a number") from exc
    _check_tolerance(key, val)
    return key, val


# ---------------------------------------------------------------- model construction


@dataclass
class ModelContext:
    kind: str
    A: np.ndarray | None = None
    R: np.ndarray | None = None
    spectral: sdyn.SpectralModel | None = None
    damping: sdyn.DampingProfile | None = None
    energy: es.EnergyModel | None = None

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, R)`` as dense matrices; spectral models become diagonal."""
        if self.A is not None:
            n = self.A.shape[1]
            return self.A, self.R if self.R is not None else np.zeros((n, n), dtype=complex)
        if self.spectral.count > DENSE_LIMIT:
            raise ModelError(f"spectral model with {self.spectral.count} nodes is too large for dense tasks")
        lam = self.spectral.nodes
        F = self.damping.at(self.spectral)
        return np.diag(lam).astype(complex), np.diag(2.0 * F).astype(complex)

    def energy_model(self) -> es.EnergyModel:
        if self.energy is None:
            self.energy = es.build_energy_model(self.dense()[0])
        return self.energy


def _power_damping(spec) -> tuple[float, float]:
    if not isinstance(spec, dict) or set(spec) != {"power"} or not isinstance(spec["power"], dict):
        raise ScenarioError("damping must be {\"power\": {\"c\": ..., \"alpha\": ...}}")
    p = spec["power"]
    try:
        return float(p["c"]), float(p.get("alpha", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError("power damping needs numeric c and alpha") from exc


def _load_matrix_file(path: Path) -> np.ndarray:
    if path.suffix == ".npy":
        return np.load(path).astype(complex)
    data = json.loads(path.read_text())
    if isinstance(data, dict):
        data = data.get("A")
    return _matrix(data, str(path))


def build_model(sc: Scenario) -> ModelContext:
    spec = sc.model
    kind = spec["type"]
    try:
        if kind == "spectral":
            nodes, weights = spec.get("nodes"), spec.get("weights")
            if not isinstance(nodes, list) or not nodes:
                raise ScenarioError("spectral model needs a non-empty nodes list")
            if weights is None:
                weights = [1.0] * len(nodes)
            if not isinstance(weights, list):
                raise ScenarioError("weights must be a list")
            damping = spec.get("damping")
            c, a = _power_damping(damping) if damping is not None else (0.0, 0.0)
            m = sdyn.SpectralModel(
                np.asarray(nodes, dtype=float), np.asarray(weights, dtype=float),
                allow_zero=bool(spec.get("allow_zero", False)),
            )
            d = sdyn.DampingProfile.power(c, a)
            d.at(m)
            return ModelContext("spectral", spectral=m, damping=d)
        if kind == "dirichlet":
            N = spec.get("N")
            if not isinstance(N, int) or isinstance(N, bool):
                raise ScenarioError("dirichlet model needs an integer N")
            energy = es.dirichlet_derivative_model(N)
            A = energy.A
        else:
            if "A" in spec:
                A = _matrix(spec["A"], "A")
            elif "A_file" in spec:
                try:
                    A = _load_matrix_file(sc.base_dir / spec["A_file"])
                except (OSError, ValueError) as exc:
                    raise ScenarioError(f"cannot load A_file: {exc}") from exc
            else:
                raise ScenarioError("dense model needs A or A_file")
            energy = None
        R = _dense_damping(spec.get("R"), A)
        return ModelContext(kind, A=A, R=R, energy=energy)
    except ScenarioError:
        raise
    except (WaveDiracError, ValueError, np.linalg.LinAlgError) as exc:
        raise ModelError(str(exc)) from exc


def _dense_damping(spec, A: np.ndarray) -> np.ndarray | None:
    n = A.shape[1]
    if spec is None:
        return None
    if isinstance(spec, dict):
        c, a = _power_damping(spec)
        G = adjoint(A) @ A
        return func_calc(G, lambda x: c * np.power(np.maximum(x, 0.0), 0.5 * a))
    R = _matrix(spec, "R")
    if R.shape != (n, n):
        raise ModelError(f"dimension mismatch: R has shape {R.shape}, expected {(n, n)}")
    return R


# ---------------------------------------------------------------- report types


@dataclass
class TaskResult:
    name: str
    residuals: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    error: str | None = None
    wall_time: float = 0.0

    def check(self, key: str, value: float, tol: float) -> None:
        value = float(value)
        self.residuals[key] = {"value": _num(value), "tolerance": tol, "pass": bool(value <= tol)}

    @property
    def passed(self) -> bool:
        return self.error is None and all(r["pass"] for r in self.residuals.values())

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "status": "pass" if self.passed else "fail",
            "residuals": self.residuals,
            "metrics": {k: _num(v) for k, v in self.metrics.items()},
            "artifacts": self.artifacts,
            "wall_time": self.wall_time,
        }
        if self.error is not None:
            out["error"] = self.error
        failing = [k for k, r in self.residuals.items() if not r["pass"]]
        if failing:
            out["failing"] = failing
        return out


def _num(v):
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    v = float(v)
    return v if math.isfinite(v) else repr(v)


@dataclass
class Report:
    scenario: str
    seed: int
    model: str
    tasks: list[TaskResult]

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tasks)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "model": self.model,
            "rng": "numpy.random.default_rng (PCG64)",
            "status": "pass" if self.passed else "fail",
            "tasks": [t.to_json() for t in self.tasks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


# ---------------------------------------------------------------- CSV


def emit_timeseries(columns: Mapping[str, Sequence[float]], path: str | Path) -> Path:
    """Write named columns as CSV: header row, 17 significant digits, LF endings."""
    names = list(columns)
    lengths = {len(columns[k]) for k in names}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths: { {k: len(columns[k]) for k in names} }")
    path = Path(path)
    rows = zip(*(columns[k] for k in names)) if names else iter(())
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow([f"{float(x):.17g}" for x in row])
    return path


# ---------------------------------------------------------------- tasks


@dataclass
class TaskEnv:
    scenario: Scenario
    model: ModelContext
    out_dir: Path
    rng: np.random.Generator
    plots: bool = True

    def emit(self, res: TaskResult, stem: str, columns: dict, title: str, logy: bool = False) -> None:
        csv_path = emit_timeseries(columns, self.out_dir / f"{stem}.csv")
        res.artifacts.append(csv_path.name)
        if self.plots:
            from .plotting import plot_columns

            png = plot_columns(columns, self.out_dir / f"{stem}.png", title=title, logy=logy)
            res.artifacts.append(png.name)


def _crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def task_verify_undamped(env: TaskEnv, res: TaskResult) -> None:
    tol = env.scenario.tol("equivalence")
    model = env.model.energy_model()
    res.check("equivalence_undamped", es.verify_equivalence_undamped(model), tol * (1 + op_norm(model.A)))
    G = es.build_generator(model).G
    ev = np.linalg.eigvals(1j * G)
    sv = np.linalg.svd(model.A, compute_uv=False)
    expected = np.concatenate([sv, -sv])
    res.check("spectrum_plus_minus_singular_values", dg.match_spectra(ev, expected), env.scenario.tol("spectrum"))
    E = model.energy_space
    from .linalg_core import weighted_adjoint

    res.check("self_adjoint_in_energy_space", op_norm(weighted_adjoint(1j * G, E, E) - 1j * G),
              tol * (1 + op_norm(G)))
    res.metrics["n"] = model.n
    res.metrics["m"] = model.m
    res.metrics["sigma_min"] = float(sv[-1])


def task_verify_damped(env: TaskEnv, res: TaskResult) -> None:
    tol = env.scenario.tol("equivalence")
    model = env.model.energy_model()
    _, R = env.model.dense()
    scale = 1 + op_norm(model.A) + op_norm(R)
    r_abs, r_proj = es.verify_equivalence_damped(model, R)
    res.check("equivalence_modulus", r_abs, tol * scale)
    res.check("equivalence_projected", r_proj, tol * scale)
    res.check("damping_block", es.damping_block_residual(model, R), tol * scale)
    r0, _ = es.verify_equivalence_damped(model, np.zeros_like(R))
    res.check("equivalence_modulus_undamped", r0, tol * scale)
    res.check("modulus_bridge", es.verify_modulus_bridge(model), tol)
    res.check("bridge_conjugation", es.bridge_conjugation_residual(model), tol * scale)
    ok, margin = dg.accretivity_check(R)
    res.metrics["accretive"] = ok
    res.metrics["accretivity_margin"] = margin


def _random_offspectrum(rng, spec: np.ndarray, count: int, radius: float) -> list[complex]:
    out = []
    while len(out) < count:
        z = complex(*(radius * (2 * rng.random(2) - 1)))
        if np.min(np.abs(spec - z)) > 0.05 * (1 + abs(z)):
            out.append(z)
    return out


def task_pencil(env: TaskEnv, res: TaskResult) -> None:
    A, R = env.model.dense()
    p = dg.pencil_from_operator(A, R)
    d = dg.build_damped_dirac(p)
    comp = dg.pencil_spectrum(p)
    qspec = dg.supercharge_spectrum(d)
    singular = p.is_singular()
    scale = max(op_norm(d.Q), 1.0)
    drop = 1e-6 * scale if singular else None
    res.check("companion_vs_dirac_spectrum", dg.match_spectra(comp, qspec, drop_below=drop),
              env.scenario.tol("spectrum"))
    tol = env.scenario.tol("resolvent")
    zs = _random_offspectrum(env.rng, qspec, 20, 1.5 * scale)
    worst_mod = worst_pen = 0.0
    I = np.eye(d.Q.shape[0])
    for z in zs:
        direct = np.linalg.inv(d.Q - z * I)
        nd = 1 + op_norm(direct)
        worst_pen = max(worst_pen, op_norm(dg.resolvent_damped(d, p, z, "pencil") - direct) / nd)
        if not singular:
            worst_mod = max(worst_mod, op_norm(dg.resolvent_damped(d, p, z, "modulus") - direct) / nd)
    res.check("resolvent_pencil_form", worst_pen, tol)
    if not singular:
        res.check("resolvent_modulus_form", worst_mod, tol)
        direct0 = np.linalg.inv(d.Q)
        res.check("resolvent_at_zero", op_norm(dg.resolvent_at_zero(d) - direct0) / (1 + op_norm(direct0)), tol)
    res.metrics["distance_of_spectrum_to_zero"] = dg.distance_to_zero(d)
    res.metrics["A2_singular"] = singular


def task_susy(env: TaskEnv, res: TaskResult) -> None:
    A, _ = env.model.dense()
    s = susy.build_supercharge(A)
    tol = env.scenario.tol("susy")
    z0 = complex(-1.0, 0.5)
    funcs = {
        "exp": lambda x: math.exp(-x),
        "resolvent": lambda x: 1.0 / (x - z0),
        "indicator": lambda x: 1.0 if x > 0 else 0.0,
    }
    for name, phi in funcs.items():
        f1, _ = susy.phi_pair(s, phi)
        res.check(f"intertwining_{name}", susy.check_intertwining(s, phi), tol * (1 + op_norm(f1)))
    res.check("nonzero_spectra", susy.isospectrality_residual(s), env.scenario.tol("equivalence"))
    spec = np.concatenate([np.linalg.eigvalsh(s.H1), np.linalg.eigvalsh(s.H2)])
    spec = np.concatenate([np.sqrt(np.maximum(spec, 0)), -np.sqrt(np.maximum(spec, 0))])
    worst = 0.0
    I = np.eye(s.Q.shape[0])
    for zeta in _random_offspectrum(env.rng, spec, 10, 1.5 * max(op_norm(s.Q), 1.0)):
        block = susy.resolvent_Q(s, zeta)
        worst = max(worst, op_norm((s.Q - zeta * I) @ block - I))
    res.check("resolvent_block", worst, env.scenario.tol("resolvent"))
    r_diag, r_unit = susy.diagonalization_residuals(s)
    res.check("diagonalization", r_diag, tol * (1 + op_norm(s.Q)))
    res.check("diagonalizer_unitary", r_unit, tol)
    res.check("sign_symmetry", susy.check_nelson_symmetry(s), 0.0)
    res.metrics["rank"] = s.rank


def _time_grid(sc: Scenario) -> np.ndarray:
    return np.linspace(0.0, sc.horizon, sc.samples)


def _dense_norms(A, R, t: np.ndarray) -> tuple[np.ndarray, dg.DampedDirac]:
    d = dg.build_damped_dirac(dg.pencil_from_operator(A, R))
    return np.array([op_norm(matrix_exp(-1j * d.Q, float(x))) for x in t]), d


def task_dynamics(env: TaskEnv, res: TaskResult) -> None:
    sc, ctx = env.scenario, env.model
    t = _time_grid(sc)
    if ctx.kind == "spectral":
        norms = np.array([sdyn.semigroup_norm(ctx.spectral, ctx.damping, float(x)) for x in t])
        omega = sdyn.growth_bound(ctx.spectral, ctx.damping)
        accretive = True
    else:
        A, R = ctx.dense()
        norms, d = _dense_norms(A, R, t)
        omega = -float(np.max(np.real(np.linalg.eigvals(-1j * d.Q))))
        accretive, _ = dg.accretivity_check(R)
    # smallest C with norms <= C exp(-omega t) on the grid
    C = float(np.max(norms * np.exp(omega * t)))
    res.metrics["omega"] = omega
    res.metrics["C"] = C
    if accretive:
        res.check("contraction_excess", max(float(np.max(norms)) - 1.0, 0.0), sc.tol("contraction"))
    res.check("norm_at_zero", abs(norms[0] - 1.0), sc.tol("contraction"))
    env.emit(res, "dynamics", {"t": t, "norm": norms, "bound": C * np.exp(-omega * t)},
             title="semigroup norm", logy=True)


def _random_wave_state(rng, m: sdyn.SpectralModel) -> sdyn.WaveState:
    return sdyn.WaveState(_crandn(rng, m.count), _crandn(rng, m.count))


def task_equipartition(env: TaskEnv, res: TaskResult) -> None:
    sc, ctx = env.scenario, env.model
    tol = sc.tol("equipartition")
    t = _time_grid(sc)
    if ctx.kind == "spectral":
        m = ctx.spectral
    else:
        A, _ = ctx.dense()
        if A.shape[0] != A.shape[1]:
            raise ModelError("equipartition needs a square A (unitary polar factor)")
        psi1, psi2 = _crandn(env.rng, A.shape[1]), _crandn(env.rng, A.shape[0])
        worst = 0.0
        norm2 = float(np.vdot(psi1, psi1).real + np.vdot(psi2, psi2).real)
        for x in t:
            lhs, rhs = sdyn.equipartition_identity_dense(A, psi1, psi2, float(x))
            worst = max(worst, abs(lhs - rhs) / norm2)
        res.check("identity", worst, tol * 10)
        m = sdyn.SpectralModel.uniform(np.linalg.svd(A, compute_uv=False))
    psi1, psi2 = _crandn(env.rng, m.count), _crandn(env.rng, m.count)
    norm2 = float(np.sum(m.weights * (np.abs(psi1) ** 2 + np.abs(psi2) ** 2)))
    worst = max(abs(l - r) for l, r in (sdyn.equipartition_identity(m, psi1, psi2, float(x)) for x in t))
    res.check("identity_spectral", worst / norm2, tol)
    state = _random_wave_state(env.rng, m)
    K, P = sdyn.kinetic_potential(m, state, t)
    mean_K = np.empty_like(t)
    mean_P = np.empty_like(t)
    mean_K[0], mean_P[0] = K[0], P[0]
    for i in range(1, t.size):
        r = sdyn.cesaro_equipartition(m, state, float(t[i]))
        mean_K[i], mean_P[i] = r.mean_K, r.mean_P
    final = sdyn.cesaro_equipartition(m, state, sc.horizon)
    res.metrics["target"] = final.target
    res.metrics["C"] = final.C
    res.metrics["kernel_defect"] = final.kernel_defect
    res.metrics["kernel_energy"] = final.kernel_energy
    bound = final.C / sc.horizon
    lim_K = final.target + 0.5 * final.kernel_defect
    res.check("cesaro_excess_over_C_by_T", max(abs(final.mean_K - lim_K) - bound, 0.0), tol * (1 + final.target))
    res.check("kernel_defect_vs_kernel_energy", abs(final.kernel_defect - final.kernel_energy),
              tol * (1 + final.target))
    env.emit(res, "equipartition", {"t": t, "K": K, "P": P, "mean_K": mean_K, "mean_P": mean_P},
             title="kinetic / potential energy and Cesaro means")


def task_growth(env: TaskEnv, res: TaskResult) -> None:
    sc, ctx = env.scenario, env.model
    tol = sc.tol("growth")
    t0, t1 = 0.1 * sc.horizon, sc.horizon
    if ctx.kind == "spectral":
        m, d = ctx.spectral, ctx.damping
        omega = sdyn.growth_bound(m, d)
        critical = bool(np.any(sdyn.critical_nodes(m, d)))
        res.metrics["omega"] = omega
        res.metrics["critical_node"] = critical
        if critical:
            env_fit = sdyn.critical_envelope(m, d, t0, t1)
            res.metrics["C"] = env_fit["C"]
            res.check("envelope_ratio_excess", max(env_fit["max_ratio"] - 1.0, 0.0), 1e-9)
            return
        rate = sdyn.measured_decay_rate(m, d, t0, t1)
    else:
        A, R = ctx.dense()
        t = np.linspace(t0, t1, max(sc.samples, 400))
        norms, dd = _dense_norms(A, R, t)
        omega = -float(np.max(np.real(np.linalg.eigvals(-1j * dd.Q))))
        res.metrics["omega"] = omega
        y = np.log(norms)
        hull = np.asarray(sdyn._upper_hull(t, y))
        k = int(np.argmax(np.diff(t[hull])))
        i, j = hull[k], hull[k + 1]
        rate = float(-(y[j] - y[i]) / (t[j] - t[i]))
    res.metrics["measured_rate"] = rate
    err = abs(rate - omega) / omega if omega > 1e-12 else abs(rate - omega)
    res.check("rate_relative_error", err, tol)


TASK_FUNCS: dict[str, Callable[[TaskEnv, TaskResult], None]] = {
    "verify-undamped": task_verify_undamped,
    "verify-damped": task_verify_damped,
    "pencil": task_pencil,
    "susy": task_susy,
    "dynamics": task_dynamics,
    "equipartition": task_equipartition,
    "growth": task_growth,
}


# ---------------------------------------------------------------- driver


def resolve_out_dir(cli_out: str | None, environ: Mapping[str, str]) -> Path:
    """``--out`` wins, then the ``WAVEDIRAC_OUT`` variable, then ``./wavedirac-out``."""
    if cli_out:
        return Path(cli_out)
    if environ.get(OUT_ENV):
        return Path(environ[OUT_ENV])
    return Path("wavedirac-out")


def run_scenario(sc: Scenario, out_dir: str | Path, plots: bool = True) -> Report:
    """Build the model, run the tasks in order and write ``report.json``.

    Raises :class:`ModelError` when the model cannot be built.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = build_model(sc)
    needs_energy = {"verify-undamped", "verify-damped"} & set(sc.tasks)
    if needs_energy:
        try:
            ctx.energy_model()
        except (WaveDiracError, ValueError) as exc:
            raise ModelError(str(exc)) from exc
    env = TaskEnv(sc, ctx, out_dir, np.random.default_rng(sc.seed), plots)
    results = []
    for name in sc.tasks:
        res = TaskResult(name)
        start = time.perf_counter()
        try:
            TASK_FUNCS[name](env, res)
        except (WaveDiracError, ValueError, np.linalg.LinAlgError) as exc:
            res.error = f"{type(exc).__name__}: {exc}"
        res.wall_time = round(time.perf_counter() - start, 6)
        results.append(res)
    report = Report(sc.name, sc.seed, ctx.kind, results)
    (out_dir / "report.json").write_text(report.dumps())
    return report


def strip_wall_time(report_text: str) -> dict:
    data = json.loads(report_text)
    for t in data.get("tasks", []):
        t.pop("wall_time", None)
    return data
