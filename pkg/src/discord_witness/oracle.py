"""Brute-force discord oracles over von Neumann measurements on subsystem A.

Both oracles minimize over orthonormal bases ``U|k>`` with
``U = expm(i sum_m theta_m G_m)`` built from the traceless Gell-Mann
generators. The minimizer is a multi-start Nelder-Mead search, so the reported
value is an upper bound on the true minimum. For a qubit A the measurement is
a Bloch direction and a dense sphere grid is available as an independent
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import DidNotConverge, DimensionMismatch, InvalidEnsemble
from .qnum import (
    BipartiteState,
    as_matrix,
    partial_trace,
    purity,
    validate_state,
    von_neumann_entropy,
)
from .witness import LooBasis, gell_mann_basis

P_MIN = 1e-12


@lru_cache(maxsize=None)
def off_diagonal_generators(d: int) -> np.ndarray:
    """The d^2 - d symmetric/antisymmetric Gell-Mann generators.

    Diagonal generators only rephase basis vectors and leave the projectors
    unchanged, so they are dropped from the search space.
    """
    gens = gell_mann_basis(d).observables[1 : d * d - d + 1]
    gens.setflags(write=False)
    return gens


@dataclass(frozen=True)
class MeasurementBasis:
    """Rank-one projective measurement ``Pi_k = |v_k><v_k|`` on subsystem A."""

    vectors: np.ndarray = field(repr=False)  # columns v_k
    parameters: tuple = ()

    @property
    def dA(self) -> int:
        return self.vectors.shape[0]

    @property
    def projectors(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("ak,bk->kab", v, v.conj())

    def loo_coefficients(self, basis: LooBasis | None = None) -> np.ndarray:
        """``e[k, i] = Tr(Pi_k A_i)``, real."""
        basis = basis or gell_mann_basis(self.dA)
        return np.einsum("kab,iba->ki", self.projectors, basis.observables).real

    @classmethod
    def from_unitary(cls, u, parameters=()) -> "MeasurementBasis":
        u = as_matrix(u)
        if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10):
            raise InvalidEnsemble("measurement vectors are not orthonormal")
        return cls(u, tuple(float(p) for p in parameters))

    @classmethod
    def computational(cls, d: int) -> "MeasurementBasis":
        return cls(np.eye(d, dtype=complex))

    @classmethod
    def from_parameters(cls, theta, d: int) -> "MeasurementBasis":
        """Basis ``expm(i sum_m theta_m G_m)|k>`` over the off-diagonal generators."""
        h = np.einsum("m,mab->ab", np.asarray(theta, dtype=float), off_diagonal_generators(d))
        w, v = np.linalg.eigh(h)
        return cls((v * np.exp(1j * w)) @ v.conj().T, tuple(float(t) for t in theta))

    @classmethod
    def bloch(cls, theta: float, phi: float) -> "MeasurementBasis":
        """Qubit basis along the Bloch direction (theta, phi) and its antipode."""
        up = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
        down = np.array([-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)])
        return cls(np.column_stack([up, down]), (float(theta), float(phi)))


@dataclass(frozen=True)
class MeasurementOutcomeSet:
    probabilities: np.ndarray
    unnormalized: np.ndarray  # rho'_{B|k}

    @property
    def branches(self) -> list:
        """Normalized post-measurement states; ``None`` for negligible outcomes."""
        return [r / p if p >= P_MIN else None for p, r in zip(self.probabilities, self.unnormalized)]


def _branches(t: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    # rho'_k[b, b'] = <v_k| (rho)[., b; ., b'] |v_k>
    half = np.tensordot(vectors.conj(), t, axes=([0], [0]))  # (k, b, a', b')
    return np.einsum("kbcd,ck->kbd", half, vectors)


def apply_measurement(state: BipartiteState, basis: MeasurementBasis) -> MeasurementOutcomeSet:
    if basis.dA != state.dA:
        raise DimensionMismatch(f"basis acts on dimension {basis.dA}, state has dA={state.dA}")
    unnorm = _branches(state.tensor(), basis.vectors)
    probs = np.einsum("kbb->k", unnorm).real
    return MeasurementOutcomeSet(probs, unnorm)


def _conditional_entropy(unnorm: np.ndarray) -> float:
    # sum_k p_k S(rho'_k / p_k) = -sum_k sum_mu mu log2(mu / p_k)
    total = 0.0
    for r in unnorm:
        mu = np.linalg.eigvalsh((r + r.conj().T) / 2)
        p = mu.sum()
        if p < P_MIN:
            continue
        mu = mu[mu > P_MIN * 1e-3]
        total -= float(np.sum(mu * np.log2(mu / p)))
    return total


def conditional_entropy(outcomes: MeasurementOutcomeSet) -> float:
    """sum_k p_k S(rho_{B|k}) in bits, skipping outcomes with p_k < 1e-12."""
    total = 0.0
    for p, branch in zip(outcomes.probabilities, outcomes.branches):
        if branch is not None:
            total += p * von_neumann_entropy(branch)
    return total


def branch_purity_sum(state: BipartiteState, basis: MeasurementBasis) -> float:
    """sum_k Tr(rho'_{B|k}^2) evaluated directly from the measured branches."""
    unnorm = _branches(state.tensor(), basis.vectors)
    return float(np.einsum("kab,kba->", unnorm, unnorm).real)


def m_matrix(state: BipartiteState, basis: LooBasis | None = None) -> np.ndarray:
    """M_ij = Tr_B(Tr_A(A_i x I rho) Tr_A(A_j x I rho)), i, j >= 1."""
    basis = basis or gell_mann_basis(state.dA)
    partial = np.einsum("ica,abcd->ibd", basis.observables[1:], state.tensor())
    return np.einsum("iab,jba->ij", partial, partial).real


def branch_purity_sum_via_m(
    state: BipartiteState, basis: MeasurementBasis, loo: LooBasis | None = None
) -> float:
    """sum_k sum_ij e_i^k e_j^k M_ij + Tr(rho_B^2)/dA."""
    loo = loo or gell_mann_basis(state.dA)
    e = basis.loo_coefficients(loo)[:, 1:]
    m = m_matrix(state, loo)
    return float(np.einsum("ki,ij,kj->", e, m, e)) + purity(partial_trace(state, "B")) / state.dA


# ---------------------------------------------------------------------------
# optimization


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    seed: int = 0
    fatol: float = 1e-9
    xatol: float = 1e-6
    max_iter: int = 4000
    grid: tuple | None = None  # (n_theta, n_phi); qubit A only
    refine: bool = False  # polish the best grid point with Nelder-Mead


FAST_QUBIT = OptimizerConfig(grid=(24, 48), refine=True)


@dataclass(frozen=True)
class OptimizationResult:
    value: float
    argmin: MeasurementBasis
    restarts: int
    converged: bool
    iterations: int
    restart_values: tuple = ()
    method: str = "multistart-nelder-mead"

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "parameters": list(self.argmin.parameters),
            "restarts": self.restarts,
            "converged": self.converged,
            "iterations": self.iterations,
            "restartValues": list(self.restart_values),
        }


def _multistart(objective, n_params: int, d: int, cfg: OptimizerConfig) -> OptimizationResult:
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    best = None
    values, iterations, any_converged = [], 0, False
    for i, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        # the first start is the computational basis, which is optimal for flagged states
        x0 = np.zeros(n_params) if i == 0 else rng.uniform(-np.pi, np.pi, n_params)
        res = minimize(
            lambda th: objective(MeasurementBasis.from_parameters(th, d).vectors),
            x0,
            method="Nelder-Mead",
            options={"xatol": cfg.xatol, "fatol": cfg.fatol, "maxiter": cfg.max_iter},
        )
        iterations += int(res.nit)
        any_converged |= bool(res.success)
        values.append(float(res.fun))
        if best is None or res.fun < best.fun:  # strict: lowest restart index wins ties
            best = res
    if not any_converged:
        raise DidNotConverge(f"none of {cfg.restarts} restarts reached fatol={cfg.fatol}")
    basis = MeasurementBasis.from_parameters(best.x, d)
    return OptimizationResult(
        value=float(objective(basis.vectors)),
        argmin=basis,
        restarts=cfg.restarts,
        converged=any_converged,
        iterations=iterations,
        restart_values=tuple(values),
    )


def _sphere_grid(n_theta: int, n_phi: int):
    theta = np.linspace(0, np.pi, n_theta)
    phi = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    return th.ravel(), ph.ravel()


def _qubit_branch_batch(state: BipartiteState, th, ph) -> np.ndarray:
    """rho'_{+/-} = (rho_B +/- n . Gamma)/2 with Gamma_i = Tr_A(sigma_i x I rho)."""
    sig = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
    gamma = np.einsum("ica,abcd->ibd", sig, state.tensor())
    rho_b = partial_trace(state, "B")
    n = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)
    ng = np.einsum("gi,icd->gcd", n, gamma)
    return np.stack([(rho_b + ng) / 2, (rho_b - ng) / 2], axis=1)


def _grid_search(state: BipartiteState, per_point, cfg: OptimizerConfig, method: str) -> OptimizationResult:
    if state.dA != 2:
        raise DimensionMismatch("the Bloch-sphere grid applies to a qubit subsystem A only")
    th, ph = _sphere_grid(*cfg.grid)
    values = per_point(_qubit_branch_batch(state, th, ph))
    i = int(np.argmin(values))
    best, evals = np.array([th[i], ph[i]]), len(values)
    if cfg.refine:
        res = minimize(
            lambda x: float(per_point(_qubit_branch_batch(state, x[:1], x[1:]))[0]),
            best,
            method="Nelder-Mead",
            options={"xatol": cfg.xatol, "fatol": cfg.fatol, "maxiter": cfg.max_iter},
        )
        if res.fun <= values[i]:
            best = res.x
        evals += int(res.nfev)
        method += "+nelder-mead"
    basis = MeasurementBasis.bloch(*best)
    value = float(per_point(_qubit_branch_batch(state, best[:1], best[1:]))[0])
    return OptimizationResult(value, basis, 0, True, evals, method=method)


def _conditional_entropy_batch(branches: np.ndarray) -> np.ndarray:
    mu = np.linalg.eigvalsh(branches)  # (g, k, dB)
    p = mu.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where((mu > P_MIN * 1e-3) & (p >= P_MIN), mu * np.log2(mu / p), 0.0)
    return -terms.sum(axis=(1, 2))


def discord_vn(state: BipartiteState, cfg: OptimizerConfig | None = None) -> OptimizationResult:
    """Discord D_A minimized over von Neumann measurements on A (bits)."""
    cfg = cfg or OptimizerConfig()
    if state.dA > 4:
        raise DimensionMismatch("the discord oracle is limited to dA <= 4")
    offset = von_neumann_entropy(partial_trace(state, "A")) - von_neumann_entropy(state.rho)
    if cfg.grid is not None:
        res = _grid_search(state, _conditional_entropy_batch, cfg, "bloch-grid")
        return _shift(res, offset)
    t = state.tensor()
    res = _multistart(lambda v: _conditional_entropy(_branches(t, v)), state.dA**2 - state.dA, state.dA, cfg)
    return _shift(res, offset)


def geometric_discord(state: BipartiteState, cfg: OptimizerConfig | None = None) -> OptimizationResult:
    """min over von Neumann bases of Tr(rho^2) - sum_k Tr(rho'_{B|k}^2)."""
    cfg = cfg or OptimizerConfig()
    if state.dA > 4:
        raise DimensionMismatch("the geometric discord oracle is limited to dA <= 4")
    total = purity(state.rho)
    if cfg.grid is not None:
        res = _grid_search(
            state, lambda br: -np.einsum("gkab,gkba->g", br, br).real, cfg, "bloch-grid"
        )
        return _shift(res, total)
    t = state.tensor()

    def objective(v):
        br = _branches(t, v)
        return -float(np.einsum("kab,kba->", br, br).real)

    return _shift(_multistart(objective, state.dA**2 - state.dA, state.dA, cfg), total)


def _shift(res: OptimizationResult, offset: float) -> OptimizationResult:
    return OptimizationResult(
        value=res.value + offset,
        argmin=res.argmin,
        restarts=res.restarts,
        converged=res.converged,
        iterations=res.iterations,
        restart_values=tuple(v + offset for v in res.restart_values),
        method=res.method,
    )


def discord_at(state: BipartiteState, basis: MeasurementBasis) -> float:
    """Discord objective evaluated at a fixed basis (no minimization)."""
    outcomes = apply_measurement(state, basis)
    return (
        conditional_entropy(outcomes)
        + von_neumann_entropy(partial_trace(state, "A"))
        - von_neumann_entropy(state.rho)
    )


def geometric_discord_at(state: BipartiteState, basis: MeasurementBasis) -> float:
    return purity(state.rho) - branch_purity_sum(state, basis)


# ---------------------------------------------------------------------------
# zero-discord constructions


def classical_quantum_state(probabilities, basis_a, branches) -> BipartiteState:
    """sum_k p_k |psi_k><psi_k| x rho_k with orthonormal ``basis_a`` columns."""
    p = np.asarray(probabilities, dtype=float)
    vecs = as_matrix(basis_a)
    dA = vecs.shape[0]
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
        raise InvalidEnsemble(f"probabilities must be >= 0 and sum to 1 (sum {p.sum():.12g})")
    if len(p) != vecs.shape[1] or len(p) != len(branches) or len(p) > dA:
        raise InvalidEnsemble("need one orthonormal vector and one branch per probability")
    gram = vecs.conj().T @ vecs
    if not np.allclose(gram, np.eye(len(p)), atol=1e-10):
        raise InvalidEnsemble("A-side vectors are not orthonormal")
    branches = [validate_state(b, as_matrix(b).shape[0], 1).rho for b in branches]
    dB = branches[0].shape[0]
    rho = sum(pk * np.kron(np.outer(v, v.conj()), b) for pk, v, b in zip(p, vecs.T, branches))
    return validate_state(rho, dA, dB)


def random_classical_quantum_state(dA: int, dB: int, seed=None, rotate: bool = True) -> BipartiteState:
    from .qnum import random_state, random_unitary

    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(dA))
    basis = random_unitary(dA, rng) if rotate else np.eye(dA)
    branches = [random_state(dB, 1, seed=rng).rho for _ in range(dA)]
    return classical_quantum_state(p, basis, branches)
