"""The four-copy discord witness Tr(W rho^{x4}) and the bounds derived from it.

Two independent evaluation routes live here:

* the correlation-matrix route, ``Tr[(R R^T)^2] - Tr(R R^T)^2``, where ``R``
  collects ``<A_i x B_j>`` over traceless A-side observables and all B-side
  observables of a local orthogonal observable (LOO) basis;
* the permutation route, contracting ``rho^{x4}`` against the copy-swap
  operators ``U_1 .. U_4`` that make up ``W = U1 - U3 - (2/dA)(U2 - U4)``.

The four-copy space is ordered ``A1 B1 A2 B2 A3 B3 A4 B4``.
"""

from __future__ import annotations

import enum
import string
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NegativeRadicand, SizeOverflow, ValidationError
from .qnum import DEFAULT_TOL, BipartiteState, partial_trace, purity, von_neumann_entropy

WITNESS_TOL = 1e-12
RADICAND_FLOOR = -1e-10
RANK_RTOL = 1e-8


class Route(str, enum.Enum):
    R_MATRIX = "R-matrix"
    PERMUTATION = "permutation"
    CIRCUIT = "circuit"


# ---------------------------------------------------------------------------
# local orthogonal observables


@dataclass(frozen=True)
class LooBasis:
    """Hilbert-Schmidt orthonormal Hermitian basis, ``observables[0] = I/sqrt(d)``."""

    d: int
    observables: np.ndarray = field(repr=False)  # shape (d*d, d, d)

    def __len__(self):
        return len(self.observables)

    def gram(self) -> np.ndarray:
        return np.einsum("iab,jba->ij", self.observables, self.observables)

    def rotated(self, orthogonal) -> "LooBasis":
        """Mix the traceless sector with a real orthogonal matrix."""
        o = np.asarray(orthogonal, dtype=float)
        obs = self.observables.copy()
        obs[1:] = np.einsum("ij,jab->iab", o, self.observables[1:])
        return LooBasis(self.d, obs)


def gell_mann_basis(d: int) -> LooBasis:
    """Identity/sqrt(d) followed by the normalized generalized Gell-Mann matrices.

    Ordering: for each pair ``j < k`` (lexicographic) the symmetric then the
    antisymmetric generator, followed by the ``d - 1`` diagonal generators.
    For ``d = 2`` this yields ``(I, sx, sy, sz) / sqrt(2)``.
    """
    if d < 2:
        raise ValueError("LOO basis needs d >= 2")
    obs = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            obs += [s, a]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        obs.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return LooBasis(d, np.array(obs))


def swap_operator(d: int) -> np.ndarray:
    """V = sum_kl |k><l| x |l><k| on C^d x C^d."""
    v = np.zeros((d * d, d * d))
    for k in range(d):
        for l in range(d):
            v[k * d + l, l * d + k] = 1
    return v


# ---------------------------------------------------------------------------
# correlation matrix


@dataclass(frozen=True)
class CorrelationMatrix:
    dA: int
    dB: int
    entries: np.ndarray  # (dA^2 - 1, dB^2)
    y: np.ndarray  # <A_0 x B_j> for j >= 1

    @property
    def x(self) -> np.ndarray:
        return self.entries[:, 0]

    @property
    def T(self) -> np.ndarray:
        return self.entries[:, 1:]

    def gram(self) -> np.ndarray:
        return self.entries @ self.entries.T

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.entries, compute_uv=False)

    def rank(self, rtol: float = RANK_RTOL, atol: float = DEFAULT_TOL.spec) -> int:
        s = self.singular_values()
        if s.size == 0 or s[0] <= atol:
            return 0
        return int(np.sum(s > max(rtol * s[0], atol)))


def _expectations(state: BipartiteState, basis_a: LooBasis, basis_b: LooBasis) -> np.ndarray:
    # <A_i x B_j> = sum rho[a,b,a',b'] A_i[a',a] B_j[b',b]
    return np.einsum("abcd,ica,jdb->ij", state.tensor(), basis_a.observables, basis_b.observables)


def correlation_matrix(
    state: BipartiteState, basis_a: LooBasis | None = None, basis_b: LooBasis | None = None
) -> CorrelationMatrix:
    basis_a = basis_a or gell_mann_basis(state.dA)
    basis_b = basis_b or gell_mann_basis(state.dB)
    full = _expectations(state, basis_a, basis_b)
    imag = float(np.max(np.abs(full.imag)))
    if imag > 1e-10:
        raise ValidationError(f"expectation values not real (|Im| = {imag:.3e})", magnitude=imag)
    full = full.real
    return CorrelationMatrix(state.dA, state.dB, full[1:, :].copy(), full[0, 1:].copy())


def reconstruct_from_R(
    cm: CorrelationMatrix, rho_b, basis_a: LooBasis | None = None, basis_b: LooBasis | None = None
) -> np.ndarray:
    """rho = sum_{i>=1, j>=0} r_ij A_i x B_j + I_A/dA x rho_B."""
    basis_a = basis_a or gell_mann_basis(cm.dA)
    basis_b = basis_b or gell_mann_basis(cm.dB)
    body = np.einsum("ij,iac,jbd->abcd", cm.entries, basis_a.observables[1:], basis_b.observables)
    n = cm.dA * cm.dB
    return body.reshape(n, n) + np.kron(np.eye(cm.dA) / cm.dA, rho_b)


def tilde_purity(state: BipartiteState) -> float:
    """Tr(rho~^2) with rho~ = rho - I_A/dA x rho_B."""
    rho_b = partial_trace(state, "B")
    tilde = state.rho - np.kron(np.eye(state.dA) / state.dA, rho_b)
    return purity(tilde)


def witness_via_R(
    state: BipartiteState, basis_a: LooBasis | None = None, basis_b: LooBasis | None = None
) -> float:
    k = correlation_matrix(state, basis_a, basis_b).gram()
    return float(np.trace(k @ k) - np.trace(k) ** 2)


# ---------------------------------------------------------------------------
# permutation operators on four copies


def _perm_from_pairs(pairs) -> tuple:
    perm = list(range(4))
    used = set()
    for i, j in pairs:
        if not (1 <= i <= 4 and 1 <= j <= 4) or i == j:
            raise ValueError(f"bad copy pair ({i}, {j}); copies are numbered 1..4")
        if {i, j} & used:
            raise ValueError(f"pairs {pairs} are not disjoint")
        used |= {i, j}
        perm[i - 1], perm[j - 1] = j - 1, i - 1
    return tuple(perm)


def _compose(p, q) -> tuple:
    return tuple(p[q[c]] for c in range(4))


def _invert(p) -> tuple:
    inv = [0] * 4
    for c, pc in enumerate(p):
        inv[pc] = c
    return tuple(inv)


_LETTERS = string.ascii_lowercase


@dataclass(frozen=True)
class PermutationOperator:
    """Product of a copy permutation on the A factors and one on the B factors.

    ``perm_a[c]`` is the slot that the content of copy ``c`` (0-based) is moved
    to, i.e. ``P |x_1 .. x_4> = |y>`` with ``y[perm[c]] = x[c]``.
    """

    dA: int
    dB: int
    perm_a: tuple = (0, 1, 2, 3)
    perm_b: tuple = (0, 1, 2, 3)
    name: str = ""

    def __matmul__(self, other: "PermutationOperator") -> "PermutationOperator":
        return PermutationOperator(
            self.dA,
            self.dB,
            _compose(self.perm_a, other.perm_a),
            _compose(self.perm_b, other.perm_b),
        )

    def adjoint(self) -> "PermutationOperator":
        return PermutationOperator(self.dA, self.dB, _invert(self.perm_a), _invert(self.perm_b))

    @property
    def dim(self) -> int:
        return (self.dA * self.dB) ** 4

    def index_map(self) -> np.ndarray:
        """``out[x] = y`` with ``P|x> = |y>`` over flat four-copy indices."""
        dims = (self.dA, self.dB) * 4
        coords = np.indices(dims).reshape(8, -1)
        moved = np.empty_like(coords)
        for c in range(4):
            moved[2 * self.perm_a[c]] = coords[2 * c]
            moved[2 * self.perm_b[c] + 1] = coords[2 * c + 1]
        return np.ravel_multi_index(tuple(moved), dims)

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.dim > DEFAULT_TOL.kron_cap:
            raise SizeOverflow(f"four-copy dimension {self.dim} exceeds cap {DEFAULT_TOL.kron_cap}")
        m = np.zeros((self.dim, self.dim))
        m[self.index_map(), np.arange(self.dim)] = 1
        return m

    def einsum_expression(self) -> str:
        """Subscripts for ``Tr(P rho^{x4}) = sum_x prod_c rho[x_{perm(c)}, x_c]``."""
        a, b = _LETTERS[:4], _LETTERS[4:8]
        inv_a, inv_b = _invert(self.perm_a), _invert(self.perm_b)
        # row index of copy c is the content that ends up in slot c
        terms = [a[inv_a[c]] + b[inv_b[c]] + a[c] + b[c] for c in range(4)]
        return ",".join(terms) + "->"

    def expectation(self, state: BipartiteState) -> complex:
        t = state.tensor()
        return complex(np.einsum(self.einsum_expression(), t, t, t, t, optimize="greedy"))


def permutation_operator(swaps_a, swaps_b, dA: int, dB: int, name: str = "") -> PermutationOperator:
    """Operator from disjoint copy-pair swaps, copies numbered 1..4 as in ``V_ij``."""
    return PermutationOperator(dA, dB, _perm_from_pairs(swaps_a), _perm_from_pairs(swaps_b), name)


# (A-side swaps, B-side swaps)
U_SWAPS = {
    "U1": ([(1, 4), (2, 3)], [(1, 2), (3, 4)]),
    "U2": ([(1, 4)], [(1, 2), (3, 4)]),
    "U3": ([(1, 2), (3, 4)], [(1, 2), (3, 4)]),
    "U4": ([(1, 2)], [(1, 2), (3, 4)]),
}


def witness_operators(dA: int, dB: int) -> list:
    return [permutation_operator(*U_SWAPS[k], dA, dB, name=k) for k in ("U1", "U2", "U3", "U4")]


def witness_coefficients(dA: int) -> np.ndarray:
    """Coefficients of (U1, U2, U3, U4) in W."""
    return np.array([1.0, -2.0 / dA, -1.0, 2.0 / dA])


def u_traces(state: BipartiteState) -> np.ndarray:
    """Tr(U_i rho^{x4}) for i = 1..4."""
    vals = np.array([u.expectation(state) for u in witness_operators(state.dA, state.dB)])
    imag = float(np.max(np.abs(vals.imag)))
    if imag > 1e-10:
        raise ValidationError(f"Tr(U_i rho^x4) not real (|Im| = {imag:.3e})", magnitude=imag)
    return vals.real


def witness_matrix(dA: int, dB: int) -> np.ndarray:
    ops = witness_operators(dA, dB)
    return sum(c * u.matrix for c, u in zip(witness_coefficients(dA), ops))


def witness_via_permutation(state: BipartiteState) -> float:
    dim = state.dim**4
    if dim > DEFAULT_TOL.kron_cap:
        raise SizeOverflow(f"four-copy dimension {dim} exceeds cap {DEFAULT_TOL.kron_cap}")
    return float(witness_coefficients(state.dA) @ u_traces(state))


# ---------------------------------------------------------------------------
# Q(rho) and the bounds


def q_value(state: BipartiteState, witness_value: float) -> float:
    """Tr(rho_B^2)/dA + (dA - 1) sqrt(witness + Tr(rho~^2)^2)."""
    radicand = witness_value + tilde_purity(state) ** 2
    if radicand < RADICAND_FLOOR:
        raise NegativeRadicand(f"radicand {radicand:.3e} < 0")
    radicand = max(radicand, 0.0)
    rho_b = partial_trace(state, "B")
    return purity(rho_b) / state.dA + (state.dA - 1) * np.sqrt(radicand)


def discord_lower_bound(state: BipartiteState, witness_value: float | None = None) -> float:
    """Entropic lower bound on the von-Neumann-restricted discord D_A, in bits."""
    w = witness_via_R(state) if witness_value is None else witness_value
    q = q_value(state, w)
    s_a = von_neumann_entropy(partial_trace(state, "A"))
    s = von_neumann_entropy(state.rho)
    return max(0.0, s_a - s - float(np.log2(state.dA * q)))


def geometric_discord_lower_bound(state: BipartiteState, witness_value: float | None = None) -> float:
    w = witness_via_R(state) if witness_value is None else witness_value
    return max(0.0, purity(state.rho) - q_value(state, w))


@dataclass(frozen=True)
class WitnessReport:
    witness_value: float
    q: float
    discord_lower_bound: float
    geo_discord_lower_bound: float
    route: Route
    rank_r: int
    rank_threshold: float
    entropy_a: float
    entropy: float
    witness_tolerance: float = WITNESS_TOL
    bound_measurement_class: str = "von-neumann"

    def to_dict(self) -> dict:
        return {
            "witnessValue": self.witness_value,
            "q": self.q,
            "discordLowerBound": self.discord_lower_bound,
            "geoDiscordLowerBound": self.geo_discord_lower_bound,
            "route": self.route.value,
            "rankR": self.rank_r,
            "rankThreshold": self.rank_threshold,
            "entropyA": self.entropy_a,
            "entropy": self.entropy,
            "witnessTolerance": self.witness_tolerance,
            "boundMeasurementClass": self.bound_measurement_class,
        }


def evaluate_witness(state: BipartiteState, route: Route | str = Route.R_MATRIX) -> float:
    route = Route(route)
    if route is Route.R_MATRIX:
        return witness_via_R(state)
    if route is Route.PERMUTATION:
        return witness_via_permutation(state)
    from .circuit import exact_ancilla_expectations, reconstruct_witness

    return reconstruct_witness(exact_ancilla_expectations(state), state.dA)


def witness_report(state: BipartiteState, route: Route | str = Route.R_MATRIX) -> WitnessReport:
    route = Route(route)
    w = evaluate_witness(state, route)
    if w > WITNESS_TOL:
        raise ValidationError(f"witness {w:.3e} is positive beyond roundoff", magnitude=w)
    cm = correlation_matrix(state)
    s = cm.singular_values()
    threshold = max(RANK_RTOL * (s[0] if s.size else 0.0), DEFAULT_TOL.spec)
    return WitnessReport(
        witness_value=w,
        q=q_value(state, w),
        discord_lower_bound=discord_lower_bound(state, w),
        geo_discord_lower_bound=geometric_discord_lower_bound(state, w),
        route=route,
        rank_r=cm.rank(),
        rank_threshold=threshold,
        entropy_a=von_neumann_entropy(partial_trace(state, "A")),
        entropy=von_neumann_entropy(state.rho),
    )
