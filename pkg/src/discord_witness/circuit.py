"""Ancilla-interferometry circuit and the two-setting direct measurement of W.

Circuit: four ancillas in |+>, ancilla m controls U_m on four copies of the
state (applied in the order U1, U2, U3, U4), then every ancilla is measured in
the sigma_x basis. Ancilla bits are the leading factors of the total space,
ancilla 1 most significant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import SizeOverflow
from .qnum import DEFAULT_TOL, BipartiteState
from .witness import PermutationOperator, permutation_operator, witness_operators

ANCILLAS = 4
PATTERNS = list(itertools.product((0, 1), repeat=ANCILLAS))


@dataclass(frozen=True)
class WitnessCircuit:
    dA: int
    dB: int
    controlled_ops: tuple = field(default=None)

    def __post_init__(self):
        if self.controlled_ops is None:
            ops = tuple(enumerate(witness_operators(self.dA, self.dB)))
            object.__setattr__(self, "controlled_ops", ops)

    @property
    def data_dim(self) -> int:
        return (self.dA * self.dB) ** 4

    @property
    def total_dim(self) -> int:
        return 2**ANCILLAS * self.data_dim

    def branch_operator(self, pattern) -> PermutationOperator:
        """U4^l U3^k U2^j U1^i for ancilla pattern (i, j, k, l)."""
        ident = PermutationOperator(self.dA, self.dB)
        return reduce(lambda acc, iu: iu[1] @ acc if pattern[iu[0]] else acc, self.controlled_ops, ident)

    def gate_permutation(self, ancilla: int, op: PermutationOperator) -> np.ndarray:
        """Index map of controlled-``op`` on the total space."""
        data = op.index_map()
        total = np.arange(self.total_dim).reshape(2**ANCILLAS, self.data_dim)
        bit = (np.arange(2**ANCILLAS) >> (ANCILLAS - 1 - ancilla)) & 1
        out = total.copy()
        offsets = np.arange(2**ANCILLAS)[:, None] * self.data_dim
        out[bit == 1] = offsets[bit == 1] + data[None, :]
        return out.ravel()


def _cap(dim: int):
    if dim > DEFAULT_TOL.kron_cap:
        raise SizeOverflow(f"total dimension {dim} exceeds cap {DEFAULT_TOL.kron_cap}")


def build_total_state(state: BipartiteState) -> np.ndarray:
    """Density matrix of ancillas plus four copies after all controlled-U gates."""
    circ = WitnessCircuit(state.dA, state.dB)
    _cap(circ.total_dim)
    data = state.rho
    for _ in range(3):
        data = np.kron(data, state.rho)
    total = np.kron(np.full((2**ANCILLAS, 2**ANCILLAS), 1 / 2**ANCILLAS), data)
    for ancilla, op in circ.controlled_ops:
        perm = circ.gate_permutation(ancilla, op)
        # P M P^T with P|x> = |perm[x]>
        moved = np.empty_like(total)
        moved[np.ix_(perm, perm)] = total
        total = moved
    return total


def ancilla_state(state: BipartiteState) -> np.ndarray:
    """Reduced 16x16 ancilla density matrix, from traces of branch operators.

    Entry (a, a') is Tr(U_a rho^{x4} U_{a'}^dag) / 16.
    """
    circ = WitnessCircuit(state.dA, state.dB)
    _cap(circ.data_dim)
    branch = [circ.branch_operator(p) for p in PATTERNS]
    cache = {}
    out = np.empty((16, 16), dtype=complex)
    for i, ui in enumerate(branch):
        for j, uj in enumerate(branch):
            prod = uj.adjoint() @ ui
            key = (prod.perm_a, prod.perm_b)
            if key not in cache:
                cache[key] = prod.expectation(state)
            out[i, j] = cache[key] / 16
    return out


def _sigma_x_on(ancilla: int) -> np.ndarray:
    x = np.array([[0, 1], [1, 0]])
    ops = [x if m == ancilla else np.eye(2) for m in range(ANCILLAS)]
    return reduce(np.kron, ops)


def _expectations_from(anc: np.ndarray) -> np.ndarray:
    vals = np.array([np.trace(anc @ _sigma_x_on(m)) for m in range(ANCILLAS)])
    if np.max(np.abs(vals.imag)) > 1e-10:
        raise ValueError(f"ancilla expectations not real: {vals}")
    return vals.real


def exact_ancilla_expectations(state: BipartiteState) -> np.ndarray:
    """<sigma_x^m> for the four ancillas."""
    return _expectations_from(ancilla_state(state))


def ancilla_reduced(total: np.ndarray) -> np.ndarray:
    n = total.shape[0] // 2**ANCILLAS
    return np.einsum("aibi->ab", total.reshape(16, n, 16, n))


def reconstruct_witness(expectations, dA: int) -> float:
    """2(<x1> - <x3>) - (4/dA)(<x2> - <x4>)."""
    x1, x2, x3, x4 = expectations
    return 2 * (x1 - x3) - 4 / dA * (x2 - x4)


def u_traces_from_expectations(expectations) -> np.ndarray:
    """Invert <x1> = T1, <x2> = T2, <x3> = (T3 + <x1>)/2, <x4> = (T4 + <x2>)/2."""
    x1, x2, x3, x4 = expectations
    return np.array([x1, x2, 2 * x3 - x1, 2 * x4 - x2])


def expectations_from_u_traces(traces) -> np.ndarray:
    t1, t2, t3, t4 = traces
    return np.array([t1, t2, (t3 + t1) / 2, (t4 + t2) / 2])


# ---------------------------------------------------------------------------
# finite shots


@dataclass(frozen=True)
class ShotRecord:
    shots: int
    seed: int
    means: np.ndarray
    standard_errors: np.ndarray
    witness: float
    witness_standard_error: float
    dA: int

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "seed": self.seed,
            "perAncillaMeans": self.means,
            "standardErrors": self.standard_errors,
            "witness": self.witness,
            "witnessStandardError": self.witness_standard_error,
        }


def sigma_x_distribution(state: BipartiteState) -> np.ndarray:
    """Probabilities of the 16 joint sigma_x outcomes; index bit 1 means outcome -1."""
    h = reduce(np.kron, [np.array([[1, 1], [1, -1]]) / np.sqrt(2)] * ANCILLAS)
    probs = np.diag(h @ ancilla_state(state) @ h).real
    probs = np.clip(probs, 0, None)
    return probs / probs.sum()


OUTCOME_SIGNS = np.array([[1 - 2 * b for b in p] for p in PATTERNS], dtype=float)


def sample_circuit(state: BipartiteState, shots: int, seed: int) -> ShotRecord:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = sigma_x_distribution(state)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    samples = np.repeat(OUTCOME_SIGNS, counts, axis=0)  # (shots, 4)
    means = samples.mean(axis=0)
    ddof = 1 if shots > 1 else 0
    se = samples.std(axis=0, ddof=ddof) / np.sqrt(shots)
    # per-shot witness estimator keeps the outcome covariance
    coeff = np.array([2.0, -4.0 / state.dA, -2.0, 4.0 / state.dA])
    per_shot = samples @ coeff
    return ShotRecord(
        shots=shots,
        seed=seed,
        means=means,
        standard_errors=se,
        witness=float(per_shot.mean()),
        witness_standard_error=float(per_shot.std(ddof=ddof) / np.sqrt(shots)),
        dA=state.dA,
    )


# ---------------------------------------------------------------------------
# two-setting direct measurement


SETTINGS = {
    "a": {"A": [(1, 4), (2, 3)], "B": [(1, 2), (3, 4)]},
    "b": {"A": [(1, 2), (3, 4)], "B": [(1, 2), (3, 4)]},
}


@dataclass(frozen=True)
class SettingOutcomeTable:
    """Joint outcome distribution of four commuting symmetric/antisymmetric tests.

    ``tests`` lists (side, pair); ``probabilities[s]`` is indexed by a tuple of
    four bits, 1 meaning the antisymmetric outcome P_-.
    """

    label: str
    tests: tuple
    probabilities: dict

    def marginal(self, test_indices) -> dict:
        out = {}
        for bits, p in self.probabilities.items():
            key = tuple(bits[i] for i in test_indices)
            out[key] = out.get(key, 0.0) + p
        return out

    def to_dict(self) -> dict:
        return {
            "setting": self.label,
            "tests": [f"P-{side}{i}{j}" for side, (i, j) in self.tests],
            "probabilities": {"".join(map(str, k)): v for k, v in self.probabilities.items()},
        }


def setting_outcome_table(state: BipartiteState, label: str) -> SettingOutcomeTable:
    dA, dB = state.dA, state.dB
    _cap((dA * dB) ** 4)
    tests = tuple(("A", p) for p in SETTINGS[label]["A"]) + tuple(("B", p) for p in SETTINGS[label]["B"])
    swaps = [
        permutation_operator([p], [], dA, dB) if side == "A" else permutation_operator([], [p], dA, dB)
        for side, p in tests
    ]
    # Tr(prod_{c in S} V_c rho^x4) for every subset S
    subset_trace = {}
    for subset in itertools.product((0, 1), repeat=4):
        op = reduce(lambda acc, cv: cv[1] @ acc if cv[0] else acc, zip(subset, swaps), PermutationOperator(dA, dB))
        subset_trace[subset] = op.expectation(state).real
    probs = {}
    for bits in itertools.product((0, 1), repeat=4):
        # prod_c (1 + s_c V_c)/2 with s_c = +1 for the symmetric outcome
        signs = [1 - 2 * b for b in bits]
        total = sum(
            np.prod([signs[c] for c in range(4) if subset[c]]) * tr for subset, tr in subset_trace.items()
        )
        probs[bits] = float(total / 16)
    return SettingOutcomeTable(label, tests, probs)


def recombine_settings(table_a: SettingOutcomeTable, table_b: SettingOutcomeTable, dA: int) -> float:
    """Expectation of W from the two settings, one factor per projector test.

    A pairs (23) in setting a and (34) in setting b carry (dA-2)/dA - 2P_-,
    every other pair carries 1 - 2P_-.
    """
    def value(table):
        total = 0.0
        for (s1, s2, s3, s4), p in table.probabilities.items():
            total += p * (1 - 2 * s1) * ((dA - 2) / dA - 2 * s2) * (1 - 2 * s3) * (1 - 2 * s4)
        return total

    return value(table_a) - value(table_b)


def two_setting_measurement(state: BipartiteState):
    table_a = setting_outcome_table(state, "a")
    table_b = setting_outcome_table(state, "b")
    return table_a, table_b, recombine_settings(table_a, table_b, state.dA)
