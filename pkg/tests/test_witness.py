import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.stats import ortho_group

from discord_witness import errors, qnum, witness
from discord_witness.oracle import classical_quantum_state, random_classical_quantum_state
from discord_witness.qnum import random_state, random_unitary, validate_state
from discord_witness.witness import (
    correlation_matrix,
    discord_lower_bound,
    gell_mann_basis,
    geometric_discord_lower_bound,
    permutation_operator,
    q_value,
    witness_via_permutation,
    witness_via_R,
)

from .conftest import PAULIS, state_corpus

SQRT3 = np.sqrt(3)


def four_copies(rho):
    out = rho
    for _ in range(3):
        out = np.kron(out, rho)
    return out


def three_by_three_classical():
    """Flag states |k> on A with three distinct pure branches on B."""
    kets = [np.array([1, 0, 0]), np.array([0, 1, 0]), np.array([1, 1, 1]) / np.sqrt(3)]
    branches = [np.outer(k, k.conj()) for k in kets]
    return classical_quantum_state([0.5, 0.3, 0.2], np.eye(3), branches)


class TestGellMann:
    def test_qubit(self):
        g = gell_mann_basis(2).observables
        expected = [np.eye(2)] + list(PAULIS)
        for gi, e in zip(g, expected):
            assert_allclose(gi, e / np.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_orthonormal_hermitian_traceless(self, d):
        basis = gell_mann_basis(d)
        assert len(basis) == d * d
        assert_allclose(basis.gram(), np.eye(d * d), atol=1e-14)
        for i, g in enumerate(basis.observables):
            assert_allclose(g, g.conj().T, atol=1e-12)
            if i:
                assert abs(np.trace(g)) <= 1e-12

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_completeness_gives_swap(self, d):
        g = gell_mann_basis(d).observables
        total = sum(np.kron(gi, gi) for gi in g)
        assert np.max(np.abs(total - witness.swap_operator(d))) <= 1e-12

    def test_d1_rejected(self):
        with pytest.raises(ValueError):
            gell_mann_basis(1)


class TestCorrelationMatrix:
    def test_product_with_maximally_mixed_a(self):
        rho_b = random_state(3, 1, seed=2).rho
        s = validate_state(np.kron(np.eye(2) / 2, rho_b), 2, 3)
        assert_allclose(correlation_matrix(s).entries, 0, atol=1e-15)

    def test_bell_against_pauli_expectations(self, bell):
        cm = correlation_matrix(bell)
        direct = np.array([[np.trace(bell.rho @ np.kron(p, q)).real / 2 for q in PAULIS] for p in PAULIS])
        assert_allclose(cm.T, direct, atol=1e-15)
        assert_allclose(cm.T, np.diag([1, -1, 1]) / 2, atol=1e-15)
        assert_allclose(cm.x, 0, atol=1e-15)
        assert_allclose(cm.y, 0, atol=1e-15)

    def test_classical_quantum_rank_one(self):
        for seed in range(10):
            s = random_classical_quantum_state(2, 3, seed=seed)
            assert correlation_matrix(s).rank() <= 1

    def test_three_by_three_classical_rank_two(self):
        assert correlation_matrix(three_by_three_classical()).rank() == 2

    def test_maximally_mixed_rank_zero(self, mixed22):
        assert correlation_matrix(mixed22).rank() == 0

    @pytest.mark.parametrize("state", state_corpus(per_shape=3, seed=5), ids=lambda s: f"{s.dA}x{s.dB}")
    def test_reconstruction_and_trace_identity(self, state):
        cm = correlation_matrix(state)
        rho_b = qnum.partial_trace(state, "B")
        assert np.max(np.abs(witness.reconstruct_from_R(cm, rho_b) - state.rho)) <= 1e-10
        assert np.trace(cm.gram()) == pytest.approx(witness.tilde_purity(state), abs=1e-10)


class TestWitnessValues:
    def test_maximally_mixed(self, mixed22):
        assert witness_via_R(mixed22) == pytest.approx(0, abs=1e-15)
        assert witness_via_permutation(mixed22) == pytest.approx(0, abs=1e-15)

    def test_bell(self, bell):
        assert witness_via_R(bell) == pytest.approx(-3 / 8, abs=1e-12)
        assert witness_via_permutation(bell) == pytest.approx(-3 / 8, abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.5, 0.8, 1.0])
    def test_werner(self, p):
        s = qnum.werner_state(p)
        assert witness_via_R(s) == pytest.approx(-3 * p**4 / 8, abs=1e-12)
        assert witness_via_permutation(s) == pytest.approx(-3 * p**4 / 8, abs=1e-12)

    def test_classical_quantum_qubit_is_zero(self):
        for seed in range(20):
            s = random_classical_quantum_state(2, 2 + seed % 2, seed=seed)
            assert abs(witness_via_permutation(s)) <= 1e-10

    def test_three_by_three_classical_is_negative(self):
        s = three_by_three_classical()
        w = witness_via_permutation(s)
        assert w < -1e-6
        assert witness_via_R(s) == pytest.approx(w, abs=1e-12)

    def test_explicit_w_matrix(self):
        # dense W against the dense four-copy state
        s = random_state(2, 2, seed=17)
        wmat = witness.witness_matrix(2, 2)
        assert_allclose(wmat, wmat.T)
        val = np.trace(wmat @ four_copies(s.rho))
        assert val.real == pytest.approx(witness_via_R(s), abs=1e-12)
        assert abs(val.imag) < 1e-14

    def test_permutation_route_size_cap(self):
        s = random_state(4, 3, seed=0)
        with pytest.raises(errors.SizeOverflow):
            witness_via_permutation(s)


class TestPermutationOperator:
    def test_swap_trick(self):
        s = random_state(2, 2, seed=3)
        v = permutation_operator([(1, 2)], [(1, 2)], 2, 2)
        assert v.expectation(s).real == pytest.approx(qnum.purity(s.rho), abs=1e-14)
        dense = np.trace(v.matrix @ four_copies(s.rho))
        assert dense.real == pytest.approx(qnum.purity(s.rho), abs=1e-14)

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3)])
    def test_witness_operators_unitary_hermitian(self, dims):
        for u in witness.witness_operators(*dims):
            m = u.matrix
            assert set(np.unique(m)) <= {0.0, 1.0}
            assert_allclose(m.T @ m, np.eye(m.shape[0]))
            assert_allclose(m, m.T)

    def test_contraction_matches_dense(self):
        s = random_state(2, 2, seed=8)
        x = four_copies(s.rho)
        ops = witness.witness_operators(2, 2)
        ops.append(ops[0] @ ops[1] @ ops[2])  # not an involution
        for u in ops:
            assert u.expectation(s) == pytest.approx(np.trace(u.matrix @ x), abs=1e-14)

    def test_composition_and_adjoint(self):
        u1, u2, *_ = witness.witness_operators(2, 2)
        p = u2 @ u1
        assert_allclose(p.matrix, u2.matrix @ u1.matrix)
        assert_allclose(p.adjoint().matrix, p.matrix.T)

    @pytest.mark.parametrize("pairs", [[(1, 1)], [(1, 2), (2, 3)], [(0, 1)]])
    def test_bad_pairs(self, pairs):
        with pytest.raises(ValueError):
            permutation_operator(pairs, [], 2, 2)

    def test_dqc1_u2_trace(self):
        from discord_witness.dqc1 import Dqc1Config, dqc1_output_state

        n, alpha = 1, 0.7
        u = random_unitary(2, seed=4)
        s = dqc1_output_state(Dqc1Config(n, alpha, u))
        expected = (2 ** (2 * n + 3) + 8 * alpha**2 * abs(np.trace(u)) ** 2) / 2 ** (4 * n + 4)
        u2 = permutation_operator(*witness.U_SWAPS["U2"], 2, 2)
        assert u2.expectation(s).real == pytest.approx(expected, abs=1e-14)


class TestQAndBounds:
    def test_q_maximally_mixed(self, mixed22):
        assert q_value(mixed22, 0.0) == pytest.approx(0.25)

    def test_q_bell(self, bell):
        assert q_value(bell, witness_via_R(bell)) == pytest.approx(0.25 + SQRT3 / 4, abs=1e-12)
        assert q_value(bell, witness_via_R(bell)) == pytest.approx(0.6830, abs=1e-4)

    def test_negative_radicand(self, mixed22):
        with pytest.raises(errors.NegativeRadicand):
            q_value(mixed22, -1e-6)

    def test_radicand_roundoff_clamped(self, mixed22):
        assert q_value(mixed22, -5e-11) == pytest.approx(0.25)

    def test_discord_bound_values(self, bell, mixed22):
        assert discord_lower_bound(mixed22) == 0
        expected = 1 - np.log2(0.5 + SQRT3 / 2)
        assert discord_lower_bound(bell) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.5500, abs=1e-4)

    def test_geometric_bound_values(self, bell, mixed22):
        assert geometric_discord_lower_bound(mixed22) == pytest.approx(0, abs=1e-15)
        assert geometric_discord_lower_bound(bell) == pytest.approx(1 - (0.25 + SQRT3 / 4), abs=1e-12)

    def test_bounds_vanish_on_classical_quantum(self):
        for seed in range(20):
            s = random_classical_quantum_state(2, 2, seed=seed)
            assert discord_lower_bound(s) == 0
            assert geometric_discord_lower_bound(s) == pytest.approx(0, abs=1e-12)


class TestReport:
    @pytest.mark.parametrize("route", list(witness.Route))
    def test_routes(self, bell, route):
        rep = witness.witness_report(bell, route)
        assert rep.route is route
        assert rep.witness_value == pytest.approx(-3 / 8, abs=1e-9)
        assert rep.q > 0
        assert rep.rank_r == 3
        d = rep.to_dict()
        assert d["route"] == route.value
        assert set(d) >= {"witnessValue", "q", "discordLowerBound", "geoDiscordLowerBound", "rankR"}

    def test_unknown_route(self, bell):
        with pytest.raises(ValueError):
            witness.witness_report(bell, "tomography")


# ---------------------------------------------------------------------------
# properties

shape = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)])


def _state(shape, seed, rank_draw):
    dA, dB = shape
    return random_state(dA, dB, 1 + rank_draw % (dA * dB), seed=seed)


@settings(max_examples=80, deadline=None)
@given(shape=shape, seed=st.integers(0, 2**32 - 1), r=st.integers(0, 100))
def test_non_positive_and_routes_agree(shape, seed, r):
    s = _state(shape, seed, r)
    w = witness_via_R(s)
    assert w <= witness.WITNESS_TOL
    assert abs(w - witness_via_permutation(s)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(shape=shape, seed=st.integers(0, 2**32 - 1))
def test_local_unitary_invariance(shape, seed):
    rng = np.random.default_rng(seed)
    s = random_state(*shape, seed=rng)
    u = np.kron(random_unitary(shape[0], rng), random_unitary(shape[1], rng))
    t = validate_state(u @ s.rho @ u.conj().T, *shape)
    assert witness_via_R(t) == pytest.approx(witness_via_R(s), abs=1e-9)
    assert witness_via_permutation(t) == pytest.approx(witness_via_permutation(s), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(shape=shape, seed=st.integers(0, 2**32 - 1))
def test_basis_independence(shape, seed):
    dA, dB = shape
    s = random_state(dA, dB, seed=seed)
    ba = gell_mann_basis(dA).rotated(ortho_group.rvs(dA * dA - 1, random_state=seed % 2**31))
    bb = gell_mann_basis(dB).rotated(ortho_group.rvs(dB * dB - 1, random_state=(seed + 1) % 2**31))
    assert_allclose(ba.gram(), np.eye(dA * dA), atol=1e-12)
    assert witness_via_R(s, ba, bb) == pytest.approx(witness_via_R(s), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(shape=shape, seed=st.integers(0, 2**32 - 1), r=st.integers(0, 100))
def test_radicand_identity(shape, seed, r):
    s = _state(shape, seed, r)
    k = correlation_matrix(s).gram()
    radicand = witness_via_R(s) + witness.tilde_purity(s) ** 2
    assert radicand == pytest.approx(np.trace(k @ k), abs=1e-10)
    assert radicand >= -1e-10


def _dephase(rho, dA, dB, projectors):
    return sum(np.kron(p, np.eye(dB)) @ rho @ np.kron(p, np.eye(dB)) for p in projectors)


@pytest.mark.parametrize("seed", range(12))
def test_zero_witness_states_are_dephasing_invariant(seed):
    # rank(R) <= 1 and zero witness: rho is fixed by the eigenbasis of sum_i alpha_i A_i
    dA, dB = [(2, 2), (2, 3), (3, 2), (3, 3)][seed % 4]
    rng = np.random.default_rng(seed)
    if seed % 3 == 0:
        s = qnum.maximally_mixed(dA, dB)
    else:
        psi = random_unitary(dA, rng)[:, 0]
        p = rng.uniform(0.1, 0.9)
        other = np.eye(dA) - np.outer(psi, psi.conj())
        sigma = p * np.outer(psi, psi.conj()) + (1 - p) * other / (dA - 1)
        # single-term correlations: sigma x tau mixed with I/dA x tau'
        tau, tau2 = random_state(dB, 1, seed=rng).rho, random_state(dB, 1, seed=rng).rho
        s = validate_state(0.6 * np.kron(sigma, tau) + 0.4 * np.kron(np.eye(dA) / dA, tau2), dA, dB)
    cm = correlation_matrix(s)
    assert abs(witness_via_R(s)) <= 1e-12
    assert cm.rank() <= 1
    u, sv, _ = np.linalg.svd(cm.entries)
    alpha = u[:, 0] * (sv[0] if sv.size else 0)
    obs = np.einsum("i,iab->ab", alpha, gell_mann_basis(dA).observables[1:])
    _, vecs = np.linalg.eigh(obs)
    projectors = [np.outer(v, v.conj()) for v in vecs.T]
    rebuilt = witness.reconstruct_from_R(cm, qnum.partial_trace(s, "B"))
    assert np.max(np.abs(_dephase(rebuilt, dA, dB, projectors) - rebuilt)) <= 1e-8
