import numpy as np
import pytest

from discord_witness import qnum

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


@pytest.fixture
def bell():
    return qnum.bell_state()


@pytest.fixture
def mixed22():
    return qnum.maximally_mixed(2, 2)


def state_corpus(shapes=((2, 2), (2, 3), (3, 2), (3, 3)), per_shape=5, seed=0):
    """Random states of mixed rank over several shapes."""
    rng = np.random.default_rng(seed)
    out = []
    for dA, dB in shapes:
        for _ in range(per_shape):
            rank = int(rng.integers(1, dA * dB + 1))
            out.append(qnum.random_state(dA, dB, rank, seed=rng))
    return out
