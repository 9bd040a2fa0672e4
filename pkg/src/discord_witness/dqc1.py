"""One-clean-qubit (DQC1) output state and its closed-form witness values.

The control qubit is subsystem A; the n-qubit register is subsystem B.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotUnitary, ParseError, RegimeViolation
from .qnum import BipartiteState, as_matrix, partial_trace, random_unitary, validate_state

UNITARY_TOL = 1e-10
REGIME_TOL = 1e-9


@dataclass(frozen=True)
class Dqc1Config:
    n: int
    alpha: float
    unitary: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = as_matrix(self.unitary)
        if self.n < 1 or u.shape != (2**self.n, 2**self.n):
            raise NotUnitary(f"unitary shape {u.shape} does not match n={self.n}")
        err = float(np.max(np.abs(u.conj().T @ u - np.eye(2**self.n))))
        if err > UNITARY_TOL:
            raise NotUnitary(f"max |U^dag U - I| = {err:.3e}", magnitude=err)
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        object.__setattr__(self, "unitary", u)

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.unitary))

    @property
    def trace_of_square(self) -> complex:
        return complex(np.trace(self.unitary @ self.unitary))


def dqc1_output_state(cfg: Dqc1Config) -> BipartiteState:
    """2^{-(n+1)} [[I, alpha U^dag], [alpha U, I]]."""
    d = cfg.dim
    u = cfg.unitary
    rho = np.block([[np.eye(d), cfg.alpha * u.conj().T], [cfg.alpha * u, np.eye(d)]]) / (2 * d)
    return validate_state(rho, 2, d)


def dqc1_witness_closed_form(cfg: Dqc1Config) -> float:
    d = cfg.dim
    return cfg.alpha**4 / (2 * d * d * 4) * (abs(cfg.trace_of_square / d) ** 2 - 1)


def dqc1_u_traces_closed_form(cfg: Dqc1Config) -> np.ndarray:
    """Tr(U_i rho_out^{x4}) for i = 1..4 from |Tr U|, |Tr U^2| and alpha."""
    d2 = cfg.dim**2  # 2^{2n}
    a = cfg.alpha
    t1, t2 = abs(cfg.trace) ** 2, abs(cfg.trace_of_square) ** 2
    norm = 16 * d2 * d2  # 2^{4n+4}
    return np.array([
        4 * d2 + 8 * a**2 * t1 + 2 * a**4 * t2 + 2 * d2 * a**4,
        8 * d2 + 8 * a**2 * t1,
        4 * d2 + 8 * d2 * a**2 + 4 * d2 * a**4,
        8 * d2 + 8 * d2 * a**2,
    ]) / norm


def in_bound_regime(cfg: Dqc1Config) -> bool:
    return abs(cfg.trace) <= REGIME_TOL and abs(cfg.alpha - 1) <= REGIME_TOL


def dqc1_discord_bound(cfg: Dqc1Config, witness_value: float | None = None) -> float:
    """1 - log2(1 + sqrt(2^{2n+2} w + 1)), valid for Tr U = 0 and alpha = 1."""
    if abs(cfg.trace) > REGIME_TOL:
        raise RegimeViolation(f"bound requires Tr U = 0, got |Tr U| = {abs(cfg.trace):.3e}")
    if abs(cfg.alpha - 1) > REGIME_TOL:
        raise RegimeViolation(f"bound requires alpha = 1, got {cfg.alpha}")
    w = dqc1_witness_closed_form(cfg) if witness_value is None else witness_value
    radicand = max(4 * cfg.dim**2 * w + 1, 0.0)
    return max(0.0, 1 - float(np.log2(1 + np.sqrt(radicand))))


def normalized_trace(cfg: Dqc1Config):
    """tau = Tr U / 2^n together with (<sx>, <sy>) of the control qubit in rho_out.

    The expectation values equal ``alpha * (Re tau, Im tau)``.
    """
    tau = cfg.trace / cfg.dim
    rho_a = partial_trace(dqc1_output_state(cfg), "A")
    sx = float(2 * rho_a[0, 1].real)
    sy = float(-2 * rho_a[0, 1].imag)
    return tau, (sx, sy)


def square_phase_fit(cfg: Dqc1Config):
    """Best-fit phase phi = arg Tr(U^2) (0 when Tr U^2 = 0) and ||U^2 - e^{i phi} I||_max."""
    t2 = cfg.trace_of_square
    phi = float(np.angle(t2)) if abs(t2) > REGIME_TOL else 0.0
    u2 = cfg.unitary @ cfg.unitary
    return phi, float(np.max(np.abs(u2 - np.exp(1j * phi) * np.eye(cfg.dim))))


# ---------------------------------------------------------------------------
# named unitaries


def _hadamard_tensor(n: int) -> np.ndarray:
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    out = np.ones((1, 1))
    for _ in range(n):
        out = np.kron(out, h)
    return out


def _fourier(d: int) -> np.ndarray:
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def named_unitary(spec: str, n: int) -> np.ndarray:
    """``identity``, ``hadamard``/``hadamard-tensor``, ``fourier``, ``pauli-z``,
    ``random:SEED`` or ``diag:DEG,DEG,...`` (phases in degrees)."""
    d = 2**n
    name, _, arg = spec.partition(":")
    if name == "identity":
        return np.eye(d, dtype=complex)
    if name in ("hadamard", "hadamard-tensor"):
        return _hadamard_tensor(n).astype(complex)
    if name == "fourier":
        return _fourier(d)
    if name == "pauli-z":
        return np.diag([(-1) ** bin(k).count("1") for k in range(d)]).astype(complex)
    if name == "random":
        try:
            return random_unitary(d, int(arg))
        except ValueError as exc:
            raise ParseError(f"bad random seed in {spec!r}") from exc
    if name == "diag":
        try:
            phases = [float(x) for x in arg.split(",")]
        except ValueError as exc:
            raise ParseError(f"bad phase list in {spec!r}") from exc
        if len(phases) != d:
            raise ParseError(f"{spec!r} gives {len(phases)} phases, need {d}")
        # exact values at multiples of 90 degrees keep closed forms exact
        return np.diag([_unit_phase(p) for p in phases])
    raise ParseError(f"unknown unitary {spec!r}")


def _unit_phase(degrees: float) -> complex:
    quarter = {0: 1, 1: 1j, 2: -1, 3: -1j}
    if degrees % 90 == 0:
        return complex(quarter[int(degrees // 90) % 4])
    return complex(np.exp(1j * np.deg2rad(degrees)))
