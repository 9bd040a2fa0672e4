"""Dense linear-algebra substrate: states, tensor products, partial traces,
entropies and seeded random generation.

Matrices are plain complex ``numpy.ndarray`` objects. A bipartite state is
stored with subsystem A as the leading tensor factor, so the row index of
``rho`` is ``a * dB + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadRank,
    DimensionMismatch,
    NotDensityMatrix,
    NotHermitian,
    NotPositive,
    SizeOverflow,
    TraceNotOne,
    ValidationError,
)


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-9
    trace: float = 1e-9
    psd: float = 1e-9
    spec: float = 1e-12
    # total negative eigenvalue mass that may be clamped away instead of rejected
    clamp: float = 1e-7
    kron_cap: int = 2**14

    def override(self, **kwargs) -> "Tolerances":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


DEFAULT_TOL = Tolerances()


def _tol(tol):
    return DEFAULT_TOL if tol is None else tol


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BipartiteState:
    """Validated density matrix on a dA x dB system. Build via :func:`validate_state`."""

    dA: int
    dB: int
    rho: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.dA * self.dB

    def tensor(self) -> np.ndarray:
        """``rho`` reshaped to ``[a, b, a', b']``."""
        return self.rho.reshape(self.dA, self.dB, self.dA, self.dB)

    def swapped(self) -> "BipartiteState":
        """The same state with the roles of A and B exchanged."""
        t = self.tensor().transpose(1, 0, 3, 2).reshape(self.dim, self.dim)
        return BipartiteState(self.dB, self.dA, _frozen(t))


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(raw) -> np.ndarray:
    m = np.asarray(raw, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def spectral_decomposition(m) -> SpectralDecomposition:
    m = as_matrix(m)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(w)[::-1]
    return SpectralDecomposition(w[order], v[:, order])


def hermiticity_error(m) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def validate_state(raw, dA: int, dB: int, tol: Tolerances | None = None) -> BipartiteState:
    """Check ``raw`` is a density matrix on a ``dA x dB`` system.

    Small negative eigenvalues (total mass below ``tol.clamp``) are clamped to
    zero and the spectrum renormalized; anything larger is rejected.
    """
    tol = _tol(tol)
    m = as_matrix(raw)
    n = dA * dB
    if dA < 1 or dB < 1 or m.shape != (n, n):
        raise DimensionMismatch(
            f"matrix shape {m.shape} does not match dims ({dA}, {dB})", magnitude=m.shape
        )
    herr = hermiticity_error(m)
    if herr > tol.herm:
        raise NotHermitian(f"max |rho - rho^dag| = {herr:.3e}", magnitude=herr)
    m = (m + m.conj().T) / 2
    tr = float(np.trace(m).real)
    if abs(tr - 1) > tol.trace:
        raise TraceNotOne(f"trace = {tr!r}", magnitude=abs(tr - 1))
    w, v = np.linalg.eigh(m)
    negative_mass = float(-w[w < 0].sum())
    if negative_mass >= tol.clamp:
        raise NotPositive(
            f"negative eigenvalue mass {negative_mass:.3e} (min {w.min():.3e})",
            magnitude=negative_mass,
        )
    if w.min() < -tol.psd:
        w = np.clip(w, 0.0, 1.0)
        w = w / w.sum()
        m = (v * w) @ v.conj().T
    return BipartiteState(dA, dB, _frozen(m))


def partial_trace(state: BipartiteState, keep: str) -> np.ndarray:
    """Reduced density matrix of subsystem ``keep`` (``"A"`` or ``"B"``)."""
    t = state.tensor()
    if keep == "A":
        return np.einsum("abcb->ac", t)
    if keep == "B":
        return np.einsum("abad->bd", t)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def kron(a, b, cap: int | None = None) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    cap = DEFAULT_TOL.kron_cap if cap is None else cap
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise SizeOverflow(f"kron result {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def _entropy_from_spectrum(w, eps: float) -> float:
    w = w[w > eps]
    return float(-np.sum(w * np.log2(w))) if w.size else 0.0


def von_neumann_entropy(m, tol: Tolerances | None = None) -> float:
    """S(m) = -Tr m log2 m in bits."""
    tol = _tol(tol)
    m = as_matrix(m)
    if m.shape[0] != m.shape[1] or hermiticity_error(m) > tol.herm:
        raise NotDensityMatrix("entropy needs a square Hermitian matrix")
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if abs(w.sum() - 1) > tol.trace or w.min() < -tol.psd:
        raise NotDensityMatrix(f"trace {w.sum():.6g}, min eigenvalue {w.min():.3e}")
    return max(0.0, _entropy_from_spectrum(w, tol.spec))


def purity(m, tol: Tolerances | None = None) -> float:
    tol = _tol(tol)
    m = as_matrix(m)
    p = np.einsum("ij,ji->", m, m)
    if abs(p.imag) > tol.herm:
        raise NotHermitian(f"Tr(m^2) has imaginary part {p.imag:.3e}", magnitude=abs(p.imag))
    return float(p.real)


def _rng(seed):
    return np.random.default_rng(seed)


def ginibre(rows: int, cols: int, rng) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar unitary from QR of a Ginibre matrix, with R's diagonal made positive."""
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else _rng(seed)
    q, r = np.linalg.qr(ginibre(d, d, rng))
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_state(dA: int, dB: int, rank: int | None = None, seed=None) -> BipartiteState:
    """Reduced state of a Haar-random purification with a ``rank``-dim environment."""
    n = dA * dB
    rank = n if rank is None else rank
    if not 1 <= rank <= n:
        raise BadRank(f"rank must lie in [1, {n}], got {rank}", magnitude=rank)
    rng = seed if isinstance(seed, np.random.Generator) else _rng(seed)
    g = ginibre(n, rank, rng)
    rho = g @ g.conj().T
    return validate_state(rho / np.trace(rho).real, dA, dB)


def product_state(sigma, tau) -> BipartiteState:
    sigma, tau = as_matrix(sigma), as_matrix(tau)
    return validate_state(np.kron(sigma, tau), sigma.shape[0], tau.shape[0])


def maximally_mixed(dA: int, dB: int) -> BipartiteState:
    n = dA * dB
    return validate_state(np.eye(n) / n, dA, dB)


def bell_state() -> BipartiteState:
    """|Phi+><Phi+| with |Phi+> = (|00> + |11>)/sqrt(2)."""
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return validate_state(np.outer(psi, psi.conj()), 2, 2)


def werner_state(p: float) -> BipartiteState:
    """p |Phi+><Phi+| + (1 - p) I/4."""
    return validate_state(p * bell_state().rho + (1 - p) * np.eye(4) / 4, 2, 2)
