"""Dense linear algebra on the truncated qubit-qumode Hilbert space.

Operators are plain complex ``numpy`` arrays. Joint states are ordered
qubit first, qumode second, so basis index ``q * N + n`` labels qubit state
``q`` and Fock level ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FockCutoff",
    "GeneratorError",
    "DimensionError",
    "MAX_DIM",
    "annihilation",
    "creation",
    "kron",
    "expm_anti_hermitian",
    "partial_trace_qubit",
    "is_unitary",
]

#: Largest operator dimension ``kron`` will build before assuming misconfiguration.
MAX_DIM = 4096


class GeneratorError(ValueError):
    """Raised when a matrix exponential is requested for a non anti-Hermitian generator."""


class DimensionError(ValueError):
    """Raised on incompatible or oversized dimensions."""


@dataclass(frozen=True)
class FockCutoff:
    """Truncation of a bosonic mode to Fock levels ``0 .. n_levels - 1``."""

    n_levels: int

    def __post_init__(self):
        if int(self.n_levels) != self.n_levels or self.n_levels < 2:
            raise ValueError(f"n_levels must be an integer >= 2, got {self.n_levels!r}")
        object.__setattr__(self, "n_levels", int(self.n_levels))

    def __int__(self):
        return self.n_levels


def _levels(cutoff) -> int:
    if isinstance(cutoff, FockCutoff):
        return cutoff.n_levels
    return FockCutoff(cutoff).n_levels


def annihilation(cutoff) -> np.ndarray:
    """Truncated annihilation operator with ``a[n-1, n] = sqrt(n)``."""
    n = _levels(cutoff)
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def creation(cutoff) -> np.ndarray:
    return annihilation(cutoff).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b`` with a guard on the resulting size."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > MAX_DIM:
        raise DimensionError(f"kron result {rows}x{cols} exceeds MAX_DIM={MAX_DIM}")
    return np.kron(a, b)


def expm_anti_hermitian(g, atol: float = 1e-8) -> np.ndarray:
    """Unitary ``exp(G)`` for anti-Hermitian ``G``.

    Uses the eigendecomposition of the Hermitian matrix ``H = -iG`` so that
    ``exp(G) = V diag(exp(i w)) V^dagger`` is unitary to machine precision.

    Raises
    ------
    GeneratorError
        If ``max|G + G^dagger| > atol`` or ``G`` is not square.
    """
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise GeneratorError(f"generator must be square, got shape {g.shape}")
    if np.max(np.abs(g + g.conj().T), initial=0.0) > atol:
        raise GeneratorError("generator is not anti-Hermitian")
    h = -1j * g
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def partial_trace_qubit(psi, cutoff) -> np.ndarray:
    """Reduced qumode density matrix of a joint qubit (x) mode pure state."""
    n = _levels(cutoff)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != 2 * n:
        raise DimensionError(f"state has dimension {psi.size}, expected {2 * n}")
    blocks = psi.reshape(2, n)
    rho = blocks.T @ blocks.conj()
    return 0.5 * (rho + rho.conj().T)


def is_unitary(u, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= atol)
