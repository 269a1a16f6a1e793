"""Layered qubit-controlled displacement ansatz.

Each layer applies a general rotation to the transmon followed by the
conditional displacement ``Vp(alpha) = exp(sigma_z (x) (alpha a^dag - alpha^* a))``.
A layer carries five real parameters ``[v_r, v_i, theta_x, theta_y, theta_z]``
with ``alpha = v_r + i v_i``.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .fock import FockCutoff, annihilation, kron

__all__ = [
    "PARAMS_PER_LAYER",
    "LayerParams",
    "AnsatzConfig",
    "vp_gate",
    "rotation_gate",
    "qubit_rotation",
    "apply_ansatz",
    "displacement",
    "split_params",
]

PARAMS_PER_LAYER = 5
ALPHA_BOUND = 50.0


class LayerParams(NamedTuple):
    v_r: float
    v_i: float
    theta_x: float
    theta_y: float
    theta_z: float

    @property
    def alpha(self) -> complex:
        return complex(self.v_r, self.v_i)


@dataclass(frozen=True)
class AnsatzConfig:
    """Circuit shape: number of layers, mode truncation and initial basis state.

    ``rotation_order`` lists the axes in the order they act on the qubit; the
    default ``"xyz"`` gives the matrix product ``RZ @ RY @ RX``.
    """

    n_layers: int
    cutoff: FockCutoff
    initial_qubit: int = 0
    initial_mode: int = 0
    rotation_order: str = "xyz"
    # The truncated gate is unitary for any alpha; line searches may probe far out.
    alpha_bound: float = math.inf

    def __post_init__(self):
        if not isinstance(self.cutoff, FockCutoff):
            object.__setattr__(self, "cutoff", FockCutoff(self.cutoff))
        if self.n_layers < 1:
            raise ValueError("n_layers must be >= 1")
        if self.initial_qubit not in (0, 1):
            raise ValueError("initial_qubit must be 0 or 1")
        if not 0 <= self.initial_mode < self.cutoff.n_levels:
            raise ValueError("initial_mode outside the truncated Fock space")
        if sorted(self.rotation_order) != ["x", "y", "z"]:
            raise ValueError("rotation_order must be a permutation of 'xyz'")

    @property
    def n_params(self) -> int:
        return PARAMS_PER_LAYER * self.n_layers

    @property
    def dim(self) -> int:
        return 2 * self.cutoff.n_levels

    def initial_state(self) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.initial_qubit * self.cutoff.n_levels + self.initial_mode] = 1.0
        return psi


def displacement(alpha: complex, cutoff) -> np.ndarray:
    """Truncated displacement ``exp(alpha a^dag - alpha^* a)`` on the mode alone.

    With ``alpha = r e^{i phi}`` the generator is ``R r (a^dag - a) R^dagger``
    for the phase rotation ``R = diag(e^{i n phi})``, so one cached
    eigendecomposition of ``-i (a^dag - a)`` per cutoff serves every alpha.
    """
    n = cutoff.n_levels if isinstance(cutoff, FockCutoff) else int(cutoff)
    w, v = _quadrature_spectrum(n)
    alpha = complex(alpha)
    r = abs(alpha)
    phases = np.exp(1j * cmath.phase(alpha) * np.arange(n))
    rv = phases[:, None] * v
    return (rv * np.exp(1j * r * w)) @ rv.conj().T


@lru_cache(maxsize=None)
def _quadrature_spectrum(n: int):
    a = annihilation(n)
    h = -1j * (a.conj().T - a)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def vp_gate(alpha: complex, cutoff, counter: Counter | None = None,
            bound: float = ALPHA_BOUND) -> np.ndarray:
    """Conditional displacement on the joint space.

    Block diagonal in the qubit z basis: ``D(alpha)`` on qubit ``|0>`` and
    ``D(-alpha)`` on qubit ``|1>``. ``|alpha|`` must stay below ``bound``.
    The blocks come from one N x N exponential since
    ``exp(sigma_z (x) K) = exp(K) (+) exp(-K)`` and ``exp(-K) = exp(K)^dagger``.
    """
    if not isinstance(cutoff, FockCutoff):
        cutoff = FockCutoff(cutoff)
    alpha = complex(alpha)
    if abs(alpha) >= bound:
        raise ValueError(f"|alpha| = {abs(alpha):.3g} exceeds bound {bound}")
    if counter is not None:
        counter["vp"] += 1
    d = displacement(alpha, cutoff)
    n = cutoff.n_levels
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = d
    out[n:, n:] = d.conj().T
    return out


def _axis_rotation(axis: str, theta: float) -> np.ndarray:
    c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[complex(c, -s), 0], [0, complex(c, s)]])


def qubit_rotation(theta_x: float, theta_y: float, theta_z: float, order: str = "xyz") -> np.ndarray:
    """2x2 rotation; axes act in ``order`` (default: RX first, then RY, then RZ)."""
    angles = {"x": theta_x, "y": theta_y, "z": theta_z}
    u = _axis_rotation(order[0], angles[order[0]])
    for axis in order[1:]:
        u = _axis_rotation(axis, angles[axis]) @ u
    return u


def rotation_gate(theta_x, theta_y, theta_z, cutoff, order: str = "xyz",
                  counter: Counter | None = None) -> np.ndarray:
    """``(RZ(theta_z) RY(theta_y) RX(theta_x)) (x) I_N`` with ``RA(t) = exp(-i t/2 sigma_A)``."""
    if not isinstance(cutoff, FockCutoff):
        cutoff = FockCutoff(cutoff)
    if counter is not None:
        counter["rotation"] += 1
    u = qubit_rotation(theta_x, theta_y, theta_z, order)
    return kron(u, np.eye(cutoff.n_levels))


def split_params(params, n_layers: int) -> list[LayerParams]:
    """Interpret a flat real vector (or a sequence of layers) as per-layer parameters."""
    if len(params) and isinstance(params[0], (LayerParams, tuple, list, np.ndarray)):
        layers = [LayerParams(*map(float, p)) for p in params]
    else:
        flat = np.asarray(params, dtype=float).ravel()
        if flat.size != PARAMS_PER_LAYER * n_layers:
            raise ValueError(
                f"expected {PARAMS_PER_LAYER * n_layers} parameters for {n_layers} layers, got {flat.size}"
            )
        layers = [LayerParams(*row) for row in flat.reshape(n_layers, PARAMS_PER_LAYER)]
    if len(layers) != n_layers:
        raise ValueError(f"expected {n_layers} layers, got {len(layers)}")
    return layers


def apply_ansatz(params: Sequence, cfg: AnsatzConfig, counter: Counter | None = None) -> np.ndarray:
    """Joint state after running every layer (rotation, then Vp) on the initial state."""
    layers = split_params(params, cfg.n_layers)
    n = cfg.cutoff.n_levels
    # state held as a (qubit, mode) array; gates act blockwise, equal to the full matrices
    psi = cfg.initial_state().reshape(2, n)
    for layer in layers:
        if counter is not None:
            counter["rotation"] += 1
            counter["vp"] += 1
        alpha = layer.alpha
        if abs(alpha) >= cfg.alpha_bound:
            raise ValueError(f"|alpha| = {abs(alpha):.3g} exceeds bound {cfg.alpha_bound}")
        psi = qubit_rotation(layer.theta_x, layer.theta_y, layer.theta_z, cfg.rotation_order) @ psi
        d = displacement(alpha, cfg.cutoff)
        psi = np.vstack((d @ psi[0], d.conj().T @ psi[1]))
    return psi.ravel()
