"""Swap-test objective with ideal and shot-sampled evaluation.

The objective seen by an optimizer is ``1 - sqrt(2 (max(p0, floor) - 0.5))``
where ``p0 = 0.5 + 0.5 F`` is the swap-test ancilla probability and ``F``
the fidelity between the learned qumode and the target.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .ansatz import AnsatzConfig, apply_ansatz
from .fock import DimensionError, kron, partial_trace_qubit

__all__ = [
    "ObjectiveConfig",
    "EvalRecord",
    "Objective",
    "fidelity",
    "swap_test_p0",
    "objective_from_p0",
    "evaluate",
    "swap_circuit_oracle",
    "write_eval_log",
    "DEFAULT_SHOTS",
]

DEFAULT_SHOTS = 6144
ORACLE_MAX_CUTOFF = 8

Purpose = Literal["objective", "gradient_probe"]


@dataclass
class ObjectiveConfig:
    ansatz: AnsatzConfig
    target: np.ndarray
    mode: str = "ideal"
    shots: int = DEFAULT_SHOTS
    clamp_floor: float = 0.5

    def __post_init__(self):
        if self.mode not in ("ideal", "sampled"):
            raise ValueError(f"mode must be 'ideal' or 'sampled', got {self.mode!r}")
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode needs shots >= 1")
        if not 0.0 <= self.clamp_floor <= 1.0:
            raise ValueError("clamp_floor must lie in [0, 1]")
        self.target = np.asarray(self.target, dtype=complex).ravel()
        if self.target.size != self.ansatz.cutoff.n_levels:
            raise DimensionError(
                f"target has {self.target.size} amplitudes, cutoff is {self.ansatz.cutoff.n_levels}"
            )


@dataclass
class EvalRecord:
    call_index: int
    params: np.ndarray
    p0: float
    objective: float
    true_infidelity: float
    purpose: str = "objective"


def fidelity(params, cfg: ObjectiveConfig) -> float:
    """``<target| rho_mode |target>`` with the ansatz qubit traced out."""
    psi = apply_ansatz(params, cfg.ansatz)
    rho = partial_trace_qubit(psi, cfg.ansatz.cutoff)
    t = cfg.target
    f = float(np.real(t.conj() @ rho @ t))
    return min(max(f, 0.0), 1.0)


def swap_test_p0(fid: float) -> float:
    if not -1e-12 <= fid <= 1.0 + 1e-12:
        raise ValueError(f"fidelity {fid} outside [0, 1]")
    return 0.5 + 0.5 * min(max(fid, 0.0), 1.0)


def objective_from_p0(p0: float, clamp_floor: float = 0.5) -> float:
    """Square-root transformed swap-test result, clamped below at ``clamp_floor``."""
    p = max(float(p0), clamp_floor, 0.5)
    return 1.0 - math.sqrt(min(2.0 * (p - 0.5), 1.0))


def evaluate(params, cfg: ObjectiveConfig, rng: np.random.Generator | None = None,
             *, call_index: int = 0, purpose: Purpose = "objective") -> EvalRecord:
    params = np.array(params, dtype=float).ravel()
    fid = fidelity(params, cfg)
    p_exact = swap_test_p0(fid)
    if cfg.mode == "sampled":
        if rng is None:
            raise ValueError("sampled evaluation requires an rng")
        p0 = rng.binomial(cfg.shots, p_exact) / cfg.shots
    else:
        p0 = p_exact
    return EvalRecord(
        call_index=call_index,
        params=params,
        p0=float(p0),
        objective=objective_from_p0(p0, cfg.clamp_floor),
        true_infidelity=1.0 - math.sqrt(fid),
        purpose=purpose,
    )


class Objective:
    """Callable objective owning its rng stream and evaluation log.

    Optimizers call ``f(x)`` for objective values and ``f(x, "gradient_probe")``
    for finite-difference probes; both are appended to :attr:`log`.
    """

    tracks_purpose = True

    def __init__(self, cfg: ObjectiveConfig, rng: np.random.Generator | None = None,
                 keep_params: bool = False):
        if cfg.mode == "sampled" and rng is None:
            raise ValueError("sampled evaluation requires an rng")
        self.cfg = cfg
        self.rng = rng
        self.keep_params = keep_params
        self.log: list[EvalRecord] = []

    def __call__(self, x, purpose: Purpose = "objective") -> float:
        rec = evaluate(x, self.cfg, self.rng, call_index=len(self.log), purpose=purpose)
        if not self.keep_params:
            rec.params = None
        self.log.append(rec)
        return rec.objective

    def true_infidelity(self, x) -> float:
        """Ideal infidelity ``1 - sqrt(F)``; not logged."""
        return 1.0 - math.sqrt(fidelity(x, self.cfg))

    def counts(self) -> dict:
        probes = sum(r.purpose == "gradient_probe" for r in self.log)
        return {"objective": len(self.log) - probes, "gradient_probe": probes, "total": len(self.log)}


def write_eval_log(log, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["call_index", "purpose", "p0", "objective", "true_infidelity"])
        for r in log:
            w.writerow([r.call_index, r.purpose, repr(r.p0), repr(r.objective), repr(r.true_infidelity)])


def swap_circuit_oracle(state_a, state_b) -> float:
    """P(ancilla = 0) from an explicit H / controlled-SWAP / H circuit on two modes.

    Builds the full ``2 N^2`` dimensional register, so it is only meant for
    small cutoffs in tests.
    """
    a = np.asarray(state_a, dtype=complex).ravel()
    b = np.asarray(state_b, dtype=complex).ravel()
    n = a.size
    if b.size != n:
        raise DimensionError("states must share a cutoff")
    if n > ORACLE_MAX_CUTOFF:
        raise DimensionError(f"oracle cutoff {n} exceeds {ORACLE_MAX_CUTOFF}")
    swap = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            swap[j * n + i, i * n + j] = 1.0
    p_anc0 = np.diag([1.0, 0.0])
    p_anc1 = np.diag([0.0, 1.0])
    cswap = kron(p_anc0, np.eye(n * n)) + kron(p_anc1, swap)
    had = kron(np.array([[1, 1], [1, -1]]) / np.sqrt(2), np.eye(n * n))
    psi = np.kron(np.array([1.0, 0.0]), np.kron(a, b))
    psi = had @ (cswap @ (had @ psi))
    return float(np.sum(np.abs(psi[: n * n]) ** 2))
