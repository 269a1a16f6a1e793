"""Shared plumbing for the optimizers: specs, results and evaluation accounting."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "KINDS",
    "DERIVATIVE_FREE",
    "GRADIENT_BASED",
    "OptimizerSpec",
    "OptResult",
    "Termination",
    "OptimizationAborted",
    "EvalBudgetExhausted",
    "TrackedFunction",
    "central_fd_gradient",
]

KINDS = ("spsa", "nelder_mead", "powell", "cobyla", "cg", "lbfgs")
DERIVATIVE_FREE = ("nelder_mead", "powell", "cobyla")
GRADIENT_BASED = ("cg", "lbfgs")

_ALIASES = {
    "nelder-mead": "nelder_mead",
    "neldermead": "nelder_mead",
    "nm": "nelder_mead",
    "l-bfgs": "lbfgs",
    "l-bfgs-b": "lbfgs",
    "lbfgsb": "lbfgs",
    "l_bfgs": "lbfgs",
}

# Per-kind knob defaults; anything here may be overridden through ``OptimizerSpec.options``.
DEFAULT_OPTIONS = {
    "spsa": {"a": 1.0, "c": 0.1, "A": 100.0, "alpha_exp": 0.602, "gamma_exp": 0.101,
             "first_step": 0.1},
    "nelder_mead": {"reflect": 1.0, "expand": 2.0, "contract": 0.5, "shrink": 0.5,
                    "nonzdelt": 0.05, "zdelt": 0.00025},
    "powell": {"xtol": 1e-4},
    "cobyla": {"rhobeg": 1.0},
    "cg": {"gtol": 1e-5, "c1": 1e-4, "backtrack": 0.5, "max_backtracks": 30},
    "lbfgs": {"gtol": 1e-5, "c1": 1e-4, "backtrack": 0.5, "max_backtracks": 30, "memory": 10},
}


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    GRADIENT_SMALL = "gradient_small"
    ITERATION_CAP = "iteration_cap"
    EVAL_CAP = "eval_cap"
    LINE_SEARCH_FAILED = "line_search_failed"


class OptimizationAborted(RuntimeError):
    """The objective returned a non-finite value; the run cannot continue."""


class EvalBudgetExhausted(Exception):
    """Internal signal: the evaluation budget ran out mid-iteration."""


def canonical_kind(kind: str) -> str:
    k = kind.strip().lower()
    k = _ALIASES.get(k, k.replace("-", "_"))
    if k not in KINDS:
        raise ValueError(f"unknown optimizer {kind!r}; choose from {', '.join(KINDS)}")
    return k


@dataclass
class OptimizerSpec:
    """Optimizer choice and its knobs.

    ``max_iterations`` defaults to 1000 for SPSA and COBYLA (for COBYLA it
    caps objective calls, like the reference Fortran ``maxfun``) and to
    ``200 * dim`` for the gradient methods. ``max_evals`` caps objective
    calls for the derivative-free methods (Nelder-Mead 3000, Powell
    ``1000 * dim``). ``fd_step`` is the central-difference step used by
    ``cg``/``lbfgs``; ``None`` lets the caller pick a mode-dependent value.
    """

    kind: str
    max_iterations: int | None = None
    max_evals: int | None = None
    fd_step: float | None = None
    tolerance: float = 1e-8
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kind = canonical_kind(self.kind)
        unknown = set(self.options) - set(DEFAULT_OPTIONS[self.kind])
        if unknown:
            raise ValueError(f"unknown {self.kind} options: {sorted(unknown)}")
        if self.fd_step is not None and not self.fd_step > 0:
            raise ValueError("fd_step must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def opt(self, name):
        return self.options.get(name, DEFAULT_OPTIONS[self.kind][name])

    def resolved(self, dim: int, fd_step: float = 0.03) -> "OptimizerSpec":
        """Copy with every default filled in for a problem of dimension ``dim``."""
        max_it = self.max_iterations
        max_ev = self.max_evals
        if max_it is None:
            max_it = 1000 if self.kind in ("spsa", "cobyla") else (200 * dim if self.kind in GRADIENT_BASED else 100_000)
        if max_ev is None:
            max_ev = {"nelder_mead": 3000, "powell": 1000 * dim, "cobyla": max_it}.get(self.kind, 10**9)
        opts = dict(DEFAULT_OPTIONS[self.kind])
        opts.update(self.options)
        return OptimizerSpec(
            kind=self.kind,
            max_iterations=int(max_it),
            max_evals=int(max_ev),
            fd_step=self.fd_step if self.fd_step is not None else fd_step,
            tolerance=self.tolerance,
            options=opts,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class OptResult:
    best_params: np.ndarray
    best_objective: float
    nfev: int
    grad_probe_evals: int
    total_evals: int
    iterations: int
    converged: bool
    termination_reason: Termination
    gradient_evals: int = 0
    spec: dict | None = None


class TrackedFunction:
    """Wraps a black-box objective with call accounting and a finiteness guard.

    Objective calls and gradient probes are counted separately. If the
    wrapped callable advertises ``tracks_purpose`` the purpose is passed
    through so it can label its own log.
    """

    def __init__(self, f: Callable, max_evals: int | None = None):
        self.f = f
        self.max_evals = max_evals
        self._purpose = bool(getattr(f, "tracks_purpose", False))
        self.nfev = 0
        self.nprobe = 0
        self.best_x = None
        self.best_f = np.inf

    @property
    def total(self) -> int:
        return self.nfev + self.nprobe

    def _call(self, x, purpose):
        if self.max_evals is not None and self.total >= self.max_evals:
            raise EvalBudgetExhausted
        x = np.asarray(x, dtype=float)
        val = self.f(x, purpose) if self._purpose else self.f(x)
        val = float(val)
        if not np.isfinite(val):
            raise OptimizationAborted(f"objective returned {val} at x={x.tolist()}")
        return val

    def __call__(self, x) -> float:
        val = self._call(x, "objective")
        self.nfev += 1
        if val < self.best_f:
            self.best_f = val
            self.best_x = np.array(x, dtype=float)
        return val

    def probe(self, x) -> float:
        val = self._call(x, "gradient_probe")
        self.nprobe += 1
        return val


def central_fd_gradient(f, x, h: float) -> np.ndarray:
    """Central differences ``(f(x + h e_i) - f(x - h e_i)) / 2h``; ``2 * dim`` probe calls."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    if isinstance(f, TrackedFunction):
        call = f.probe
    elif getattr(f, "tracks_purpose", False):
        def call(z):
            return f(z, "gradient_probe")
    else:
        call = f
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (call(x + e) - call(x - e)) / (2.0 * h)
    return g
