"""Black-box minimizers with exact evaluation accounting.

All optimizers are reached through :func:`minimize`, which wraps the
objective in a :class:`TrackedFunction` and fills an :class:`OptResult`.
"""

from __future__ import annotations

import numpy as np

from .base import (
    DERIVATIVE_FREE,
    GRADIENT_BASED,
    KINDS,
    OptimizationAborted,
    OptimizerSpec,
    OptResult,
    Termination,
    TrackedFunction,
    central_fd_gradient,
)
from .cobyla import cobyla
from .gradient import conjugate_gradient, lbfgs
from .powell import powell
from .simplex import nelder_mead
from .spsa import SpsaGains, spsa, spsa_gradient, spsa_step

__all__ = [
    "KINDS",
    "DERIVATIVE_FREE",
    "GRADIENT_BASED",
    "OptimizerSpec",
    "OptResult",
    "Termination",
    "OptimizationAborted",
    "SpsaGains",
    "minimize",
    "central_fd_gradient",
    "spsa_step",
    "spsa_gradient",
]

_DERIVATIVE_FREE_IMPL = {"nelder_mead": nelder_mead, "powell": powell, "cobyla": cobyla}
_GRADIENT_IMPL = {"cg": conjugate_gradient, "lbfgs": lbfgs}


def minimize(f, x0, spec: OptimizerSpec, rng: np.random.Generator | None = None,
             callback=None) -> OptResult:
    """Minimize the black-box ``f`` from ``x0``.

    ``f(x)`` must return a finite float; a NaN or infinity raises
    :class:`OptimizationAborted`. ``callback(iteration, x, fx)`` is invoked
    once per optimizer iteration with the current incumbent. ``rng`` is
    required for SPSA.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    spec = spec.resolved(x0.size, fd_step=spec.fd_step or 0.03)
    tf = TrackedFunction(f, max_evals=spec.max_evals)
    gradient_evals = 0
    meta = spec.to_dict()

    if spec.kind == "spsa":
        if rng is None:
            raise ValueError("SPSA needs an rng")
        x, fx, iterations, reason, gains = spsa(tf, x0, spec, rng, callback)
        meta["options"]["a"] = gains.a if gains is not None else None
        # reporting convention: SPSA nfev is its iteration count
        return OptResult(
            best_params=x, best_objective=float(fx), nfev=iterations,
            grad_probe_evals=tf.nprobe, total_evals=tf.total, iterations=iterations,
            converged=False, termination_reason=reason, spec=meta,
        )
    if spec.kind in _DERIVATIVE_FREE_IMPL:
        x, fx, iterations, reason = _DERIVATIVE_FREE_IMPL[spec.kind](tf, x0, spec, callback)
    else:
        x, fx, iterations, reason, gradient_evals = _GRADIENT_IMPL[spec.kind](tf, x0, spec, callback)
    return OptResult(
        best_params=np.array(x, dtype=float), best_objective=float(fx), nfev=tf.nfev,
        grad_probe_evals=tf.nprobe, total_evals=tf.total, iterations=iterations,
        converged=reason in (Termination.CONVERGED, Termination.GRADIENT_SMALL),
        termination_reason=reason, gradient_evals=gradient_evals, spec=meta,
    )
