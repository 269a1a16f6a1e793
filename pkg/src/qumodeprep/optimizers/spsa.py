"""Simultaneous perturbation stochastic approximation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Termination, TrackedFunction


@dataclass
class SpsaGains:
    """Gain schedule ``a_k = a / (k + 1 + A)^alpha_exp``, ``c_k = c / (k + 1)^gamma_exp``."""

    a: float
    c: float = 0.1
    A: float = 100.0
    alpha_exp: float = 0.602
    gamma_exp: float = 0.101

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0 and self.A >= 0):
            raise ValueError("SPSA gains need a > 0, c > 0, A >= 0")

    def a_k(self, k: int) -> float:
        return self.a / (k + 1 + self.A) ** self.alpha_exp

    def c_k(self, k: int) -> float:
        return self.c / (k + 1) ** self.gamma_exp


def _probe_call(f):
    if isinstance(f, TrackedFunction):
        return f.probe
    if getattr(f, "tracks_purpose", False):
        return lambda z: f(z, "gradient_probe")
    return f


def spsa_gradient(f, x, ck, rng):
    """Two-evaluation gradient estimate with a Rademacher perturbation.

    Returns ``(g_hat, f_plus, f_minus)``.
    """
    call = _probe_call(f)
    x = np.asarray(x, dtype=float)
    delta = rng.integers(0, 2, size=x.size) * 2.0 - 1.0
    f_plus = call(x + ck * delta)
    f_minus = call(x - ck * delta)
    return (f_plus - f_minus) / (2.0 * ck * delta), f_plus, f_minus


def spsa_step(f, x, k: int, gains: SpsaGains, rng) -> np.ndarray:
    """One SPSA update ``x - a_k g_hat``; exactly two calls to ``f``."""
    g_hat, _, _ = spsa_gradient(f, x, gains.c_k(k), rng)
    return np.asarray(x, dtype=float) - gains.a_k(k) * g_hat


def calibrated_a(g_hat, first_step: float, A: float, alpha_exp: float) -> float:
    """Choose ``a`` so the first update moves each coordinate by ``first_step`` on average."""
    mag = float(np.mean(np.abs(g_hat)))
    if not mag > 0:
        return first_step * (1 + A) ** alpha_exp
    return first_step * (1 + A) ** alpha_exp / mag


def spsa(tf, x0, spec, rng, callback=None):
    """Fixed-length SPSA run.

    When ``a`` is not given it is calibrated from the first gradient estimate
    (no extra evaluations). The reported objective is the mean of the last
    probe pair. Returns ``(x, f_est, iterations, reason, gains)``.
    """
    x = np.asarray(x0, dtype=float).copy()
    a = spec.opt("a")
    gains = None
    f_est = np.nan
    for k in range(spec.max_iterations):
        c_k = spec.opt("c") / (k + 1) ** spec.opt("gamma_exp")
        g_hat, fp, fm = spsa_gradient(tf, x, c_k, rng)
        if gains is None:
            if a is None:
                a = calibrated_a(g_hat, spec.opt("first_step"), spec.opt("A"), spec.opt("alpha_exp"))
            gains = SpsaGains(a=a, c=spec.opt("c"), A=spec.opt("A"),
                              alpha_exp=spec.opt("alpha_exp"), gamma_exp=spec.opt("gamma_exp"))
        x = x - gains.a_k(k) * g_hat
        f_est = 0.5 * (fp + fm)
        if callback is not None:
            callback(k + 1, x.copy(), f_est)
    return x, f_est, spec.max_iterations, Termination.ITERATION_CAP, gains
