"""Finite-difference gradient methods: nonlinear CG (PR+) and L-BFGS.

Both share a backtracking Armijo line search and stop when the objective
decrease of an accepted step drops to ``spec.tolerance``, when the
gradient's max-norm drops to ``gtol``, or when the line search fails.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .base import EvalBudgetExhausted, Termination, central_fd_gradient
from .linesearch import armijo_backtrack


class _State:
    def __init__(self, x, fx):
        self.x = x
        self.fx = fx
        self.gradient_evals = 0


def _line_search(tf, st, direction, slope, alpha0, spec):
    return armijo_backtrack(
        tf, st.x, st.fx, direction, slope, alpha0,
        c1=spec.opt("c1"), shrink=spec.opt("backtrack"), max_backtracks=spec.opt("max_backtracks"),
    )


def _grad(tf, st, h):
    st.gradient_evals += 1
    return central_fd_gradient(tf, st.x, h)


def conjugate_gradient(tf, x0, spec, callback=None):
    """Polak-Ribiere+ nonlinear conjugate gradient.

    Returns ``(x, fx, iterations, reason, gradient_evals)`` where ``x`` is the
    last accepted iterate.
    """
    h = spec.fd_step
    st = _State(np.asarray(x0, dtype=float).copy(), None)
    iterations = 0
    try:
        st.fx = tf(st.x)
        g = _grad(tf, st, h)
        d = -g
        f_prev = st.fx + 0.5 * np.linalg.norm(g)
        reason = Termination.ITERATION_CAP
        while iterations < spec.max_iterations:
            if np.max(np.abs(g)) <= spec.opt("gtol"):
                reason = Termination.GRADIENT_SMALL
                break
            slope = float(g @ d)
            if slope >= 0:
                d = -g
                slope = -float(g @ g)
            alpha0 = min(1.0, 1.01 * 2.0 * (f_prev - st.fx) / -slope)
            if not alpha0 > 0:
                alpha0 = 1.0
            alpha, f_new = _line_search(tf, st, d, slope, alpha0, spec)
            if alpha is None:
                reason = Termination.LINE_SEARCH_FAILED
                break
            iterations += 1
            f_prev, st.fx = st.fx, f_new
            st.x = st.x + alpha * d
            if callback is not None:
                callback(iterations, st.x.copy(), st.fx)
            if f_prev - st.fx <= spec.tolerance:
                reason = Termination.CONVERGED
                break
            g_new = _grad(tf, st, h)
            beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
            d = -g_new + beta * d
            g = g_new
    except EvalBudgetExhausted:
        reason = Termination.EVAL_CAP
    return st.x, st.fx, iterations, reason, st.gradient_evals


def _two_loop(g, pairs):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def lbfgs(tf, x0, spec, callback=None):
    """Limited-memory BFGS with ``memory`` correction pairs (unbounded)."""
    h = spec.fd_step
    st = _State(np.asarray(x0, dtype=float).copy(), None)
    pairs = deque(maxlen=int(spec.opt("memory")))
    iterations = 0
    try:
        st.fx = tf(st.x)
        g = _grad(tf, st, h)
        reason = Termination.ITERATION_CAP
        while iterations < spec.max_iterations:
            if np.max(np.abs(g)) <= spec.opt("gtol"):
                reason = Termination.GRADIENT_SMALL
                break
            d = _two_loop(g, list(pairs))
            slope = float(g @ d)
            if slope >= 0:
                pairs.clear()
                d = -g
                slope = -float(g @ g)
            alpha0 = 1.0 if pairs else min(1.0, 1.0 / np.linalg.norm(d))
            alpha, f_new = _line_search(tf, st, d, slope, alpha0, spec)
            if alpha is None:
                reason = Termination.LINE_SEARCH_FAILED
                break
            iterations += 1
            s = alpha * d
            f_prev, st.fx = st.fx, f_new
            st.x = st.x + s
            if callback is not None:
                callback(iterations, st.x.copy(), st.fx)
            if f_prev - st.fx <= spec.tolerance:
                reason = Termination.CONVERGED
                break
            g_new = _grad(tf, st, h)
            y = g_new - g
            sy = float(s @ y)
            if sy > 1e-10 * float(y @ y):
                pairs.append((s, y, 1.0 / sy))
            g = g_new
    except EvalBudgetExhausted:
        reason = Termination.EVAL_CAP
    return st.x, st.fx, iterations, reason, st.gradient_evals
