"""Nelder-Mead downhill simplex with fixed standard coefficients."""

from __future__ import annotations

import numpy as np

from .base import EvalBudgetExhausted, Termination


def nelder_mead(tf, x0, spec, callback=None):
    """Minimize ``tf`` (a :class:`TrackedFunction`) from ``x0``.

    Stops when both the spread of simplex values and the largest vertex
    displacement from the best vertex fall below ``spec.tolerance``.
    Returns ``(x_best, f_best, iterations, reason)``.
    """
    rho = spec.opt("reflect")
    chi = spec.opt("expand")
    psi = spec.opt("contract")
    sigma = spec.opt("shrink")
    tol = spec.tolerance
    x0 = np.asarray(x0, dtype=float)
    n = x0.size

    sim = np.empty((n + 1, n))
    sim[0] = x0
    for k in range(n):
        y = x0.copy()
        y[k] = (1 + spec.opt("nonzdelt")) * y[k] if y[k] != 0 else spec.opt("zdelt")
        sim[k + 1] = y

    fsim = np.full(n + 1, np.inf)
    iterations = 0
    try:
        for k in range(n + 1):
            fsim[k] = tf(sim[k])
        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]

        while iterations < spec.max_iterations:
            if (np.max(np.abs(sim[1:] - sim[0])) <= tol
                    and np.max(np.abs(fsim[0] - fsim[1:])) <= tol):
                return sim[0], fsim[0], iterations, Termination.CONVERGED

            xbar = sim[:-1].mean(axis=0)
            xr = (1 + rho) * xbar - rho * sim[-1]
            fxr = tf(xr)
            shrink = False
            if fxr < fsim[0]:
                xe = (1 + rho * chi) * xbar - rho * chi * sim[-1]
                fxe = tf(xe)
                if fxe < fxr:
                    sim[-1], fsim[-1] = xe, fxe
                else:
                    sim[-1], fsim[-1] = xr, fxr
            elif fxr < fsim[-2]:
                sim[-1], fsim[-1] = xr, fxr
            elif fxr < fsim[-1]:
                xc = (1 + psi * rho) * xbar - psi * rho * sim[-1]
                fxc = tf(xc)
                if fxc <= fxr:
                    sim[-1], fsim[-1] = xc, fxc
                else:
                    shrink = True
            else:
                xcc = (1 - psi) * xbar + psi * sim[-1]
                fxcc = tf(xcc)
                if fxcc < fsim[-1]:
                    sim[-1], fsim[-1] = xcc, fxcc
                else:
                    shrink = True
            if shrink:
                for j in range(1, n + 1):
                    sim[j] = sim[0] + sigma * (sim[j] - sim[0])
                    fsim[j] = tf(sim[j])

            order = np.argsort(fsim, kind="stable")
            sim, fsim = sim[order], fsim[order]
            iterations += 1
            if callback is not None:
                callback(iterations, sim[0].copy(), float(fsim[0]))
    except EvalBudgetExhausted:
        return tf.best_x, tf.best_f, iterations, Termination.EVAL_CAP
    return sim[0], fsim[0], iterations, Termination.ITERATION_CAP
