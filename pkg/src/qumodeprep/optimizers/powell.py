"""Powell's conjugate-direction method with Brent line minimization."""

from __future__ import annotations

import numpy as np

from .base import EvalBudgetExhausted, Termination
from .linesearch import line_minimize


def powell(tf, x0, spec, callback=None):
    """Direction-set search starting from the coordinate axes.

    Each sweep line-minimizes along every direction, then tries the
    extrapolated point and, when it pays off, swaps the average sweep
    direction in for the direction of largest decrease. A sweep whose
    relative decrease is at most ``spec.tolerance`` ends the run.
    """
    xtol = spec.opt("xtol")
    ftol = spec.tolerance
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    direc = np.eye(n)
    iterations = 0
    try:
        fval = tf(x)
        x1 = x.copy()
        while True:
            fx = fval
            bigind = 0
            delta = 0.0
            for i in range(n):
                fx2 = fval
                fval, x, step = line_minimize(tf, x, direc[i], tol=xtol * 100)
                if fx2 - fval > delta:
                    delta = fx2 - fval
                    bigind = i
            iterations += 1
            if callback is not None:
                callback(iterations, tf.best_x.copy(), tf.best_f)
            if 2.0 * (fx - fval) <= ftol * (abs(fx) + abs(fval)) + 1e-20:
                return tf.best_x, tf.best_f, iterations, Termination.CONVERGED
            if iterations >= spec.max_iterations:
                return tf.best_x, tf.best_f, iterations, Termination.ITERATION_CAP

            direc1 = x - x1
            x1 = x.copy()
            x2 = x + direc1
            fx2 = tf(x2)
            if fx > fx2:
                t = 2.0 * (fx + fx2 - 2.0 * fval)
                temp = fx - fval - delta
                t *= temp * temp
                temp = fx - fx2
                t -= delta * temp * temp
                if t < 0.0:
                    fval, x, step = line_minimize(tf, x, direc1, tol=xtol * 100)
                    if np.any(step):
                        direc[bigind] = direc[-1]
                        direc[-1] = step
    except EvalBudgetExhausted:
        return tf.best_x, tf.best_f, iterations, Termination.EVAL_CAP
