"""Linear-model trust-region method in the style of Powell's COBYLA.

Only the unconstrained branch is implemented: a simplex of ``n + 1``
interpolation points defines a linear model, the trust-region step of
length ``rho`` follows the model's steepest descent, and ``rho`` is halved
from ``rhobeg`` down to ``tolerance`` whenever a step fails to reduce the
objective on an acceptable simplex.
"""

from __future__ import annotations

import numpy as np

from .base import EvalBudgetExhausted, Termination

# Simplex acceptability: every vertex within PARETA*rho of the best one, and
# at least PARSIG*rho away from the opposite face.
PARSIG = 0.25
PARETA = 2.1
GEOMETRY_STEP = 0.5
GOOD_RATIO = 0.1


def _geometry(d):
    """Edge lengths and vertex-to-opposite-face distances of the simplex ``d`` (rows = edges)."""
    inv = np.linalg.inv(d)
    # row j of inv.T is normal to the face opposite vertex j
    normals = inv.T
    sigma = 1.0 / np.linalg.norm(normals, axis=1)
    eta = np.linalg.norm(d, axis=1)
    return eta, sigma, normals


def _geometry_step(tf, sim, fs, rho, g):
    """Replace the worst-shaped vertex by a point ``GEOMETRY_STEP * rho`` from the best one."""
    n = sim.shape[1]
    best = int(np.argmin(fs))
    if best != 0:
        sim[[0, best]] = sim[[best, 0]]
        fs[[0, best]] = fs[[best, 0]]
    d = sim[1:] - sim[0]
    try:
        eta, sigma, normals = _geometry(d)
    except np.linalg.LinAlgError:
        j = int(np.argmax(np.linalg.norm(d, axis=1)))
        direction = np.zeros(n)
        direction[j] = 1.0
    else:
        j = int(np.argmax(eta)) if np.any(eta > PARETA * rho) else int(np.argmin(sigma))
        direction = normals[j] / np.linalg.norm(normals[j])
    dx = GEOMETRY_STEP * rho * direction
    if g is not None and g @ dx > 0:
        dx = -dx
    sim[j + 1] = sim[0] + dx
    fs[j + 1] = tf(sim[j + 1])


def cobyla(tf, x0, spec, callback=None):
    rho = float(spec.opt("rhobeg"))
    rhoend = min(spec.tolerance, rho)
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    iterations = 0
    try:
        sim = np.vstack([x0, x0 + rho * np.eye(n)])
        fs = np.array([tf(v) for v in sim])
        while True:
            if iterations >= spec.max_iterations:
                return tf.best_x, tf.best_f, iterations, Termination.ITERATION_CAP
            iterations += 1
            best = int(np.argmin(fs))
            if best != 0:
                sim[[0, best]] = sim[[best, 0]]
                fs[[0, best]] = fs[[best, 0]]
            d = sim[1:] - sim[0]
            try:
                eta, sigma, normals = _geometry(d)
                degenerate = False
            except np.linalg.LinAlgError:
                degenerate = True

            acceptable = (not degenerate and np.all(eta <= PARETA * rho)
                          and np.all(sigma >= PARSIG * rho))

            g = None
            if not degenerate:
                g = np.linalg.solve(d, fs[1:] - fs[0])
            gnorm = 0.0 if g is None else float(np.linalg.norm(g))

            step_taken = False
            ratio = -np.inf
            if not degenerate and gnorm > 0.0:
                step = -rho * g / gnorm
                x_new = sim[0] + step
                f_new = tf(x_new)
                predicted = rho * gnorm
                ratio = (fs[0] - f_new) / predicted
                lam = np.linalg.solve(d.T, step)
                # |det| scale when vertex j (or the base, index 0) is replaced by x_new
                vol = np.concatenate([[abs(1.0 - lam.sum())], np.abs(lam)])
                if f_new < fs[0]:
                    j = int(np.argmax(vol))
                else:
                    dist = np.linalg.norm(sim - x_new, axis=1)
                    score = vol * np.maximum(1.0, dist / rho) ** 2
                    score[0] = 0.0  # never drop the incumbent for a worse point
                    j = int(np.argmax(score))
                    if score[j] <= 1.0:
                        j = -1
                if j >= 0:
                    sim[j] = x_new
                    fs[j] = f_new
                step_taken = True

            if step_taken and ratio > GOOD_RATIO:
                pass
            elif not acceptable:
                _geometry_step(tf, sim, fs, rho, g)
            else:
                if rho <= rhoend:
                    return tf.best_x, tf.best_f, iterations, Termination.CONVERGED
                rho *= 0.5
                if rho <= 1.5 * rhoend:
                    rho = rhoend
            if callback is not None:
                callback(iterations, tf.best_x.copy(), tf.best_f)
    except EvalBudgetExhausted:
        return tf.best_x, tf.best_f, iterations, Termination.ITERATION_CAP
