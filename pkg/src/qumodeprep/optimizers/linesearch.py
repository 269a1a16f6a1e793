"""One-dimensional search helpers: Armijo backtracking, bracketing and Brent's method."""

from __future__ import annotations

import math

import numpy as np

_GOLD = 1.618034
_CGOLD = 0.3819660
_TINY = 1e-21


def armijo_backtrack(f, x, fx, direction, slope, alpha0, c1=1e-4, shrink=0.5, max_backtracks=30):
    """Shrink ``alpha`` until ``f(x + alpha d) <= f(x) + c1 alpha slope``.

    Returns ``(alpha, f_new)`` or ``(None, None)`` when no acceptable step is found.
    """
    alpha = alpha0
    for _ in range(max_backtracks):
        f_new = f(x + alpha * direction)
        if f_new <= fx + c1 * alpha * slope:
            return alpha, f_new
        alpha *= shrink
    return None, None


def bracket(func, xa=0.0, xb=1.0, fa=None, fb=None, grow_limit=110.0, maxiter=1000):
    """Find ``xa, xb, xc`` with ``f(xb) < f(xa)`` and ``f(xb) < f(xc)`` by golden expansion."""
    fa = func(xa) if fa is None else fa
    fb = func(xb) if fb is None else fb
    if fa < fb:
        xa, xb, fa, fb = xb, xa, fb, fa
    xc = xb + _GOLD * (xb - xa)
    fc = func(xc)
    it = 0
    while fc < fb:
        tmp1 = (xb - xa) * (fb - fc)
        tmp2 = (xb - xc) * (fb - fa)
        val = tmp2 - tmp1
        denom = 2.0 * (_TINY if abs(val) < _TINY else val)
        w = xb - ((xb - xc) * tmp2 - (xb - xa) * tmp1) / denom
        wlim = xb + grow_limit * (xc - xb)
        if it > maxiter:
            raise RuntimeError("too many iterations while bracketing")
        it += 1
        if (w - xc) * (xb - w) > 0.0:
            fw = func(w)
            if fw < fc:
                return xb, w, xc, fb, fw, fc
            if fw > fb:
                return xa, xb, w, fa, fb, fw
            w = xc + _GOLD * (xc - xb)
            fw = func(w)
        elif (w - wlim) * (wlim - xc) >= 0.0:
            w = wlim
            fw = func(w)
        elif (w - wlim) * (xc - w) > 0.0:
            fw = func(w)
            if fw < fc:
                xb, xc, w = xc, w, w + _GOLD * (w - xc)
                fb, fc, fw = fc, fw, func(w)
        else:
            w = xc + _GOLD * (xc - xb)
            fw = func(w)
        xa, xb, xc = xb, xc, w
        fa, fb, fc = fb, fc, fw
    return xa, xb, xc, fa, fb, fc


def brent(func, brack, tol=1.48e-8, maxiter=500):
    """Brent's parabolic/golden minimization on a bracketing triple.

    ``brack`` is the 6-tuple from :func:`bracket`. Returns ``(xmin, fmin)``.
    """
    xa, xb, xc, fa, fb, fc = brack
    mintol = 1e-11
    x = w = v = xb
    fx = fw = fv = fb
    a, b = (xa, xc) if xa < xc else (xc, xa)
    deltax = 0.0
    rat = 0.0
    for _ in range(maxiter):
        tol1 = tol * abs(x) + mintol
        tol2 = 2.0 * tol1
        xmid = 0.5 * (a + b)
        if abs(x - xmid) < (tol2 - 0.5 * (b - a)):
            break
        if abs(deltax) <= tol1:
            deltax = (a - x) if x >= xmid else (b - x)
            rat = _CGOLD * deltax
        else:
            tmp1 = (x - w) * (fx - fv)
            tmp2 = (x - v) * (fx - fw)
            p = (x - v) * tmp2 - (x - w) * tmp1
            tmp2 = 2.0 * (tmp2 - tmp1)
            if tmp2 > 0.0:
                p = -p
            tmp2 = abs(tmp2)
            dx_temp = deltax
            deltax = rat
            if (p > tmp2 * (a - x)) and (p < tmp2 * (b - x)) and (abs(p) < abs(0.5 * tmp2 * dx_temp)):
                rat = p / tmp2
                u = x + rat
                if (u - a) < tol2 or (b - u) < tol2:
                    rat = tol1 if xmid - x >= 0 else -tol1
            else:
                deltax = (a - x) if x >= xmid else (b - x)
                rat = _CGOLD * deltax
        u = x + (rat if abs(rat) >= tol1 else math.copysign(tol1, rat))
        fu = func(u)
        if fu > fx:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
        else:
            if u >= x:
                a = x
            else:
                b = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
    return x, fx


def line_minimize(f, x, direction, tol):
    """Minimize ``f(x + t d)`` over ``t``; returns ``(f_min, x_new, t * d)``."""
    direction = np.asarray(direction, dtype=float)

    def phi(t):
        return f(x + t * direction)

    brack = bracket(phi)
    tmin, fmin = brent(phi, brack, tol=tol)
    step = tmin * direction
    return fmin, x + step, step
