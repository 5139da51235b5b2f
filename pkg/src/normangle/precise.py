"""Extended-precision tan^2(theta/2) via mpmath.

Near-collinear pairs under norms with vanishing curvature (lp with p > 2 near
an axis, say) have tan^2(theta/2) far below double-precision resolution of
``1 - cos theta``; at s = 1e-4 the lp(4) value is about 1e-17. These routines
recompute the one-sided derivatives in closed form at ``dps`` decimal digits.
Inputs are exact binary floats, so only the arithmetic is lifted.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np

from .gfunc import TIE_RTOL
from .norms import Dual, Lp, Max, NormExpr, Polygon, Quad, Scale, Sum

DEFAULT_DPS = 50


def _norm(n: NormExpr, x):
    if isinstance(n, Lp):
        w = [mp.mpf(v) for v in n.w(len(x))]
        if n.p == 1:
            return mp.fsum(wi * abs(xi) for wi, xi in zip(w, x))
        if math.isinf(n.p):
            return max(wi * abs(xi) for wi, xi in zip(w, x))
        p = mp.mpf(n.p)
        return mp.fsum(wi * abs(xi) ** p for wi, xi in zip(w, x)) ** (1 / p)
    if isinstance(n, Quad):
        A = n.A
        d = len(x)
        return mp.sqrt(mp.fsum(mp.mpf(A[i, j]) * x[i] * x[j] for i in range(d) for j in range(d)))
    if isinstance(n, Polygon):
        return max(mp.mpf(a) * x[0] + mp.mpf(b) * x[1] for a, b in n.facets)
    if isinstance(n, Sum):
        return mp.fsum(_norm(c, x) for c in n.children)
    if isinstance(n, Max):
        return max(_norm(c, x) for c in n.children)
    if isinstance(n, Scale):
        return mp.mpf(n.c) * _norm(n.child, x)
    if isinstance(n, Dual):
        return _norm(n.resolved, x)
    raise TypeError(type(n))


def _extremes(vals, active):
    sel = [v for v, a in zip(vals, active) if a]
    return min(sel), max(sel)


def _derivs(n: NormExpr, x, y):
    """(D-, D+) of t -> N(x + t y) at t = 0, in mpmath arithmetic."""
    if isinstance(n, Lp):
        w = [mp.mpf(v) for v in n.w(len(x))]
        if n.p == 1:
            big = max(abs(v) for v in x)
            tiny = [abs(v) <= TIE_RTOL * big for v in x]
            smooth = mp.fsum(wi * mp.sign(xi) * yi for wi, xi, yi, t in zip(w, x, y, tiny) if not t)
            kink = mp.fsum(wi * abs(yi) for wi, yi, t in zip(w, y, tiny) if t)
            return smooth - kink, smooth + kink
        if math.isinf(n.p):
            v = [wi * abs(xi) for wi, xi in zip(w, x)]
            top = max(v)
            active = [vi >= (1 - TIE_RTOL) * top for vi in v]
            return _extremes([wi * mp.sign(xi) * yi for wi, xi, yi in zip(w, x, y)], active)
        p = mp.mpf(n.p)
        nx = _norm(n, x)
        d = mp.fsum(wi * (abs(xi) / nx) ** (p - 1) * mp.sign(xi) * yi for wi, xi, yi in zip(w, x, y))
        return d, d
    if isinstance(n, Quad):
        A = n.A
        k = len(x)
        d = mp.fsum(mp.mpf(A[i, j]) * x[i] * y[j] for i in range(k) for j in range(k)) / _norm(n, x)
        return d, d
    if isinstance(n, Polygon):
        vals = [mp.mpf(a) * x[0] + mp.mpf(b) * x[1] for a, b in n.facets]
        top = max(vals)
        active = [v >= top - TIE_RTOL * abs(top) for v in vals]
        return _extremes([mp.mpf(a) * y[0] + mp.mpf(b) * y[1] for a, b in n.facets], active)
    if isinstance(n, Sum):
        parts = [_derivs(c, x, y) for c in n.children]
        return mp.fsum(p[0] for p in parts), mp.fsum(p[1] for p in parts)
    if isinstance(n, Max):
        vals = [_norm(c, x) for c in n.children]
        top = max(vals)
        active = [v >= (1 - TIE_RTOL) * top for v in vals]
        parts = [_derivs(c, x, y) for c in n.children]
        return (min(p[0] for p, a in zip(parts, active) if a),
                max(p[1] for p, a in zip(parts, active) if a))
    if isinstance(n, Scale):
        dm, dp = _derivs(n.child, x, y)
        return n.c * dm, n.c * dp
    if isinstance(n, Dual):
        return _derivs(n.resolved, x, y)
    raise TypeError(type(n))


def g_precise(n: NormExpr, x, y, dps: int = DEFAULT_DPS):
    """Return ``(g_minus, g_plus, tan_half_sq, scale)`` as floats.

    ``scale`` is N(x) N(y); tan_half_sq is computed before rounding to double.
    """
    with mp.workdps(dps):
        xm = [mp.mpf(float(v)) for v in np.asarray(x, dtype=float)]
        ym = [mp.mpf(float(v)) for v in np.asarray(y, dtype=float)]
        nx = _norm(n, xm)
        ny = _norm(n, ym)
        dm, dp = _derivs(n, xm, ym)
        gm, gp = nx * dm, nx * dp
        g = (gm + gp) / 2
        s = nx * ny
        if g >= s:
            t2 = mp.mpf(0)
        elif g <= -s:
            t2 = mp.inf
        else:
            t2 = (s - g) / (s + g)
        return float(gm), float(gp), float(t2), float(s)


def tan_half_sq_precise(n: NormExpr, x, y, dps: int = DEFAULT_DPS) -> float:
    return g_precise(n, x, y, dps)[2]
