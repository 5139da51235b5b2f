"""Independent reference values for the test suite.

Nothing here imports normangle. Each oracle is either a closed form or a
brute-force high-precision computation written directly from the
definitions, and the FROZEN table pins literal values computed once with
mpmath at 40 digits so that drift in either side is caught.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np

FROZEN = {
    # tan^2 of the half angles for x=(1,1), y=(1-s,1+s) under q1 and max(q1,q2)
    ("max-pair", 0.1): (0.0020689743737688813359, 0.026084085722293002907),
    ("max-pair", 0.01): (0.000018938198352856297396, 0.0025123286774621596805),
    # sqrt(tan^2_2 / tan^2_4) for (1,0) -> (1,s) with p=2 and p=4
    ("lp-ratio", 1e-1): 14.10730862816967657,
    ("lp-ratio", 1e-2): 141.41782123371377088,
    ("lp-ratio", 1e-3): 1414.2132088202347854,
    ("lp-ratio", 1e-4): 14142.135588375611959,
    "circle-delta-1": 0.13397459621556135324,
    "circle-angle-modulus-1": 0.57735026918962576451,
    "circle-flatness-0.1": 0.0049958347219742339044,
}


def max_pair_tan_sq(s: float):
    """Closed forms for the q1 / max(q1, q2) pair at x=(1,1), y=(1-s,1+s)."""
    s = mp.mpf(s)
    t1 = 3 * s**2 / (4 * (1 - s / 2 + mp.sqrt(1 - s + s**2)) ** 2)
    t4 = (s + s**2) / (1 + mp.sqrt(1 + s + s**2)) ** 2
    return float(t1), float(t4)


def lp_tan_sq(p: float, s: float) -> float:
    """tan^2(theta/2) for (1,0) -> (1,s) in lp, via cos theta = (1+s^p)^(-1/p)."""
    with mp.workdps(60):
        a = mp.expm1(mp.log1p(mp.mpf(s) ** p) / p)
        return float(a / (a + 2))


def weighted_l1_tan_sq(w, x, y) -> float:
    """Brute-force tan^2(theta/2) for the weighted l1 norm from one-sided limits.

    ||x + t y|| is piecewise linear in t, so a tiny exact rational step gives
    the one-sided slopes without any limiting error.
    """
    with mp.workdps(60):
        norm = lambda v: sum(mp.mpf(wi) * abs(mp.mpf(vi)) for wi, vi in zip(w, v))
        t = mp.mpf(10) ** -30
        nx, ny = norm(x), norm(y)
        gp = nx * (norm([a + t * b for a, b in zip(x, y)]) - nx) / t
        gm = nx * (norm([a - t * b for a, b in zip(x, y)]) - nx) / -t
        g = (gp + gm) / 2
        return float((nx * ny - g) / (nx * ny + g))


def one_sided_mp(norm, x, y, dps: int = 60, t: float = 1e-25):
    """Return (g-, g+) from symmetric tiny steps in extended precision.

    norm takes a list of mpf values. For norms that are smooth or piecewise
    smooth along the line this is accurate to about t.
    """
    with mp.workdps(dps):
        x = [mp.mpf(v) for v in x]
        y = [mp.mpf(v) for v in y]
        t = mp.mpf(t)
        nx = norm(x)
        gp = nx * (norm([a + t * b for a, b in zip(x, y)]) - nx) / t
        gm = nx * (norm([a - t * b for a, b in zip(x, y)]) - nx) / -t
        return float(gm), float(gp)


def mp_quad(A):
    A = [[mp.mpf(v) for v in row] for row in A]
    return lambda v: mp.sqrt(sum(A[i][j] * v[i] * v[j] for i in range(len(v)) for j in range(len(v))))


def mp_lp(p):
    return lambda v: sum(abs(c) ** p for c in v) ** (mp.mpf(1) / p)


def mp_max(*ns):
    return lambda v: max(n(v) for n in ns)


def rayleigh_ratio(A1: np.ndarray, A2: np.ndarray) -> float:
    """M/m for quad(A1) vs quad(A2), from the generalized eigenproblem."""
    from scipy.linalg import eigh

    lam = eigh(A2, A1, eigvals_only=True)
    return math.sqrt(lam[-1] / lam[0])


def sampled_dual(norm_eval, xi: np.ndarray, samples: int = 20000, seed: int = 0) -> np.ndarray:
    """Brute-force sup of <xi, y> over the unit ball of a planar norm."""
    t = np.linspace(0, 2 * np.pi, samples, endpoint=False) + np.random.default_rng(seed).uniform(0, 1e-3)
    d = np.stack([np.cos(t), np.sin(t)], -1)
    pts = d / norm_eval(d)[:, None]
    return np.max(np.atleast_2d(xi) @ pts.T, axis=1)


def circle_delta(eps: float) -> float:
    return 1 - math.sqrt(1 - eps * eps / 4)


def circle_angle_modulus(eps: float) -> float:
    g = 1 - eps * eps / 2
    return math.sqrt((1 - g) / (1 + g))


def triangle_sigma(r, alpha: float, beta: float) -> float:
    """sigma from plane geometry: the angle O P_alpha P_beta, or pi minus it."""
    pa = r(alpha) * np.array([math.cos(alpha), math.sin(alpha)])
    pb = r(beta) * np.array([math.cos(beta), math.sin(beta)])
    u, v = -pa, pb - pa
    ang = math.atan2(abs(u[0] * v[1] - u[1] * v[0]), float(u @ v))
    # beta ahead of alpha (counterclockwise) means sigma measures the exterior side
    d = math.remainder(beta - alpha, 2 * math.pi)
    return math.pi - ang if d > 0 else ang
