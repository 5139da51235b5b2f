"""One-sided g-functionals, the g-functional and norm angles.

For a norm N and x != 0 the difference quotient ``(N(x + t y) - N(x)) / t`` is
non-decreasing in t, so its one-sided limits D-(x, y) <= D+(x, y) exist and

    g-(x, y) = N(x) D-(x, y),   g+(x, y) = N(x) D+(x, y),   g = (g- + g+) / 2,
    cos theta(x, y) = g(x, y) / (N(x) N(y)).

Every function here is vectorised: x and y may be single vectors or stacks
with the coordinate axis last. Closed forms are used where the norm family
allows them; everything else goes through a monotone difference-quotient
limit with Richardson extrapolation on the schedule ``t_k = t0 * 4**-k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import singledispatch
from typing import Optional, Tuple, Union

import numpy as np

from .errors import DomainError
from .norms import Dual, Lp, Max, NormExpr, Polygon, Quad, Scale, Sum, as_vectors

TIE_RTOL = 1e-12
COLLINEAR_RTOL = 1e-14
N_STEPS = 25  # k = 0..24
EPS = np.finfo(float).eps
CHUNK = 8192

Array = Union[float, np.ndarray]


@dataclass(frozen=True)
class GPair:
    g_minus: Array
    g_plus: Array
    g: Array
    cos_theta: Array
    tan_half_sq: Array
    bracket_width: Array
    method: str
    clamp: Array = 0.0  # how far cos theta had to be clamped into [-1, 1]

    def theta(self) -> Array:
        return 2.0 * np.arctan(np.sqrt(self.tan_half_sq))

    def tan_half(self) -> Array:
        return np.sqrt(self.tan_half_sq)

    def to_dict(self) -> dict:
        def conv(v):
            return v.tolist() if isinstance(v, np.ndarray) else v

        return {
            "g_minus": conv(self.g_minus),
            "g_plus": conv(self.g_plus),
            "g": conv(self.g),
            "cos_theta": conv(self.cos_theta),
            "tan_half_sq": conv(self.tan_half_sq),
            "bracket_width": conv(self.bracket_width),
            "method": self.method,
        }


# ----------------------------------------------------------------------------
# difference quotients and the numeric limit
# ----------------------------------------------------------------------------


def _check_nonzero(a: np.ndarray, name: str):
    if np.any(np.all(a == 0, axis=-1)):
        raise DomainError(f"{name} must be non-zero")


def diff_quotient(n: NormExpr, x, y, t) -> Array:
    """``(N(x + t y) - N(x)) / t`` for non-zero t (scalar or one per row)."""
    x = as_vectors(x, n.dim)
    y = as_vectors(y, n.dim)
    _check_nonzero(x, "x")
    t = np.asarray(t, dtype=float)
    if np.any(t == 0):
        raise DomainError("t must be non-zero")
    if t.ndim:
        t = t[..., None]
    out = (n._eval(x + t * y) - n._eval(x)) / (t[..., 0] if t.ndim else t)
    return float(out) if np.ndim(out) == 0 else out


def _numeric_side(q: np.ndarray, noise: np.ndarray):
    """Extrapolated limit of a monotone quotient sequence along axis -1.

    ``q[..., k]`` is the quotient at step k; the steps shrink by 4 so a
    linear error term is removed by ``q_k - (q_{k-1} - q_k) / 3``. The step
    whose estimate changed least (plus its rounding floor) wins.
    """
    d = q[..., :-1] - q[..., 1:]
    r = q[..., 1:] - d / 3.0
    err = np.abs(np.diff(r, axis=-1)) + noise[..., 2:]
    k = np.argmin(err, axis=-1)
    take = lambda a: np.take_along_axis(a, k[..., None], axis=-1)[..., 0]  # noqa: E731
    return take(r[..., 1:]), take(err), k + 2


def _numeric_derivs(n: NormExpr, x: np.ndarray, y: np.ndarray, t0: float):
    nx = n._eval(x)
    ny = n._eval(y)
    base = t0 * nx / np.maximum(ny, 1e-300)
    t = base[..., None] * 4.0 ** -np.arange(N_STEPS)
    step = t[..., None] * y[..., None, :]
    xx = x[..., None, :]
    fp = n._eval(xx + step)
    fm = n._eval(xx - step)
    qp = (fp - nx[..., None]) / t
    qm = (nx[..., None] - fm) / t
    floor = 4 * EPS * (nx[..., None] + np.maximum(fp, fm)) / t
    dp, ep, kp = _numeric_side(qp, floor)
    dm, em, km = _numeric_side(qm, floor)
    # certified side bounds: qm_k <= D- <= D+ <= qp_k for every k
    k = np.maximum(kp, km)[..., None]
    hi = np.take_along_axis(qp, k, axis=-1)[..., 0]
    lo = np.take_along_axis(qm, k, axis=-1)[..., 0]
    dp = np.clip(dp, lo, hi)
    dm = np.clip(dm, lo, hi)
    swap = dm > dp
    mid = 0.5 * (dm + dp)
    dm = np.where(swap, mid, dm)
    dp = np.where(swap, mid, dp)
    return dm, dp, ep + em


# ----------------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------------


@singledispatch
def _analytic(n, x, y) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    return None


@_analytic.register
def _(n: Lp, x, y):
    w = n.w(x.shape[-1])
    if n.p == 1:
        tiny = np.abs(x) <= TIE_RTOL * np.max(np.abs(x), axis=-1, keepdims=True)
        smooth = np.sum(np.where(tiny, 0.0, w * np.sign(x) * y), axis=-1)
        kink = np.sum(np.where(tiny, w * np.abs(y), 0.0), axis=-1)
        return smooth - kink, smooth + kink
    if math.isinf(n.p):
        v = w * np.abs(x)
        active = v >= (1 - TIE_RTOL) * np.max(v, axis=-1, keepdims=True)
        s = w * np.sign(x) * y
        return (np.min(np.where(active, s, np.inf), axis=-1),
                np.max(np.where(active, s, -np.inf), axis=-1))
    nx = n._eval(x)
    ax = np.abs(x) / nx[..., None]
    d = np.sum(w * ax ** (n.p - 1) * np.sign(x) * y, axis=-1)
    return d, d


@_analytic.register
def _(n: Quad, x, y):
    d = np.einsum("...i,ij,...j->...", x, n.A, y) / n._eval(x)
    return d, d


@_analytic.register
def _(n: Dual, x, y):
    return _analytic(n.resolved, x, y)


def _derivs(n: NormExpr, x, y, numeric: bool, t0: float):
    """(D-, D+, error bound, used_numeric) for the map t -> N(x + t y) at 0."""
    if numeric:
        dm, dp, err = _numeric_derivs(n, x, y, t0)
        return dm, dp, err, True
    if isinstance(n, Sum):
        parts = [_derivs(c, x, y, False, t0) for c in n.children]
        return (sum(p[0] for p in parts), sum(p[1] for p in parts),
                sum(p[2] for p in parts), any(p[3] for p in parts))
    if isinstance(n, Scale):
        dm, dp, err, num = _derivs(n.child, x, y, False, t0)
        return n.c * dm, n.c * dp, n.c * err, num
    if isinstance(n, Max):
        vals = np.stack([c._eval(x) for c in n.children])
        lead = vals >= (1 - TIE_RTOL) * np.max(vals, axis=0)
        parts = [_derivs(c, x, y, False, t0) for c in n.children]
        dm = np.min(np.where(lead, np.stack([p[0] for p in parts]), np.inf), axis=0)
        dp = np.max(np.where(lead, np.stack([p[1] for p in parts]), -np.inf), axis=0)
        err = np.max(np.where(lead, np.stack([p[2] for p in parts]), 0.0), axis=0)
        return dm, dp, err, any(p[3] for p in parts)
    res = _analytic(n, x, y)
    if res is None:
        dm, dp, err = _numeric_derivs(n, x, y, t0)
        return dm, dp, err, True
    return res[0], res[1], np.zeros_like(res[0]), False


def _chunked(fn, x, y, *args):
    """Apply a vectorised kernel over flattened stacks in bounded-memory chunks."""
    shape = np.broadcast_shapes(x.shape, y.shape)
    x = np.broadcast_to(x, shape).reshape(-1, shape[-1])
    y = np.broadcast_to(y, shape).reshape(-1, shape[-1])
    outs = [fn(x[i:i + CHUNK], y[i:i + CHUNK], *args) for i in range(0, len(x), CHUNK)]
    res = []
    for j in range(len(outs[0])):
        if isinstance(outs[0][j], (bool, np.bool_)):
            res.append(any(o[j] for o in outs))
        else:
            res.append(np.concatenate([o[j] for o in outs]).reshape(shape[:-1]))
    return res


# ----------------------------------------------------------------------------
# public API
# ----------------------------------------------------------------------------


def g_one_sided(n: NormExpr, x, y, side: str, *, method: str = "auto", t0: float = 0.1):
    """Return ``(value, error_bound)`` for g+ (side "+") or g- (side "-")."""
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    x = as_vectors(x, n.dim)
    y = as_vectors(y, n.dim)
    _check_nonzero(x, "x")
    dm, dp, err, _ = _chunked(lambda a, b: _derivs(n, a, b, method == "numeric", t0), x, y)
    nx = n._eval(x)
    val = nx * (dp if side == "+" else dm)
    err = nx * err
    if np.ndim(val) == 0:
        return float(val), float(err)
    return val, err


def _stable_tan_half_sq(n: NormExpr, x, y) -> Optional[np.ndarray]:
    """Cancellation-free tan^2(theta/2) for inner-product norms.

    With u, v the images of x, y in the Euclidean picture of the norm,
    tan(theta/2) = |u/|u| - v/|v|| / |u/|u| + v/|v||.
    """
    while isinstance(n, (Scale, Dual)):
        n = n.child if isinstance(n, Scale) else n.resolved
    if isinstance(n, Quad):
        u, v = x @ n.chol, y @ n.chol
    elif isinstance(n, Lp) and n.p == 2:
        s = np.sqrt(n.w(x.shape[-1]))
        u, v = x * s, y * s
    else:
        return None
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    num = np.sum((u - v) ** 2, axis=-1)
    den = np.sum((u + v) ** 2, axis=-1)
    with np.errstate(divide="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)


def g_functional(n: NormExpr, x, y, *, method: str = "auto", t0: float = 0.1) -> GPair:
    """Fill a GPair for the pair(s) (x, y).

    ``method="numeric"`` forces the difference-quotient path even where a
    closed form exists; it is used to cross-check the analytic paths.
    """
    if method not in ("auto", "numeric"):
        raise ValueError("method must be 'auto' or 'numeric'")
    x = as_vectors(x, n.dim)
    y = as_vectors(y, n.dim)
    _check_nonzero(x, "x")
    _check_nonzero(y, "y")
    scalar = x.ndim == 1 and y.ndim == 1
    x, y = np.broadcast_arrays(x, y)
    dm, dp, err, used_numeric = _chunked(lambda a, b: _derivs(n, a, b, method == "numeric", t0), x, y)
    nx = n._eval(x)
    ny = n._eval(y)
    g_minus = nx * dm
    g_plus = nx * dp
    width = (g_plus - g_minus) + nx * err

    # collinear pairs short-circuit: g(x, c x) = c N(x)^2 exactly
    c = np.sum(x * y, axis=-1) / np.sum(x * x, axis=-1)
    resid = np.linalg.norm(y - c[..., None] * x, axis=-1)
    collinear = resid <= COLLINEAR_RTOL * np.linalg.norm(y, axis=-1)
    if np.any(collinear):
        exact = np.sign(c) * nx * ny
        g_minus = np.where(collinear, exact, g_minus)
        g_plus = np.where(collinear, exact, g_plus)
        width = np.where(collinear, 0.0, width)

    g = 0.5 * (g_minus + g_plus)
    s = nx * ny
    raw_cos = g / s
    cos = np.clip(raw_cos, -1.0, 1.0)
    clamp = np.abs(raw_cos - cos)
    with np.errstate(divide="ignore", invalid="ignore"):
        tan_sq = np.where(g >= s, 0.0, np.where(g <= -s, np.inf, (s - g) / (s + g)))
    if method == "auto":
        stable = _stable_tan_half_sq(n, x, y)
        if stable is not None:
            tan_sq = stable
    tan_sq = np.where(collinear, np.where(c > 0, 0.0, np.inf), tan_sq)

    m = "numeric" if used_numeric else "analytic"
    if scalar:
        return GPair(float(g_minus), float(g_plus), float(g), float(cos), float(tan_sq),
                     float(width), m, float(clamp))
    return GPair(g_minus, g_plus, g, cos, tan_sq, width, m, clamp)


def norm_angle(n: NormExpr, x, y, **kw) -> Tuple[Array, Array]:
    """Return ``(theta, tan(theta/2))``; tan(pi/2) is +inf for opposite vectors."""
    gp = g_functional(n, x, y, **kw)
    return gp.theta(), gp.tan_half()
