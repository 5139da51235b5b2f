"""Polar description of a planar unit ball.

With Q_t = (cos t, sin t), the polar radius r(t) = 1 / N(Q_t) traces the unit
sphere P_t = r(t) Q_t. For 0 < |a - b| < pi the comparison angle sigma(a, b)
is the Euclidean angle O P_a P_b (a > b) or its supplement (a < b); it
satisfies

    r(a) / r(b) = cos(a - b) + sin(a - b) cot sigma(a, b),

which is how it is computed here. phi-(a) and phi+(a) are the limits of
sigma(a, b) as b -> a from below and above; they encode the one-sided slopes
r'(a -+ 0) = r(a) cot phi-+(a). Angles are plain radians; all functions
broadcast over array arguments.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionError, DomainError
from .gfunc import GPair
from .norms import NormExpr

TWO_PI = 2.0 * np.pi
EPS = np.finfo(float).eps
SIN_TOL = 1e-12
SMOOTH_TOL = 1e-6
PHI_H0 = 1e-2
PHI_STEPS = 31  # k = 0..30


def _check_planar(n: NormExpr):
    if n.dim not in (None, 2):
        raise DimensionError(f"planar analysis needs a norm on R^2, got dimension {n.dim}")


def _unit(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def radial(n: NormExpr, t):
    """Polar radius r(t) = 1 / N(cos t, sin t)."""
    _check_planar(n)
    return _out(1.0 / n._eval(_unit(t)))


def _cot_sigma(n: NormExpr, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = a - b
    s = np.sin(d)
    # r(a)/r(b) = N(Q_b)/N(Q_a)
    ratio = n._eval(_unit(b)) / n._eval(_unit(a))
    return (ratio - np.cos(d)) / s, ratio


def sigma(n: NormExpr, alpha, beta):
    """sigma(alpha, beta) in (0, pi); requires 0 < |alpha - beta| < pi."""
    _check_planar(n)
    d = np.asarray(alpha, dtype=float) - np.asarray(beta, dtype=float)
    if np.any(np.abs(d) >= np.pi) or np.any(np.abs(np.sin(d)) <= SIN_TOL):
        raise DomainError("sigma needs 0 < |alpha - beta| < pi")
    z, _ = _cot_sigma(n, alpha, beta)
    # arccot with range (0, pi)
    return _out(0.5 * np.pi - np.arctan(z))


def _phi_limits(n: NormExpr, alpha: np.ndarray, h0: float = PHI_H0):
    """Both one-sided limits with error bounds, vectorised over alpha."""
    alpha = np.asarray(alpha, dtype=float)
    h = h0 * 2.0 ** -np.arange(PHI_STEPS)
    a = alpha[..., None]
    out = []
    qs = []
    for sign in (-1.0, 1.0):
        z, ratio = _cot_sigma(n, a, a + sign * h)
        q = 0.5 * np.pi - np.arctan(z)
        floor = 4 * EPS * (ratio + 1.0) / h
        # halving steps: the linear error term is removed by 2 q_k - q_{k-1}
        r = 2.0 * q[..., 1:] - q[..., :-1]
        err = np.abs(np.diff(r, axis=-1)) + floor[..., 2:]
        k = np.argmin(err, axis=-1)
        val = np.take_along_axis(r[..., 1:], k[..., None], axis=-1)[..., 0]
        out.append((val, np.take_along_axis(err, k[..., None], axis=-1)[..., 0], k + 2))
        qs.append(q)
    (vm, em, km), (vp, ep, kp) = out
    # sigma(a, a - h) <= phi- <= phi+ <= sigma(a, a + h)
    k = np.maximum(km, kp)[..., None]
    lo = np.take_along_axis(qs[0], k, axis=-1)[..., 0]
    hi = np.take_along_axis(qs[1], k, axis=-1)[..., 0]
    vm = np.clip(vm, lo, hi)
    vp = np.clip(vp, lo, hi)
    swap = vm > vp
    mid = 0.5 * (vm + vp)
    return np.where(swap, mid, vm), em, np.where(swap, mid, vp), ep


def phi_one_sided(n: NormExpr, alpha, side: str, *, with_error: bool = False):
    """phi-(alpha) (side "-") or phi+(alpha) (side "+").

    The limit is taken along h = 1e-2 * 2**-k, k <= 30, using monotonicity of
    sigma(alpha, .) for a certified enclosure and extrapolation for the value.
    With ``with_error=True`` returns ``(value, bracket_width)``.
    """
    _check_planar(n)
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    vm, em, vp, ep = _phi_limits(n, alpha)
    val, err = (vp, ep) if side == "+" else (vm, em)
    if with_error:
        return _out(val), _out(err)
    return _out(val)


def g_planar(n: NormExpr, alpha, beta, a=1.0, b=1.0) -> GPair:
    """g and the norm angle for the pair (a Q_alpha, b Q_beta) from r, sigma and phi."""
    _check_planar(n)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("a and b must be positive")
    alpha, beta, a, b = np.broadcast_arrays(alpha, beta, a, b)
    d = np.remainder(alpha - beta + np.pi, TWO_PI) - np.pi  # in [-pi, pi)
    s = np.sin(d)
    c = np.cos(d)
    special = np.abs(s) <= SIN_TOL
    r_a = 1.0 / n._eval(_unit(alpha))
    pre = a * b / r_a**2

    # phi depends on alpha only; evaluate once per distinct angle
    ua, inv = np.unique(alpha, return_inverse=True)
    phim, em, phip, ep = (v[inv].reshape(alpha.shape) for v in _phi_limits(n, ua))
    cot_m = 1.0 / np.tan(phim)
    cot_p = 1.0 / np.tan(phip)
    A = 0.5 * (cot_m + cot_p)
    safe_d = np.where(special, 0.5 * np.pi, d)
    cot_sig, _ = _cot_sigma(n, alpha, alpha - safe_d)
    cot_d = np.cos(safe_d) / np.sin(safe_d)

    g = pre * (c + A * s)
    g1 = pre * (c + cot_m * s)
    g2 = pre * (c + cot_p * s)
    g_minus = np.minimum(g1, g2)
    g_plus = np.maximum(g1, g2)
    phi_err = (em / np.sin(phim) ** 2 + ep / np.sin(phip) ** 2) * pre * np.abs(s)
    width = (g_plus - g_minus) + phi_err
    raw_cos = (cot_d + A) / (cot_d + cot_sig)
    with np.errstate(divide="ignore", invalid="ignore"):
        tan_sq = (cot_sig - A) / (2 * cot_d + cot_sig + A)
    tan_sq = np.maximum(tan_sq, 0.0)

    same = special & (c > 0)
    opp = special & (c < 0)
    g = np.where(same, pre, np.where(opp, -pre, g))
    g_minus = np.where(special, g, g_minus)
    g_plus = np.where(special, g, g_plus)
    width = np.where(special, 0.0, width)
    raw_cos = np.where(same, 1.0, np.where(opp, -1.0, raw_cos))
    tan_sq = np.where(same, 0.0, np.where(opp, np.inf, tan_sq))
    cos = np.clip(raw_cos, -1.0, 1.0)
    f = _out
    return GPair(f(g_minus), f(g_plus), f(g), f(cos), f(tan_sq), f(width), "numeric",
                 f(np.abs(raw_cos - cos)))


def _refine_extreme(n: NormExpr, t: np.ndarray, r: np.ndarray, want_max: bool, rounds: int = 10):
    sign = -1.0 if want_max else 1.0
    h = t[1] - t[0]
    best = t[np.argsort(sign * r)[:3]]
    val = np.min(sign * r)
    offs = np.arange(-10, 11)
    for _ in range(rounds):
        h /= 10.0
        cand = (best[:, None] + h * offs).ravel()
        rv = 1.0 / n._eval(_unit(cand))
        order = np.argsort(sign * rv)
        val = min(val, sign * rv[order[0]])
        best = cand[order[:3]]
    return sign * val


@dataclass(frozen=True, eq=False)
class PolarProfile:
    """Sampled polar radius of a planar norm, with refined extremes."""

    norm: NormExpr
    grid: np.ndarray
    r_values: np.ndarray
    r_min: float
    r_max: float
    _phi: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, n: NormExpr, grid: int = 720) -> "PolarProfile":
        _check_planar(n)
        t = np.arange(grid) * (TWO_PI / grid)
        r = 1.0 / n._eval(_unit(t))
        return cls(n, t, r, _refine_extreme(n, t, r, False), _refine_extreme(n, t, r, True))

    def r(self, t):
        return radial(self.norm, t)

    def sigma(self, alpha, beta):
        return sigma(self.norm, alpha, beta)

    def phi(self, alpha, side):
        return phi_one_sided(self.norm, alpha, side)

    def phi_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(phi-, phi+, err-, err+) on the profile grid (computed once)."""
        if "table" not in self._phi:
            self._phi["table"] = _phi_limits(self.norm, self.grid)
        vm, em, vp, ep = self._phi["table"]
        return vm, vp, em, ep

    def smooth_flags(self, tol: float = SMOOTH_TOL) -> np.ndarray:
        vm, vp, _, _ = self.phi_table()
        return (vp - vm) <= tol

    def to_csv(self, fh: Optional[io.TextIOBase] = None, tol: float = SMOOTH_TOL) -> str:
        """Write columns t, r, phi_minus, phi_plus, smooth_flag; returns the text."""
        vm, vp, _, _ = self.phi_table()
        smooth = self.smooth_flags(tol)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "r", "phi_minus", "phi_plus", "smooth_flag"])
        for row in zip(self.grid, self.r_values, vm, vp, smooth):
            w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])),
                        repr(float(row[3])), int(row[4])])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def read_profile_csv(text: str) -> dict:
    """Parse the polar-profile CSV back into column arrays."""
    rows = list(csv.DictReader(io.StringIO(text)))
    out = {k: np.array([float(r[k]) for r in rows]) for k in ("t", "r", "phi_minus", "phi_plus")}
    out["smooth_flag"] = np.array([int(r["smooth_flag"]) for r in rows], dtype=bool)
    return out
