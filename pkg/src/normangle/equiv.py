"""Angular and topological equivalence between two norms.

The angular constant C is the least number with tan(theta_2/2) <= C tan(theta_1/2)
for all nonzero pairs. Because theta(x, -y) = pi - theta(x, y), the ratio
R(x, y) = tan(theta_2/2) / tan(theta_1/2) satisfies R(x, -y) = 1 / R(x, y), so a
finite C also bounds the reverse comparison. Scans only ever give a lower
bound on C (an empirical supremum).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special
from scipy.stats import qmc

from .errors import DimensionError, DomainError
from .gfunc import COLLINEAR_RTOL, g_functional
from .norms import Dual, Lp, Max, NormExpr, Quad, Scale, Sum, as_vectors
from .precise import tan_half_sq_precise

TINY = 1e-12  # tan below this counts as zero
SOLID = 1e-6  # numerator must exceed this for an infinite ratio
EXCLUDE_RTOL = 1e-6  # bracket width threshold for exceptional pairs
PRECISE_BAND = 1e-8  # tan^2 outside [band, 1/band] is recomputed in mpmath
GROWTH_PER_DECADE = 4.0
TOP_K = 10


def _pair_dim(n1: NormExpr, n2: NormExpr, dim: Optional[int]) -> int:
    dims = {d for d in (n1.dim, n2.dim, dim) if d is not None}
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop() if dims else 2


def _curved(n: NormExpr) -> bool:
    if isinstance(n, Quad):
        return True
    if isinstance(n, Lp):
        return 1 < n.p < math.inf
    if isinstance(n, (Sum, Max)):
        return any(_curved(c) for c in n.children)
    if isinstance(n, Scale):
        return _curved(n.child)
    if isinstance(n, Dual):
        return _curved(n.resolved)
    return False


def _needs_precise(n: NormExpr) -> bool:
    """Whether float64 tan^2 can lose all digits for nearly collinear pairs.

    Piecewise-linear norms give exact zeros on faces, and inner-product norms
    already use a cancellation-free formula.
    """
    while isinstance(n, (Scale, Dual)):
        n = n.child if isinstance(n, Scale) else n.resolved
    if isinstance(n, Quad) or (isinstance(n, Lp) and n.p == 2):
        return False
    return _curved(n)


def _tan_sq(n: NormExpr, x: np.ndarray, y: np.ndarray, precise: bool = True,
            exclude_rtol: float = EXCLUDE_RTOL):
    """tan^2(theta/2) and an exceptional-pair mask for stacked pairs."""
    gp = g_functional(n, x, y)
    t2 = np.atleast_1d(np.asarray(gp.tan_half_sq, dtype=float)).copy()
    scale = np.atleast_1d(n._eval(x) * n._eval(y))
    bad = np.atleast_1d(gp.bracket_width) > exclude_rtol * scale
    if precise:
        xs = np.broadcast_to(x, np.broadcast_shapes(x.shape, y.shape)).reshape(-1, x.shape[-1])
        ys = np.broadcast_to(y, xs.shape[:-1] + (y.shape[-1],)).reshape(xs.shape)
        c = np.sum(xs * ys, axis=-1) / np.sum(xs * xs, axis=-1)
        resid = np.linalg.norm(ys - c[:, None] * xs, axis=-1)
        collinear = resid <= COLLINEAR_RTOL * np.linalg.norm(ys, axis=-1)
        band = (t2 < PRECISE_BAND) | (t2 > 1 / PRECISE_BAND)
        if not _needs_precise(n):
            # exact zeros and infinities are genuine face pairs here; only
            # rounding-level residues need the extended path
            band &= (t2 > 0) & np.isfinite(t2)
        redo = np.flatnonzero(~collinear & band)
        for i in redo:
            t2[i] = tan_half_sq_precise(n, xs[i], ys[i])
    return t2, bad


def _ratio_from_tans(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """tan2/tan1 with the undefined (NaN) and infinite conventions."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        u1 = np.where(t1 > 0, 1.0 / t1, np.inf)
        u2 = np.where(t2 > 0, 1.0 / t2, np.inf)
        # near theta = pi compare cotangents, which are small and accurate there
        big = (t1 >= 1) & (t2 >= 1)
        out = np.where(big, u1 / u2, t2 / t1)
        lo1, lo2 = t1 < TINY, t2 < TINY
        out = np.where(lo1 & lo2, np.nan, out)
        out = np.where(lo1 & ~lo2, np.where(t2 >= SOLID, np.inf, np.nan), out)
        hi1, hi2 = u1 < TINY, u2 < TINY
        out = np.where(hi1 & hi2, np.nan, out)
        out = np.where(hi2 & ~hi1, np.where(u1 >= SOLID, np.inf, np.nan), out)
        out = np.where(hi1 & ~hi2, u1 / u2, out)
    return out


def _ratios(n1, n2, x, y, precise=True, exclude_rtol=EXCLUDE_RTOL):
    a, bad1 = _tan_sq(n1, x, y, precise, exclude_rtol)
    b, bad2 = _tan_sq(n2, x, y, precise, exclude_rtol)
    return _ratio_from_tans(np.sqrt(a), np.sqrt(b)), bad1 | bad2


def tan_ratio(n1: NormExpr, n2: NormExpr, x, y, *, precise: bool = True):
    """tan(theta_2/2) / tan(theta_1/2); NaN where undefined.

    Undefined when both tangents vanish (or both are infinite); +inf when the
    denominator vanishes while the numerator is at least 1e-6; tangents that
    leave double-precision resolution are recomputed at 50 digits.
    """
    x = as_vectors(x, n1.dim)
    y = as_vectors(y, n1.dim)
    _pair_dim(n1, n2, x.shape[-1])
    if np.any(np.all(x == 0, axis=-1)) or np.any(np.all(y == 0, axis=-1)):
        raise DomainError("tan_ratio needs nonzero vectors")
    r, _ = _ratios(n1, n2, x, y, precise)
    if x.ndim == 1 and y.ndim == 1:
        return float(r[0])
    return r


def symmetric_ratio(n1, n2, x, y) -> float:
    """max(R, 1/R): the constant demanded by the pair in either direction."""
    r = tan_ratio(n1, n2, x, y)
    if np.isnan(r):
        return r
    if r == 0:
        return math.inf
    return max(r, 1.0 / r)


@dataclass
class EquivReport:
    """Scanned estimate of the angular constant (an empirical supremum)."""

    c_hat: float
    witness: Optional[Tuple[List[float], List[float]]]
    m_hat: float
    M_hat: float
    diverging: bool
    divergence_schedule: List[Tuple[float, float]]
    samples_used: int
    seed: int
    excluded: int = 0
    label: str = field(default="empirical supremum")

    @property
    def verdict(self) -> str:
        if self.diverging:
            return "diverging"
        if not math.isfinite(self.c_hat):
            return "not equivalent"
        return "equivalent-consistent"

    def to_dict(self) -> dict:
        def num(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "c_hat": num(self.c_hat),
            "witness": [list(self.witness[0]), list(self.witness[1])] if self.witness else None,
            "m_hat": float(self.m_hat),
            "M_hat": float(self.M_hat),
            "diverging": bool(self.diverging),
            "schedule": [[float(s), num(r)] for s, r in self.divergence_schedule],
            "seed": int(self.seed),
            "samples_used": int(self.samples_used),
            "excluded": int(self.excluded),
            "verdict": self.verdict,
            "growth_per_decade": float(self.growth_per_decade),
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    @property
    def growth_per_decade(self) -> float:
        """Smallest per-decade growth factor of the schedule (1 when flat)."""
        pts = [(s, r) for s, r in self.divergence_schedule if math.isfinite(r) and r > 0]
        rates = [(r1 / r0) ** (1 / math.log10(s0 / s1)) for (s0, r0), (s1, r1) in zip(pts, pts[1:])]
        return min(rates) if rates else 1.0

    def summary(self) -> str:
        c = f"{self.c_hat:.6g}" if math.isfinite(self.c_hat) else "inf"
        out = (f"c_hat = {c} ({self.label}), m_hat = {self.m_hat:.6g}, "
               f"M_hat = {self.M_hat:.6g}, diverging: {'yes' if self.diverging else 'no'}, "
               f"{self.verdict}")
        g = self.growth_per_decade
        if not self.diverging and math.isfinite(self.c_hat) and g >= 1.5:
            out += f" (ratio still growing {g:.2f}x per decade)"
        return out


def is_diverging(schedule: Sequence[Tuple[float, float]], growth: float = GROWTH_PER_DECADE,
                 decades: int = 3) -> bool:
    """True when the ratio grows by at least ``growth`` per decade of s over the
    last ``decades`` decades of the schedule."""
    pts = [(s, r) for s, r in schedule if s > 0 and not np.isnan(r)]
    if len(pts) < 2:
        return False
    s_last = pts[-1][0]
    span = math.log10(pts[0][0] / s_last)
    if span < decades - 1e-9:
        return False
    window = [p for p in pts if math.log10(p[0] / s_last) <= decades + 1e-9]
    for (s0, r0), (s1, r1) in zip(window, window[1:]):
        if math.isinf(r1):
            continue
        if math.isinf(r0) or r1 < r0 * growth ** math.log10(s0 / s1):
            return False
    return True


def _unit2(t):
    t = np.asarray(t, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def _top(ratio: np.ndarray, k: int) -> np.ndarray:
    finite = np.where(np.isfinite(ratio), ratio, -np.inf)
    order = np.argsort(-finite, kind="stable")
    return order[: min(k, int(np.sum(np.isfinite(ratio))))]


class _Tracker:
    def __init__(self, exclude_rtol: float = EXCLUDE_RTOL):
        self.exclude_rtol = exclude_rtol
        self.best = -np.inf
        self.witness = None
        self.samples = 0
        self.excluded = 0
        self.infinite = False

    def add(self, x, y, ratio, bad):
        self.samples += ratio.size
        self.excluded += int(np.sum(bad))
        ratio = np.where(bad, np.nan, ratio)
        if np.any(np.isposinf(ratio)) and not self.infinite:
            i = int(np.flatnonzero(np.isposinf(ratio))[0])
            self.infinite = True
            self.best = math.inf
            self.witness = (x[i], y[i])
        if not self.infinite:
            finite = np.where(np.isfinite(ratio), ratio, -np.inf)
            i = int(np.argmax(finite))
            if finite[i] > self.best:
                self.best = float(finite[i])
                self.witness = (x[i], y[i])
        return ratio


def _scan_2d(n1, n2, grid, refine, tracker):
    na = max(grid // 2, 4)
    alpha = np.arange(na) * (np.pi / na)  # theta(-x, -y) = theta(x, y)
    beta = np.arange(grid) * (2 * np.pi / grid)
    A, B = np.meshgrid(alpha, beta, indexing="ij")
    A, B = A.ravel(), B.ravel()
    X, Y = _unit2(A), _unit2(B)
    r, bad = _ratios(n1, n2, X, Y, exclude_rtol=tracker.exclude_rtol)
    r = tracker.add(X, Y, r, bad)
    h = 2 * np.pi / grid
    schedule = [(h, tracker.best)]
    pool_a, pool_b, pool_r = A, B, r
    offs = np.arange(-10, 11)  # each zoom covers the previous cell
    for k in range(1, refine + 1):
        if tracker.infinite:
            break
        hk = h / 10.0**k
        idx = _top(pool_r, TOP_K)
        if idx.size == 0:
            break
        ca = (pool_a[idx][:, None, None] + hk * offs[None, :, None]) + 0 * offs[None, None, :]
        cb = (pool_b[idx][:, None, None] + 0 * offs[None, :, None]) + hk * offs[None, None, :]
        ca, cb = ca.ravel(), cb.ravel()
        X, Y = _unit2(ca), _unit2(cb)
        r, bad = _ratios(n1, n2, X, Y, exclude_rtol=tracker.exclude_rtol)
        r = tracker.add(X, Y, r, bad)
        finite = np.where(np.isfinite(r), r, -np.inf)
        schedule.append((hk, float(np.max(finite)) if finite.size else float("nan")))
        pool_a = np.concatenate([pool_a[idx], ca])
        pool_b = np.concatenate([pool_b[idx], cb])
        pool_r = np.concatenate([pool_r[idx], r])
    return schedule


def _halton_directions(dim: int, count: int, seed: int, groups: int = 1) -> List[np.ndarray]:
    sampler = qmc.Halton(d=dim * groups, scramble=True, seed=seed)
    u = sampler.random(count)
    z = special.ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    out = []
    for g in range(groups):
        v = z[:, g * dim:(g + 1) * dim]
        out.append(v / np.linalg.norm(v, axis=1, keepdims=True))
    return out


def _scan_nd(n1, n2, dim, samples, refine, seed, tracker):
    X, Y = _halton_directions(dim, samples, seed, groups=2)
    r, bad = _ratios(n1, n2, X, Y, exclude_rtol=tracker.exclude_rtol)
    r = tracker.add(X, Y, r, bad)
    rng = np.random.default_rng(seed)
    radius = 0.1
    schedule = [(radius, tracker.best)]
    px, py, pr = X, Y, r
    per = 120
    for k in range(1, refine + 1):
        if tracker.infinite:
            break
        rad = radius / 10.0 ** (k - 1)
        idx = _top(pr, TOP_K)
        if idx.size == 0:
            break
        cx = np.repeat(px[idx], per, axis=0)
        cy = np.repeat(py[idx], per, axis=0)
        cx = cx + rad * rng.standard_normal(cx.shape)
        cy = cy + rad * rng.standard_normal(cy.shape)
        cx /= np.linalg.norm(cx, axis=1, keepdims=True)
        cy /= np.linalg.norm(cy, axis=1, keepdims=True)
        r, bad = _ratios(n1, n2, cx, cy, exclude_rtol=tracker.exclude_rtol)
        r = tracker.add(cx, cy, r, bad)
        finite = np.where(np.isfinite(r), r, -np.inf)
        schedule.append((rad / 10.0, float(np.max(finite))))
        px = np.concatenate([px[idx], cx])
        py = np.concatenate([py[idx], cy])
        pr = np.concatenate([pr[idx], r])
    return schedule


def topological_constants(n1: NormExpr, n2: NormExpr, dim: Optional[int] = None, samples: int = 720,
                          *, seed: int = 0, rounds: int = 10) -> Tuple[float, float]:
    """(m_hat, M_hat): extremes of N2(u)/N1(u) over sampled directions."""
    dim = _pair_dim(n1, n2, dim)
    if dim == 2:
        t = np.arange(samples) * (np.pi / samples)
        h = np.pi / samples
        U = _unit2(t)
    else:
        U = _halton_directions(dim, samples, seed)[0]
        h = 0.1
    q = n2._eval(U) / n1._eval(U)
    out = []
    rng = np.random.default_rng(seed)
    for sign in (1.0, -1.0):
        best_u = U[np.argsort(sign * q, kind="stable")[:3]]
        val = np.min(sign * q)
        step = h
        offs = np.arange(-10, 11)
        for _ in range(rounds):
            step /= 10.0 if dim == 2 else 3.0
            if dim == 2:
                base = np.arctan2(best_u[:, 1], best_u[:, 0])
                cand = _unit2((base[:, None] + step * offs).ravel())
            else:
                cand = np.repeat(best_u, 40, axis=0)
                cand = cand + step * rng.standard_normal(cand.shape)
                cand = np.concatenate([best_u, cand])
            cq = n2._eval(cand) / n1._eval(cand)
            order = np.argsort(sign * cq, kind="stable")
            val = min(val, float(sign * cq[order[0]]))
            best_u = cand[order[:3]]
        out.append(sign * val)
    return float(out[0]), float(out[1])


def scan_constant(n1: NormExpr, n2: NormExpr, dim: Optional[int] = None, *, grid: int = 720,
                  refine: int = 3, seed: int = 0, samples: int = 10_000,
                  exclude_rtol: float = EXCLUDE_RTOL) -> EquivReport:
    """Empirical supremum of tan_ratio over direction pairs.

    2D: angle grid (grid/2 values of alpha in [0, pi), grid values of beta)
    followed by ``refine`` rounds of 10x zoom around the top maxima. nD:
    ``samples`` scrambled-Halton direction pairs followed by random local
    refinement. Pairs whose g bracket exceeds 1e-6 N(x)N(y) for either norm
    (``exclude_rtol``) are excluded as exceptional. The schedule records (spacing, best ratio of
    that round) and drives the divergence verdict.
    """
    dim = _pair_dim(n1, n2, dim)
    if grid < 8:
        raise ValueError("grid must be at least 8")
    tracker = _Tracker(exclude_rtol)
    if dim == 2:
        schedule = _scan_2d(n1, n2, grid, refine, tracker)
        m_hat, M_hat = topological_constants(n1, n2, 2, grid)
    else:
        schedule = _scan_nd(n1, n2, dim, samples, refine, seed, tracker)
        m_hat, M_hat = topological_constants(n1, n2, dim, samples, seed=seed)
    c_hat = tracker.best if tracker.witness is not None else float("nan")
    diverging = (not tracker.infinite) and is_diverging(schedule)
    wit = None
    if tracker.witness is not None:
        wit = ([float(v) for v in tracker.witness[0]], [float(v) for v in tracker.witness[1]])
    return EquivReport(c_hat, wit, m_hat, M_hat, diverging, schedule, tracker.samples, seed,
                       tracker.excluded)


def _pencil_ratio(A1: np.ndarray, A2: np.ndarray) -> float:
    d = A1.shape[0]
    if d == 1:
        return 1.0
    if d == 2:
        det1 = A1[0, 0] * A1[1, 1] - A1[0, 1] ** 2
        det2 = A2[0, 0] * A2[1, 1] - A2[0, 1] ** 2
        T = A1[0, 0] * A2[1, 1] + A1[1, 1] * A2[0, 0] - 2 * A1[0, 1] * A2[0, 1]
        D = math.sqrt(max(T * T - 4 * det1 * det2, 0.0))
        # lambda_max / lambda_min = (T + D)^2 / (4 det1 det2)
        return (T + D) / (2 * math.sqrt(det1 * det2))
    L = np.linalg.cholesky(A1)
    Li = linalg.solve_triangular(L, np.eye(d), lower=True)
    C = Li @ A2 @ Li.T
    C = 0.5 * (C + C.T)
    if d == 3:
        lam = _sym3_eigs(C)
    else:
        lam = linalg.eigh(C, eigvals_only=True)
    return math.sqrt(lam[-1] / lam[0])


def _sym3_eigs(C: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix via the trigonometric cubic solution."""
    p1 = C[0, 1] ** 2 + C[0, 2] ** 2 + C[1, 2] ** 2
    q = np.trace(C) / 3
    if p1 == 0:
        return np.sort(np.diag(C))
    p2 = (C[0, 0] - q) ** 2 + (C[1, 1] - q) ** 2 + (C[2, 2] - q) ** 2 + 2 * p1
    p = math.sqrt(p2 / 6)
    Bm = (C - q * np.eye(3)) / p
    r = np.clip(np.linalg.det(Bm) / 2, -1.0, 1.0)
    phi = math.acos(r) / 3
    e1 = q + 2 * p * math.cos(phi)
    e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    e2 = 3 * q - e1 - e3
    return np.sort([e1, e2, e3])


def wielandt_bound(q1: NormExpr, q2: NormExpr) -> float:
    """Sharp angular constant M/m between two inner-product norms."""
    if not (isinstance(q1, Quad) and isinstance(q2, Quad)):
        raise TypeError("wielandt_bound needs two quad norms")
    if q1.A.shape != q2.A.shape:
        raise DimensionError("quad dimensions differ")
    return _pencil_ratio(q1.A, q2.A)


def divergence_probe(n1: NormExpr, n2: NormExpr, u, v, *, s0: float = 0.1, factor: float = 0.1,
                     steps: int = 5) -> List[Tuple[float, float]]:
    """(s, max(R, 1/R)) along y = u + s v with s = s0 * factor**k.

    The symmetric form is used because R(x, -y) = 1 / R(x, y), so either
    orientation of a blow-up rules out equivalence.
    """
    u = as_vectors(u, n1.dim)
    v = as_vectors(v, n1.dim)
    _pair_dim(n1, n2, u.shape[-1])
    perp = v - (u @ v) / (u @ u) * u
    if np.linalg.norm(perp) <= 1e-12 * np.linalg.norm(v):
        raise DomainError("u and v must be linearly independent")
    if not (0 < factor < 1) or s0 <= 0 or steps < 1:
        raise ValueError("need s0 > 0, 0 < factor < 1 and steps >= 1")
    out = []
    for k in range(steps):
        s = s0 * factor**k
        out.append((s, float(symmetric_ratio(n1, n2, u, u + s * v))))
    return out


def check_sum_identity(n1: NormExpr, n2: NormExpr, x, y, *, method: str = "auto"):
    """N3(y) cos theta_3 - N1(y) cos theta_1 - N2(y) cos theta_2 with N3 = N1 + N2.

    ``method`` applies to N3 only; ``"numeric"`` evaluates it by difference
    quotients so the identity is tested against an independent path.
    """
    n3 = Sum((n1, n2))
    x = as_vectors(x, n3.dim)
    y = as_vectors(y, n3.dim)
    if np.any(np.all(x == 0, axis=-1)) or np.any(np.all(y == 0, axis=-1)):
        raise DomainError("check_sum_identity needs nonzero vectors")
    # N(y) cos theta = g / N(x)
    parts = []
    for n, m in ((n3, method), (n1, "auto"), (n2, "auto")):
        parts.append(np.asarray(g_functional(n, x, y, method=m).g) / n._eval(x))
    res = parts[0] - parts[1] - parts[2]
    return float(res) if np.ndim(res) == 0 else res
