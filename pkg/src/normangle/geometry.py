"""Shape diagnostics for unit balls: corners, faces, strict and uniform convexity.

Corners are located through jumps of phi (phi+ - phi- > tol) and faces through
the chord-midpoint probe ``flatness``. Convexity moduli are sampled infima
over a shared pool of unit pairs, so each table is an upper bound on the true
modulus and is monotone in epsilon by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError
from .gfunc import g_functional
from .norms import NormExpr
from .plane import _phi_limits, _unit
from .precise import tan_half_sq_precise

TWO_PI = 2.0 * math.pi
DEFAULT_EPS = (0.1, 0.25, 0.5, 1.0, 1.5)
VERTEX_TOL = 1e-3
FLAT_TOL = 1e-6
BISECT_WIDTH = 1e-10
POSITIVE = 1e-9  # modulus values at or below this count as zero


def _planar(n: NormExpr):
    if n.dim not in (None, 2):
        raise DimensionError(f"planar analysis needs a norm on R^2, got dimension {n.dim}")


def _boundary(n: NormExpr, t) -> np.ndarray:
    """P_t = r(t) Q_t, the unit-sphere point in direction t."""
    q = _unit(t)
    return q / n._eval(q)[..., None]


def flatness(n: NormExpr, alpha, h: float):
    """1 - N((P_{alpha-h} + P_{alpha+h}) / 2); zero on a flat piece of the sphere."""
    _planar(n)
    if not 0 < h < math.pi / 2:
        raise ValueError("h must lie in (0, pi/2)")
    a = np.asarray(alpha, dtype=float)
    mid = 0.5 * (_boundary(n, a - h) + _boundary(n, a + h))
    out = 1.0 - n._eval(mid)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class ExtremeRays:
    """Corner directions and flat faces of a planar unit sphere.

    Flat intervals are closed ranges [start, end] with start in [0, 2 pi) and
    end = start + length, so a face across angle 0 has end > 2 pi.
    """

    vertex_angles: List[float]
    flat_intervals: List[Tuple[float, float]]
    tol: float

    def to_dict(self) -> dict:
        return {
            "vertex_angles": [float(v) for v in self.vertex_angles],
            "flat_intervals": [[float(a), float(b)] for a, b in self.flat_intervals],
            "tol": float(self.tol),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _jump_and_psi(n, t):
    vm, _, vp, _ = _phi_limits(n, np.asarray(t, dtype=float))
    return vp - vm, vm + t, vp + t


def _bisect_vertices(n, a, b, pa, pb, tol) -> List[float]:
    """Corners strictly inside the cells (a, b), pa = phi+(a) + a, pb = phi-(b) + b.

    A cell is split while psi rises by more than ``tol`` across it; all open
    cells of one level are evaluated together.
    """
    found: List[float] = []
    a, b, pa, pb = (np.asarray(v, dtype=float) for v in (a, b, pa, pb))
    while a.size:
        live = pb - pa > tol
        a, b, pa, pb = a[live], b[live], pa[live], pb[live]
        m = 0.5 * (a + b)
        narrow = b - a <= BISECT_WIDTH
        found.extend(float(v) for v in m[narrow])
        a, b, pa, pb, m = a[~narrow], b[~narrow], pa[~narrow], pb[~narrow], m[~narrow]
        if not a.size:
            break
        jump, psim, psip = _jump_and_psi(n, m)
        found.extend(float(v) for v in m[jump > tol])
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        pa, pb = np.concatenate([pa, psip]), np.concatenate([psim, pb])
    return found


def _dedupe_mod_pi(vals: Sequence[float], tol: float) -> List[float]:
    vals = sorted(v % math.pi for v in vals)
    out: List[float] = []
    for v in vals:
        if out and v - out[-1] <= tol:
            continue
        out.append(v)
    if len(out) > 1 and out[0] + math.pi - out[-1] <= tol:
        out.pop()
    return out


def vertex_angles(n: NormExpr, tol: float = VERTEX_TOL, *, grid: int = 720,
                  flat_tol: float = FLAT_TOL) -> ExtremeRays:
    """Corners (phi+ - phi- > tol) and flat faces of a planar unit sphere.

    A grid point is flat when flatness(t, h) < flat_tol * h**2 with h the
    grid spacing; runs of flat points give faces, whose ends are snapped to
    neighbouring corners.
    """
    _planar(n)
    if grid < 8:
        raise ValueError("grid must be at least 8")
    if grid % 2:
        grid += 1
    h = TWO_PI / grid
    half = grid // 2
    t = np.arange(half + 1) * h  # [0, pi] is enough: r has period pi
    jump, psim, psip = _jump_and_psi(n, t)
    found = [float(v) for v in t[:half][jump[:half] > tol]]
    cells = np.flatnonzero(psim[1:] - psip[:-1] > tol)
    found.extend(_bisect_vertices(n, t[cells], t[cells + 1], psip[cells], psim[cells + 1], tol))
    base = _dedupe_mod_pi(found, 1e-7)
    verts = sorted(base + [v + math.pi for v in base])

    tf = np.arange(grid) * h
    flat = flatness(n, tf, h) < flat_tol * h * h
    intervals: List[Tuple[float, float]] = []
    if flat.any() and not flat.all():
        start = int(np.flatnonzero(~flat)[0])  # rotate so no run wraps the array end
        order = (np.arange(grid) + start) % grid
        f = flat[order]
        i = 0
        while i < grid:
            if not f[i]:
                i += 1
                continue
            j = i
            while j + 1 < grid and f[j + 1]:
                j += 1
            lo = tf[order[i]] - h
            hi = lo + (j - i + 2) * h
            intervals.append((lo, hi))
            i = j + 1
    snapped = []
    for lo, hi in intervals:
        lo = _snap(lo, verts, h)
        hi = _snap(hi, verts, h)
        lo_m = lo % TWO_PI
        snapped.append((lo_m, lo_m + (hi - lo)))
    snapped.sort()
    return ExtremeRays(verts, snapped, tol)


def _snap(a: float, verts: Sequence[float], h: float) -> float:
    for v in verts:
        k = round((a - v) / TWO_PI)
        if abs(a - (v + k * TWO_PI)) <= 1.01 * h:
            return v + k * TWO_PI
    return a


@dataclass
class RayComparison:
    matched: List[Tuple[float, float]]
    unmatched_first: List[float]
    unmatched_second: List[float]
    tol: float

    @property
    def consistent(self) -> bool:
        return not self.unmatched_first and not self.unmatched_second

    @property
    def verdict(self) -> str:
        return "consistent with angular equivalence" if self.consistent else "extreme-ray mismatch"

    def to_dict(self) -> dict:
        return {
            "matched": [[float(a), float(b)] for a, b in self.matched],
            "unmatched_first": [float(v) for v in self.unmatched_first],
            "unmatched_second": [float(v) for v in self.unmatched_second],
            "consistent": self.consistent,
            "verdict": self.verdict,
            "tol": float(self.tol),
        }


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def compare_extreme_rays(n1: NormExpr, n2: NormExpr, tol: float = VERTEX_TOL, *,
                         grid: int = 720) -> RayComparison:
    """Match corner directions of two planar norms within ``tol`` radians."""
    v1 = vertex_angles(n1, tol, grid=grid).vertex_angles
    v2 = vertex_angles(n2, tol, grid=grid).vertex_angles
    used = set()
    matched = []
    lone1 = []
    for a in v1:
        best = None
        for j, b in enumerate(v2):
            if j in used:
                continue
            d = _circ_dist(a, b)
            if d <= tol and (best is None or d < best[0]):
                best = (d, j)
        if best is None:
            lone1.append(a)
        else:
            used.add(best[1])
            matched.append((a, v2[best[1]]))
    lone2 = [b for j, b in enumerate(v2) if j not in used]
    return RayComparison(matched, lone1, lone2, tol)


def _dim_of(n: NormExpr, dim: Optional[int]) -> int:
    if n.dim is not None and dim is not None and n.dim != dim:
        raise DimensionError(f"norm has dimension {n.dim}, requested {dim}")
    return n.dim or dim or 2


def _tan_half(n, X, Y) -> np.ndarray:
    t2 = np.atleast_1d(g_functional(n, X, Y).tan_half_sq)
    return np.sqrt(t2)


def _confirm_small(n, X, Y, tan: np.ndarray, cutoff: float = 1e-4, limit: int = 50) -> np.ndarray:
    """Recompute small nonzero tangents at extended precision."""
    tan = tan.copy()
    idx = np.flatnonzero((tan > 0) & (tan < cutoff))
    idx = idx[np.argsort(tan[idx], kind="stable")][:limit]
    for i in idx:
        tan[i] = math.sqrt(tan_half_sq_precise(n, X[i], Y[i]))
    return tan


def _independent(X, Y, tol=1e-3) -> np.ndarray:
    nx = np.linalg.norm(X, axis=-1)
    ny = np.linalg.norm(Y, axis=-1)
    c = np.sum(X * Y, axis=-1) / (nx * ny)
    return np.sqrt(np.maximum(1 - c * c, 0.0)) > tol


def strict_convexity_witness(n: NormExpr, dim: Optional[int] = None, samples: int = 10_000,
                             tol: float = 1e-9, *, seed: int = 0,
                             rays: Optional[ExtremeRays] = None):
    """Independent unit pair (y, z) with tan(theta(y, z)/2) <= tol, or None.

    Such a pair has g(y, z) = N(y) N(z), which forces a segment on the sphere.
    In the plane the search starts from detected faces.
    """
    dim = _dim_of(n, dim)
    rng = np.random.default_rng(seed)
    cands_x, cands_y = [], []
    if dim == 2:
        rays = rays if rays is not None else vertex_angles(n)
        for lo, hi in rays.flat_intervals:
            mid = 0.5 * (lo + hi)
            for a, b in ((mid, lo), (mid, hi), (lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo))):
                cands_x.append(_boundary(n, a))
                cands_y.append(_boundary(n, b))
        ang = rng.uniform(0, TWO_PI, size=(samples, 2))
        X = _boundary(n, ang[:, 0])
        Y = _boundary(n, ang[:, 1])
    else:
        X = rng.standard_normal((samples, dim))
        Y = rng.standard_normal((samples, dim))
        X /= n._eval(X)[:, None]
        Y /= n._eval(Y)[:, None]
    if cands_x:
        X = np.concatenate([np.array(cands_x), X])
        Y = np.concatenate([np.array(cands_y), Y])
    ok = _independent(X, Y)
    X, Y = X[ok], Y[ok]
    if len(X) == 0:
        return None
    tan = _confirm_small(n, X, Y, _tan_half(n, X, Y))
    i = int(np.argmin(tan))
    if tan[i] <= tol:
        return X[i], Y[i]
    return None


class _PairPool:
    """Unit pairs shared by every epsilon, grown by local refinement."""

    def __init__(self, n: NormExpr, dim: int, samples: int, seed: int, grid: int):
        self.n = n
        self.dim = dim
        self.rng = np.random.default_rng(seed)
        if dim == 2:
            na = max(grid // 2, 4)
            self.h = TWO_PI / grid
            a = np.arange(na) * (math.pi / na)
            b = np.arange(grid) * self.h
            A, B = np.meshgrid(a, b, indexing="ij")
            self.A, self.B = A.ravel(), B.ravel()
            X, Y = _boundary(n, self.A), _boundary(n, self.B)
        else:
            X = self.rng.standard_normal((samples, dim))
            Y = self.rng.standard_normal((samples, dim))
            X /= n._eval(X)[:, None]
            Y /= n._eval(Y)[:, None]
            # antipodal pairs keep every epsilon <= 2 feasible
            Y[: dim] = -X[: dim]
        self.X, self.Y = X, Y
        self.d = n._eval(X - Y)

    def add(self, X, Y, A=None, B=None):
        self.X = np.concatenate([self.X, X])
        self.Y = np.concatenate([self.Y, Y])
        self.d = np.concatenate([self.d, self.n._eval(X - Y)])
        if A is not None:
            self.A = np.concatenate([self.A, A])
            self.B = np.concatenate([self.B, B])

    def local(self, i: int, k: int):
        """Candidates around pool entry i at refinement level k."""
        if self.dim == 2:
            offs = np.arange(-10, 11) * (self.h / 10.0**k)
            A = (self.A[i] + offs[:, None] + 0 * offs).ravel()
            B = (self.B[i] + 0 * offs[:, None] + offs).ravel()
            return _boundary(self.n, A), _boundary(self.n, B), A, B
        rad = 0.1 / 3.0**k
        X = self.X[i] + rad * self.rng.standard_normal((200, self.dim))
        Y = self.Y[i] + rad * self.rng.standard_normal((200, self.dim))
        X /= self.n._eval(X)[:, None]
        Y /= self.n._eval(Y)[:, None]
        return X, Y, None, None


def _modulus(n, dim, eps_grid, samples, seed, grid, rounds, objective) -> Dict[float, float]:
    eps_grid = [float(e) for e in eps_grid]
    if any(not 0 < e <= 2 for e in eps_grid):
        raise ValueError("epsilon values must lie in (0, 2]")
    dim = _dim_of(n, dim)
    pool = _PairPool(n, dim, samples, seed, grid)
    vals = objective(pool.X, pool.Y)
    for e in eps_grid:
        for k in range(1, rounds + 1):
            feas = pool.d >= e
            if not feas.any():
                break
            i = int(np.flatnonzero(feas)[np.argmin(vals[feas])])
            X, Y, A, B = pool.local(i, k)
            pool.add(X, Y, A, B)
            vals = np.concatenate([vals, objective(X, Y)])
    out = {}
    for e in eps_grid:
        feas = pool.d >= e
        out[e] = float(np.min(vals[feas])) if feas.any() else math.inf
    return out


def convexity_modulus(n: NormExpr, dim: Optional[int] = None, eps_grid=DEFAULT_EPS,
                      samples: int = 10_000, *, seed: int = 0, grid: int = 720,
                      rounds: int = 4) -> Dict[float, float]:
    """Sampled delta(eps) = inf {1 - N((x+y)/2) : N(x) = N(y) = 1, N(x-y) >= eps}."""
    return _modulus(n, dim, eps_grid, samples, seed, grid, rounds,
                    lambda X, Y: np.maximum(1.0 - n._eval(0.5 * (X + Y)), 0.0))


def angle_modulus(n: NormExpr, dim: Optional[int] = None, eps_grid=DEFAULT_EPS,
                  samples: int = 10_000, *, seed: int = 0, grid: int = 720,
                  rounds: int = 4) -> Dict[float, float]:
    """Sampled delta_theta(eps) = inf tan(theta(x, y)/2) over the same pairs."""

    def objective(X, Y):
        return _confirm_small(n, X, Y, _tan_half(n, X, Y))

    return _modulus(n, dim, eps_grid, samples, seed, grid, rounds, objective)


@dataclass
class ConvexityReport:
    """Strict-convexity verdict and sampled moduli (upper bounds on the true values)."""

    strictly_convex: bool
    witness: Optional[Tuple[List[float], List[float]]]
    delta_table: Dict[float, float]
    delta_theta_table: Dict[float, float]
    vertex_angles: List[float] = field(default_factory=list)
    qualifier: str = "sampled"

    @property
    def uniformly_convex(self) -> bool:
        return all(v > POSITIVE for v in self.delta_theta_table.values())

    @property
    def verdict(self) -> str:
        if self.uniformly_convex:
            return "uniformly convex (sampled)"
        if self.strictly_convex:
            return "strictly convex (sampled)"
        return "not strictly convex"

    def to_dict(self) -> dict:
        def num(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "strictly_convex": self.strictly_convex,
            "witness": [list(map(float, self.witness[0])), list(map(float, self.witness[1]))]
            if self.witness is not None else None,
            "delta_table": {repr(float(k)): num(v) for k, v in self.delta_table.items()},
            "delta_theta_table": {repr(float(k)): num(v) for k, v in self.delta_theta_table.items()},
            "vertex_angles": [float(v) for v in self.vertex_angles],
            "qualifier": self.qualifier,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def convexity_report(n: NormExpr, dim: Optional[int] = None, eps_grid=DEFAULT_EPS,
                     samples: int = 10_000, *, seed: int = 0, grid: int = 720,
                     tol: float = 1e-9) -> ConvexityReport:
    dim = _dim_of(n, dim)
    rays = vertex_angles(n, grid=grid) if dim == 2 else None
    wit = strict_convexity_witness(n, dim, samples, tol, seed=seed, rays=rays)
    delta = convexity_modulus(n, dim, eps_grid, samples, seed=seed, grid=grid)
    dtheta = angle_modulus(n, dim, eps_grid, samples, seed=seed, grid=grid)
    w = None if wit is None else (list(map(float, wit[0])), list(map(float, wit[1])))
    return ConvexityReport(wit is None, w, delta, dtheta, rays.vertex_angles if rays else [])

