"""Reproduction table of the worked numeric examples, used by ``normangle paper``.

Each check returns rows (key, quantity, computed, expected, tolerance, ok).
Expected values come from closed forms evaluated independently of the
library's g-functional code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import mpmath as mp
import numpy as np

from . import corpus
from .equiv import divergence_probe, is_diverging, scan_constant, tan_ratio, wielandt_bound
from .geometry import compare_extreme_rays, vertex_angles
from .gfunc import g_functional
from .norms import Quad, dualize, parse_norm
from .plane import g_planar


@dataclass
class Row:
    key: str
    quantity: str
    computed: float
    expected: float
    tol: float
    ok: bool
    kind: str = "abs"  # abs, rel, le, ge, bool

    def as_list(self) -> list:
        return [self.key, self.quantity, self.computed, self.expected, self.tol, self.ok]


def _abs(key, q, got, want, tol) -> Row:
    return Row(key, q, float(got), float(want), tol, bool(abs(got - want) <= tol))


def _le(key, q, got, bound, tol=0.0) -> Row:
    return Row(key, q, float(got), float(bound), tol, bool(got <= bound + tol), "le")


def _ge(key, q, got, bound) -> Row:
    return Row(key, q, float(got), float(bound), 0.0, bool(got >= bound), "ge")


def _flag(key, q, ok: bool) -> Row:
    return Row(key, q, float(ok), 1.0, 0.0, bool(ok), "bool")


def max_pair_tan_sq(s: float):
    """Closed forms for x = (1,1), y = (1-s, 1+s) under q1 and max(q1, q2)."""
    t1 = 3 * s * s / (4 * (1 - s / 2 + math.sqrt(1 - s + s * s)) ** 2)
    t4 = (s + s * s) / (1 + math.sqrt(1 + s + s * s)) ** 2
    return t1, t4


def lp_tan_sq(p: float, s: float) -> float:
    """tan^2(theta/2) for (1,0) -> (1,s) in lp: cos theta = (1 + s^p)^(-1/p)."""
    with mp.workdps(60):
        a = mp.expm1(mp.log1p(mp.mpf(s) ** p) / p)
        return float(a / (a + 2))


def check_max_pair() -> List[Row]:
    key = "example-2.7"
    q1, q4 = corpus.norm("q1"), corpus.norm("q-max")
    rows = []
    for s in (0.1, 0.01):
        x = np.array([1.0, 1.0])
        y = np.array([1 - s, 1 + s])
        a1 = g_functional(q1, x, y)
        a4 = g_functional(q4, x, y)
        n4 = g_functional(q4, x, y, method="numeric")
        n1 = g_functional(q1, x, y, method="numeric")
        rows += [
            _abs(key, f"g1 s={s}", a1.g, 4 - 2 * s, 1e-12),
            _abs(key, f"g4- s={s}", a4.g_minus, 4 - 2 * s, 1e-12),
            _abs(key, f"g4+ s={s}", a4.g_plus, 4 + 2 * s, 1e-12),
            _abs(key, f"g4 s={s}", a4.g, 4.0, 1e-12),
            _abs(key, f"numeric g1 s={s}", n1.g, 4 - 2 * s, 1e-5),
            _abs(key, f"numeric g4- s={s}", n4.g_minus, 4 - 2 * s, 1e-5),
            _abs(key, f"numeric g4+ s={s}", n4.g_plus, 4 + 2 * s, 1e-5),
        ]
        t1, t4 = max_pair_tan_sq(s)
        rows += [
            _abs(key, f"tan^2 theta1/2 s={s}", a1.tan_half_sq, t1, 1e-9),
            _abs(key, f"tan^2 theta4/2 s={s}", a4.tan_half_sq, t4, 1e-9),
        ]
    sched = divergence_probe(q1, q4, [1, 1], [-1, 1], steps=6)
    rows.append(_flag(key, "probe ratio increasing", all(b[1] > a[1] for a, b in zip(sched, sched[1:]))))
    return rows


def check_quadratic_sum() -> List[Row]:
    from .equiv import check_sum_identity

    key = "sum-stability"
    q1, q2, q3 = corpus.norm("q1"), corpus.norm("q2"), corpus.norm("q-sum")
    res = check_sum_identity(q1, q2, [1, 0], [0, 1])
    c12 = scan_constant(q1, q2, grid=360).c_hat
    c31 = scan_constant(q1, q3, grid=360).c_hat
    return [
        _abs(key, "sum identity residual at (1,0),(0,1)", res, 0.0, 1e-12),
        _le(key, "c_hat(sum vs q1) <= sqrt(1 + c^2) * 1.001", c31, math.sqrt(1 + c12**2) * 1.001),
    ]


def check_weighted_l1() -> List[Row]:
    key = "weighted-l1-duals"
    a, b = corpus.norm("weighted-l1-a"), corpus.norm("weighted-l1-b")
    x, y = np.array([1.0, 1.0]), np.array([1.0, -1.0])
    rep = scan_constant(a, b)
    da, db = dualize(a), dualize(b)
    pts = np.random.default_rng(1).standard_normal((200, 2))
    want = np.maximum(np.abs(pts[:, 0]) / 2, np.abs(pts[:, 1]))
    cmp_ = compare_extreme_rays(da, db)
    return [
        _abs(key, "tan ratio at (1,1),(1,-1)", tan_ratio(a, b, x, y), 2.0, 1e-12),
        _abs(key, "c_hat", rep.c_hat, 2.0, 1e-3),
        _abs(key, "dual norm max(|x|/2,|y|) max error", float(np.max(np.abs(da._eval(pts) - want))), 0.0, 1e-12),
        _abs(key, "dual corner at atan(1/2)", vertex_angles(da).vertex_angles[0], math.atan(0.5), 1e-4),
        _flag(key, "dual extreme rays mismatch", not cmp_.consistent),
    ]


def check_lp_divergence() -> List[Row]:
    key = "lp-divergence"
    l2, l4 = parse_norm("lp(2)"), parse_norm("lp(4)")
    sched = divergence_probe(l2, l4, [1, 0], [0, 1], steps=4)
    rows = []
    for s, r in sched:
        want = math.sqrt(lp_tan_sq(2, s) / lp_tan_sq(4, s))
        rows.append(_abs(key, f"ratio s={s:.0e} vs closed form", r / want, 1.0, 1e-6))
        if s <= 1e-2 + 1e-15:
            rows.append(_abs(key, f"ratio s={s:.0e} vs sqrt(2)/s", r / (math.sqrt(2) / s), 1.0, 0.05))
    rows.append(_flag(key, "verdict diverging", is_diverging(sched)))
    same = divergence_probe(l4, l4, [1, 0], [0, 1], steps=4)
    rows.append(_le(key, "max |ratio - 1| for p = q", max(abs(r - 1) for _, r in same), 0.01))
    return rows


def check_wielandt(pairs: int = 10, seed: int = 0) -> List[Row]:
    key = "wielandt"
    q1, q2 = corpus.norm("q1"), corpus.norm("q2")
    rows = [_abs(key, "M/m for diag(3,1), diag(1,3)", wielandt_bound(q1, q2), 3.0, 1e-10)]
    rng = np.random.default_rng(seed)
    worst_excess, worst_tight = 0.0, math.inf
    for i in range(pairs):
        d = 2 + i % 2
        A, B = (_random_spd(rng, d) for _ in range(2))
        na, nb = Quad(A), Quad(B)
        w = wielandt_bound(na, nb)
        rep = scan_constant(na, nb, grid=180, samples=2000, seed=seed + i)
        worst_excess = max(worst_excess, rep.c_hat / w - 1)
        worst_tight = min(worst_tight, rep.c_hat / w)
    rows.append(_le(key, "max sampled ratio / (M/m) - 1", worst_excess, 1e-6))
    rows.append(_ge(key, "min c_hat / (M/m)", worst_tight, 0.9))
    return rows


def _random_spd(rng, d: int) -> np.ndarray:
    M = rng.standard_normal((d, d))
    A = M @ M.T + 0.2 * np.eye(d)
    return 0.5 * (A + A.T)


def check_polygon_rays() -> List[Row]:
    key = "polygon-rays"
    v1 = vertex_angles(parse_norm("lp(1)")).vertex_angles
    vi = vertex_angles(parse_norm("lp(inf)")).vertex_angles
    want1 = [0, math.pi / 2, math.pi, 1.5 * math.pi]
    wanti = [math.pi / 4, 0.75 * math.pi, 1.25 * math.pi, 1.75 * math.pi]
    err1 = max(abs(a - b) for a, b in zip(v1, want1)) if len(v1) == 4 else math.inf
    erri = max(abs(a - b) for a, b in zip(vi, wanti)) if len(vi) == 4 else math.inf
    return [
        _le(key, "lp(1) corner error", err1, 1e-4),
        _le(key, "lp(inf) corner error", erri, 1e-4),
        _flag(key, "lp(1) vs lp(inf) mismatch", not compare_extreme_rays(parse_norm("lp(1)"), parse_norm("lp(inf)")).consistent),
    ]


def check_planar_closed_form() -> List[Row]:
    key = "planar-closed-form"
    rows = []
    t = np.arange(36) * (2 * math.pi / 36) + 0.01
    A, B = np.meshgrid(t, t + 0.05, indexing="ij")
    x, y = np.stack([np.cos(A), np.sin(A)], -1), np.stack([np.cos(B), np.sin(B)], -1)
    for name in ("q1", "lp3"):
        n = corpus.norm(name)
        gp = g_planar(n, A, B)
        gf = g_functional(n, x, y)
        scale = n._eval(x) * n._eval(y)
        rows.append(_le(key, f"{name} max |g_planar - g| / scale", float(np.max(np.abs(gp.g - gf.g) / scale)), 1e-6))
    return rows


CHECKS: Dict[str, Callable[[], List[Row]]] = {
    "example-2.7": check_max_pair,
    "sum-stability": check_quadratic_sum,
    "weighted-l1-duals": check_weighted_l1,
    "lp-divergence": check_lp_divergence,
    "wielandt": check_wielandt,
    "polygon-rays": check_polygon_rays,
    "planar-closed-form": check_planar_closed_form,
}


def run(only: Optional[Sequence[str]] = None) -> List[Row]:
    keys = list(CHECKS) if not only else list(only)
    unknown = [k for k in keys if k not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}; choose from {', '.join(CHECKS)}")
    rows: List[Row] = []
    for k in keys:
        rows.extend(CHECKS[k]())
    return rows
