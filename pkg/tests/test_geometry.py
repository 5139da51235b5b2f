import json
import math

import numpy as np
import pytest

from normangle import corpus
from normangle.geometry import (
    DEFAULT_EPS,
    angle_modulus,
    compare_extreme_rays,
    convexity_modulus,
    convexity_report,
    flatness,
    strict_convexity_witness,
    vertex_angles,
)
from normangle.gfunc import norm_angle
from normangle.norms import parse_norm

from . import oracles

PI = math.pi
CIRCLE = corpus.norm("euclid")


def test_flatness_examples():
    assert flatness(CIRCLE, 0.7, 0.1) == pytest.approx(oracles.FROZEN["circle-flatness-0.1"], rel=1e-12)
    assert flatness(parse_norm("lp(inf)"), 0.0, 0.2) == pytest.approx(0.0, abs=1e-15)
    assert flatness(parse_norm("lp(1)"), PI / 4, 0.1) == pytest.approx(0.0, abs=1e-15)
    assert flatness(parse_norm("lp(1)"), 0.0, 0.1) > 1e-3


def test_hexagon_vertices():
    want = np.arctan2([0, 1, 1, 0, -1, -1], [1, 0.5, -0.5, -1, -0.5, 0.5]) % (2 * PI)
    got = vertex_angles(corpus.norm("hexagon")).vertex_angles
    assert np.allclose(got, np.sort(want), atol=1e-4)


@pytest.mark.parametrize("name", ["euclid", "q1", "q-sum", "lp3", "lp4"])
def test_smooth_balls_have_no_corners(name):
    rays = vertex_angles(corpus.norm(name))
    assert rays.vertex_angles == [] and rays.flat_intervals == []


@pytest.mark.parametrize("name", sorted(corpus.NORM_TEXT))
def test_extreme_ray_invariants(name):
    rays = vertex_angles(corpus.norm(name))
    v = np.array(rays.vertex_angles)
    assert np.all((v >= 0) & (v < 2 * PI))
    assert list(v) == sorted(v)
    for a in v:
        mirrored = (a + PI) % (2 * PI)
        assert np.min(np.abs(np.angle(np.exp(1j * (v - mirrored))))) <= 1e-9
    for lo, hi in rays.flat_intervals:
        assert hi > lo
        for a in v:
            for shift in (0.0, 2 * PI):
                assert not (lo + 1e-9 < a + shift < hi - 1e-9)


def test_vertex_tolerance_configurable():
    # a very blunt corner: q-max meets at a small angle jump
    n = corpus.norm("q-max")
    assert len(vertex_angles(n, tol=1e-3).vertex_angles) == 4
    assert vertex_angles(n, tol=3.0).vertex_angles == []


def test_compare_rays():
    a, b = corpus.norm("weighted-l1-a"), corpus.norm("weighted-l1-b")
    cmp_ = compare_extreme_rays(a, b)
    assert cmp_.consistent and len(cmp_.matched) == 4
    assert cmp_.verdict == "consistent with angular equivalence"
    cmp_ = compare_extreme_rays(parse_norm("lp(1)"), parse_norm("lp(inf)"))
    assert cmp_.verdict == "extreme-ray mismatch"
    assert np.allclose(cmp_.unmatched_first, [0, PI / 2, PI, 1.5 * PI], atol=1e-4)
    d = cmp_.to_dict()
    assert d["consistent"] is False and len(d["unmatched_second"]) == 4


def test_l1_witness_example():
    n = parse_norm("lp(1)")
    _, th = norm_angle(n, [0.5, 0.5], [1.0, 0.0])
    assert th == 0.0
    y, z = strict_convexity_witness(n, 2)
    assert abs(y[0] * z[1] - y[1] * z[0]) > 1e-3


@pytest.mark.parametrize("text,samples", [("quad([[3,1],[1,2]])", 100_000), ("lp(4)", 10_000),
                                          ("quad([[2,0.5,0],[0.5,1,0.2],[0,0.2,3]])", 10_000)])
def test_no_witness_for_strictly_convex(text, samples):
    assert strict_convexity_witness(parse_norm(text), samples=samples) is None


def test_witness_in_3d_flat_norm():
    w = strict_convexity_witness(parse_norm("lp(inf)"), 3, samples=20_000)
    assert w is not None


def test_l1_moduli_vanish():
    n = parse_norm("lp(1)")
    d = convexity_modulus(n, 2, [0.1, 0.25, 0.5])
    t = angle_modulus(n, 2, [0.1, 0.25, 0.5])
    assert all(abs(v) <= 1e-6 for v in d.values())
    assert all(abs(v) <= 1e-6 for v in t.values())


@pytest.mark.parametrize("name", ["euclid", "lp1", "lp4", "hexagon", "q-max"])
def test_modulus_upper_edge(name):
    d = convexity_modulus(corpus.norm(name), 2, [2 * (1 - 1e-9)], samples=2000)
    assert d[2 * (1 - 1e-9)] <= 1.0


@pytest.mark.parametrize("eps", DEFAULT_EPS)
def test_circle_moduli_closed_form(eps):
    d = convexity_modulus(CIRCLE, 2, [eps])[eps]
    t = angle_modulus(CIRCLE, 2, [eps])[eps]
    assert d == pytest.approx(oracles.circle_delta(eps), abs=2e-3)
    assert t == pytest.approx(oracles.circle_angle_modulus(eps), abs=2e-3)
    # sampled infima never undershoot the true value by more than rounding
    assert d >= oracles.circle_delta(eps) - 1e-9
    assert t >= oracles.circle_angle_modulus(eps) - 1e-9


def test_circle_moduli_3d():
    n = parse_norm("lp(2)")
    d = convexity_modulus(n, 3, [1.0], samples=4000)[1.0]
    t = angle_modulus(n, 3, [1.0], samples=4000)[1.0]
    assert d == pytest.approx(oracles.circle_delta(1.0), abs=2e-3)
    assert t == pytest.approx(oracles.circle_angle_modulus(1.0), abs=2e-3)


@pytest.mark.parametrize("name", sorted(corpus.NORM_TEXT))
def test_moduli_monotone_and_consistent(name):
    n = corpus.norm(name)
    d = convexity_modulus(n, 2, samples=4000, grid=360)
    t = angle_modulus(n, 2, samples=4000, grid=360)
    ds, ts = [d[e] for e in DEFAULT_EPS], [t[e] for e in DEFAULT_EPS]
    assert all(b >= a - 1e-3 for a, b in zip(ds, ds[1:]))
    assert all(b >= a - 1e-3 for a, b in zip(ts, ts[1:]))
    for e in DEFAULT_EPS:
        assert (d[e] > 1e-9) == (t[e] > 1e-9), (e, d[e], t[e])


def test_convexity_reports():
    rep = convexity_report(parse_norm("lp(1)"), 2, samples=2000)
    assert not rep.strictly_convex and rep.witness is not None
    assert rep.verdict == "not strictly convex"
    rep = convexity_report(parse_norm("lp(3)"), 2, samples=2000)
    assert rep.strictly_convex and rep.uniformly_convex
    assert rep.verdict == "uniformly convex (sampled)"
    d = json.loads(rep.to_json())
    assert d["qualifier"] == "sampled" and d["witness"] is None
    assert set(d["delta_table"]) == {repr(float(e)) for e in DEFAULT_EPS}


@pytest.mark.parametrize("a,b", corpus.EQUIVALENT_PAIRS)
def test_equivalent_pairs_share_diagnostics(a, b):
    n1, n2 = corpus.norm(a), corpus.norm(b)
    assert compare_extreme_rays(n1, n2).consistent
    w1 = strict_convexity_witness(n1, 2, samples=2000)
    w2 = strict_convexity_witness(n2, 2, samples=2000)
    assert (w1 is None) == (w2 is None)


@pytest.mark.parametrize("a,b", [("lp1", "lpinf"), ("q1", "q-max")])
def test_non_equivalent_pairs_trigger_a_discriminator(a, b):
    n1, n2 = corpus.norm(a), corpus.norm(b)
    rays_differ = not compare_extreme_rays(n1, n2).consistent
    w1 = strict_convexity_witness(n1, 2, samples=2000)
    w2 = strict_convexity_witness(n2, 2, samples=2000)
    assert rays_differ or ((w1 is None) != (w2 is None))
