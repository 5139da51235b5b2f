import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normangle import corpus
from normangle.errors import DimensionError, DomainError
from normangle.equiv import (
    EquivReport,
    check_sum_identity,
    divergence_probe,
    is_diverging,
    scan_constant,
    symmetric_ratio,
    tan_ratio,
    topological_constants,
    wielandt_bound,
)
from normangle.norms import Quad, parse_norm

from . import oracles

CIRCLE = parse_norm("quad([[1,0],[0,1]])")


@pytest.mark.parametrize("name", sorted(corpus.NORM_TEXT))
def test_identical_norms_ratio_one(name):
    n = corpus.norm(name)
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, 200, 2))
    r = tan_ratio(n, n, x, y)
    # polygonal balls make many pairs 0/0 (same face) or inf/inf (opposite faces)
    r = r[~np.isnan(r)]
    assert len(r) > 50
    assert np.allclose(r, 1.0, rtol=1e-12)


def test_weighted_pair_ratio():
    a, b = corpus.norm("weighted-l1-a"), corpus.norm("weighted-l1-b")
    assert tan_ratio(a, b, [1, 1], [1, -1]) == pytest.approx(2.0, abs=1e-12)


def test_undefined_and_infinite_ratios():
    l1, l2 = parse_norm("lp(1)"), parse_norm("lp(2)")
    # collinear same direction: both tangents vanish
    assert math.isnan(tan_ratio(l1, l2, [1, 2], [2, 4]))
    # same face of the diamond, curved circle: 0 in the denominator only
    assert tan_ratio(l1, l2, [0.5, 0.5], [1, 0]) == math.inf
    with pytest.raises(DomainError):
        tan_ratio(l1, l2, [0, 0], [1, 0])


@pytest.mark.parametrize("pair", [("q1", "q2"), ("weighted-l1-a", "weighted-l1-b"),
                                  ("lp2", "lp4"), ("q1", "q-max"), ("hexagon", "lp3")])
def test_reciprocal_law(pair):
    n1, n2 = (corpus.norm(k) for k in pair)
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 300, 2))
    r = tan_ratio(n1, n2, x, y)
    rm = tan_ratio(n1, n2, x, -y)
    ok = np.isfinite(r) & np.isfinite(rm) & (r > 0) & (rm > 0)
    assert ok.sum() > 100
    assert np.allclose(rm[ok] * r[ok], 1.0, rtol=1e-9)
    # swapping the norms inverts the ratio
    assert np.allclose(tan_ratio(n2, n1, x, -y)[ok], 1.0 / rm[ok], rtol=1e-12)


def test_symmetric_ratio():
    a, b = corpus.norm("weighted-l1-a"), corpus.norm("weighted-l1-b")
    assert symmetric_ratio(a, b, [1, 1], [1, -1]) == pytest.approx(2.0)
    assert symmetric_ratio(b, a, [1, 1], [1, -1]) == pytest.approx(2.0)


def test_topological_constants_examples():
    m, M = topological_constants(corpus.norm("q1"), corpus.norm("q2"))
    assert m == pytest.approx(1 / math.sqrt(3), abs=1e-6)
    assert M == pytest.approx(math.sqrt(3), abs=1e-6)
    m, M = topological_constants(parse_norm("lp(1)"), parse_norm("lp(inf)"))
    assert m == pytest.approx(0.5, abs=1e-6) and M == pytest.approx(1.0, abs=1e-6)
    m, M = topological_constants(corpus.norm("hexagon"), corpus.norm("hexagon"))
    assert m == pytest.approx(1.0, abs=1e-12) and M == pytest.approx(1.0, abs=1e-12)


def test_topological_constants_3d():
    A = np.diag([1.0, 2.0, 4.0])
    m, M = topological_constants(parse_norm("lp(2)"), Quad(A), 3, samples=2000)
    assert m == pytest.approx(1.0, abs=1e-4) and M == pytest.approx(2.0, abs=1e-4)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_wielandt_against_eigh(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        M1, M2 = rng.standard_normal((2, d, d))
        A1 = M1 @ M1.T + 0.1 * np.eye(d)
        A2 = M2 @ M2.T + 0.1 * np.eye(d)
        A1, A2 = (A1 + A1.T) / 2, (A2 + A2.T) / 2
        w = wielandt_bound(Quad(A1), Quad(A2))
        assert w == pytest.approx(oracles.rayleigh_ratio(A1, A2), rel=1e-10)


def test_wielandt_trivial_cases():
    A = parse_norm("quad([[2,0.5],[0.5,1]])")
    assert wielandt_bound(A, A) == pytest.approx(1.0, abs=1e-12)
    assert wielandt_bound(A, parse_norm("quad([[8,2],[2,4]])")) == pytest.approx(1.0, abs=1e-12)
    assert wielandt_bound(corpus.norm("q1"), corpus.norm("q2")) == pytest.approx(3.0, abs=1e-10)


def test_wielandt_rejects():
    with pytest.raises(TypeError):
        wielandt_bound(parse_norm("lp(2)"), CIRCLE)
    with pytest.raises(DimensionError):
        wielandt_bound(CIRCLE, parse_norm("quad([[1,0,0],[0,1,0],[0,0,1]])"))


def test_probe_identical_norms_flat():
    sched = divergence_probe(CIRCLE, CIRCLE, [1, 0], [0, 1])
    assert len(sched) == 5
    assert all(r == pytest.approx(1.0, abs=1e-9) for _, r in sched)


def test_probe_max_pair_grows():
    sched = divergence_probe(corpus.norm("q1"), corpus.norm("q-max"), [1, 1], [-1, 1], steps=6)
    rs = [r for _, r in sched]
    assert all(b > a for a, b in zip(rs, rs[1:]))
    assert rs[-1] > 100


def test_probe_rejects_dependent_directions():
    with pytest.raises(DomainError):
        divergence_probe(CIRCLE, CIRCLE, [1, 1], [2, 2])
    with pytest.raises(ValueError):
        divergence_probe(CIRCLE, CIRCLE, [1, 0], [0, 1], factor=2)


def test_is_diverging_rules():
    fast = [(10.0 ** -k, 10.0 ** k) for k in range(1, 5)]
    slow = [(10.0 ** -k, 3.0 ** k) for k in range(1, 5)]
    short = fast[:3]
    assert is_diverging(fast)
    assert not is_diverging(slow)
    assert not is_diverging(short)
    assert not is_diverging([(0.1, 5.0), (0.01, 1.0), (0.001, 50.0), (1e-4, 500.0)])


def test_sum_identity_collinear_and_closed_form():
    q1, q2 = corpus.norm("q1"), corpus.norm("q2")
    assert check_sum_identity(q1, q2, [1, 2], [3, 6]) == pytest.approx(0.0, abs=1e-12)
    assert abs(check_sum_identity(q1, q2, [1, 0], [0, 1])) <= 1e-12
    with pytest.raises(DomainError):
        check_sum_identity(q1, q2, [0, 0], [0, 1])


@given(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), st.tuples(st.floats(-5, 5), st.floats(-5, 5)))
@settings(max_examples=80, deadline=None)
def test_sum_identity_property(x, y):
    if math.hypot(*x) < 1e-3 or math.hypot(*y) < 1e-3:
        return
    n1, n2 = parse_norm("lp(3)"), corpus.norm("q1")
    res = check_sum_identity(n1, n2, x, y)
    assert abs(res) <= 1e-8 * (n1._eval(np.array(y)) + n2._eval(np.array(y)))


def test_scan_identical_circle():
    rep = scan_constant(CIRCLE, CIRCLE, grid=90)
    assert rep.c_hat == pytest.approx(1.0, abs=1e-12)
    assert not rep.diverging
    assert rep.m_hat == pytest.approx(1.0) and rep.M_hat == pytest.approx(1.0)


def test_scan_quadratic_pair(corpus_reports):
    rep = corpus_reports[("q1", "q2")]
    assert 2.7 <= rep.c_hat <= 3.0001
    x, y = rep.witness
    assert tan_ratio(corpus.norm("q1"), corpus.norm("q2"), x, y) == pytest.approx(rep.c_hat, rel=1e-9)


def test_scan_report_invariants(corpus_reports):
    for rep in corpus_reports.values():
        assert rep.m_hat <= rep.M_hat
        if math.isfinite(rep.c_hat):
            assert rep.c_hat >= 1 - 1e-12
        if rep.diverging:
            assert is_diverging(rep.divergence_schedule)
        assert rep.label == "empirical supremum"


def test_scan_verdicts(corpus_reports):
    assert corpus_reports[("lp2", "lp4")].verdict == "diverging"
    assert corpus_reports[("lp1", "lpinf")].verdict == "not equivalent"
    for pair in corpus.EQUIVALENT_PAIRS:
        assert corpus_reports[pair].verdict == "equivalent-consistent"


def test_report_json_layout(corpus_reports):
    d = json.loads(corpus_reports[("lp1", "lpinf")].to_json())
    for key in ("c_hat", "witness", "m_hat", "M_hat", "diverging", "schedule", "seed", "samples_used"):
        assert key in d
    assert d["c_hat"] is None  # infinite supremum
    d = json.loads(corpus_reports[("q1", "q2")].to_json())
    assert len(d["witness"]) == 2 and len(d["witness"][0]) == 2
    assert all(len(row) == 2 for row in d["schedule"])


def test_report_summary_mentions_growth():
    rep = EquivReport(12.0, None, 1.0, 2.0, False, [(1e-1, 1.0), (1e-2, 3.0), (1e-3, 9.0)], 10, 0)
    assert "3.00x per decade" in rep.summary()
    assert "equivalent-consistent" in rep.summary()


def test_scan_nd_deterministic_and_bounded():
    A = np.diag([3.0, 1.0, 2.0])
    B = np.diag([1.0, 3.0, 2.0])
    q1, q2 = Quad(A), Quad(B)
    r1 = scan_constant(q1, q2, samples=1500, seed=4)
    r2 = scan_constant(q1, q2, samples=1500, seed=4)
    assert r1.to_json() == r2.to_json()
    assert 0.9 * 3 <= r1.c_hat <= 3 * (1 + 1e-6)


def test_scan_dimension_mismatch():
    with pytest.raises(DimensionError):
        scan_constant(CIRCLE, parse_norm("quad([[1,0,0],[0,1,0],[0,0,1]])"))
    with pytest.raises(ValueError):
        scan_constant(CIRCLE, CIRCLE, grid=4)
