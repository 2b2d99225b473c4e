import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from klslab import geometry as g

seeds = st.integers(0, 2**32 - 1)


def random_polygon(rng, k=None, scale=1.0):
    k = int(rng.integers(3, 12)) if k is None else k
    return g.ConvexPolygon.hull(rng.normal(size=(k + 3, 2)) * scale)


# -- polygons ----------------------------------------------------------------

def test_area_examples():
    assert g.polygon_area(g.unit_square()) == 1.0
    assert g.ConvexPolygon([(0, 0), (2, 0), (0, 2)]).area == pytest.approx(2.0)
    assert g.regular_polygon(6).area == pytest.approx(3 * math.sqrt(3) / 2, rel=1e-14)
    assert g.polygon_area(g.ConvexPolygon.empty()) == 0.0


def test_polygon_normalization():
    P = g.ConvexPolygon([(0, 0), (0.5, 0), (1, 0), (1, 1), (1 + 1e-14, 1), (0, 1)])
    assert len(P) == 4
    assert P.area == pytest.approx(1.0)
    with pytest.raises(ValueError):
        g.ConvexPolygon([(0, 0), (1, 0), (0.2, 0.2), (0, 1)])


def test_polygon_json_roundtrip():
    P = g.regular_polygon(7, 2.0, (1, -1))
    Q = g.ConvexPolygon.from_json(P.to_json())
    assert np.allclose(P.vertices, Q.vertices)


def test_clip_examples():
    sq = g.unit_square()
    assert g.clip_halfplane(sq, g.HalfPlane((1, 0), 0.5)).area == pytest.approx(0.5)
    assert g.clip_halfplane(sq, g.HalfPlane((1, 0), -1)).is_empty
    assert g.clip_halfplane(sq, g.HalfPlane((1, 0), 2)) is sq


def test_halfplane_normalizes():
    H = g.HalfPlane((3, 4), 5)
    assert np.allclose(H.normal, (0.6, 0.8)) and H.offset == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(seed=seeds)
def test_clip_conserves_area(seed):
    rng = np.random.default_rng(seed)
    P = random_polygon(rng)
    H = g.HalfPlane(rng.normal(size=2), float(rng.normal()))
    total = g.clip_halfplane(P, H).area + g.clip_halfplane(P, H.complement()).area
    assert abs(total - P.area) <= 1e-10


# -- chords and profiles -----------------------------------------------------

def test_chord_examples():
    c = g.chord(g.regular_polygon(64), (0, 0), (1, 0))
    assert c.length == pytest.approx(2.0, rel=1e-14)  # a vertex lies on each end of this axis
    c = g.chord(g.unit_square(), (0.5, 0.5), (0, 1))
    assert np.allclose(c.a, (0.5, 0)) and np.allclose(c.b, (0.5, 1))
    c = g.chord(g.unit_square(), (0, 0), (1, 0))
    assert c.length == pytest.approx(1.0) and c.contains((0, 0))


def test_chord_across_edges():
    # direction through edge midpoints: chord is the inscribed width 2 cos(pi/64)
    P = g.regular_polygon(64, phase=math.pi / 64)
    assert g.chord(P, (0, 0), (1, 0)).length == pytest.approx(2 * math.cos(math.pi / 64), rel=1e-13)


def test_chord_outside_errors():
    with pytest.raises(ValueError):
        g.chord(g.unit_square(), (2, 2), (1, 0))


def test_profile_examples():
    f = g.cross_section_profile(g.unit_square(), g.Line((0, 0), (1, 0)))
    assert f.interval == (0.0, 1.0) and np.allclose(f(np.linspace(0, 1, 11)), 1.0)
    f = g.cross_section_profile(g.ConvexPolygon([(0, 0), (1, 0), (0, 1)]), g.Line((0, 0), (1, 0)))
    x = np.linspace(0, 1, 11)
    assert np.allclose(f(x), 1 - x)


def test_profile_of_disk_polygon():
    P = g.regular_polygon(128)
    f = g.cross_section_profile(P, g.Line((0, 0), (1, 0)))
    exact = lambda x: 2 * np.sqrt(np.clip(1 - x**2, 0, None))
    assert np.abs(f(f.knots) - exact(f.knots)).max() <= 1e-12
    x = np.linspace(-0.995, 0.995, 20001)
    assert np.abs(f(x) - exact(x)).max() <= 5e-3
    assert f.integral() == pytest.approx(P.area, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_profile_concave(seed):
    rng = np.random.default_rng(seed)
    P = random_polygon(rng)
    f = g.cross_section_profile(P, g.Line((0, 0), rng.normal(size=2)))
    x = np.linspace(*f.interval, 801)
    v = f(x)
    assert np.all(v[:-2] - 2 * v[1:-1] + v[2:] <= 1e-9)


# -- nets and needles --------------------------------------------------------

def _covers(P, net, delta, n=200):
    lo, hi = P.bbox
    X, Y = np.meshgrid(np.linspace(lo[0], hi[0], n), np.linspace(lo[1], hi[1], n))
    probe = np.stack([X.ravel(), Y.ravel()], 1)
    probe = probe[P.contains(probe)]
    d = np.sqrt(((probe[:, None] - net[None]) ** 2).sum(-1)).min(1)
    return d.max() <= delta + 1e-12


def test_delta_net_examples():
    sq = g.unit_square()
    net = g.delta_net(sq, 0.5)
    assert _covers(sq, net, 0.5) and sq.contains(net).all()
    assert len(g.delta_net(sq, 2.0)) == 1
    net = g.delta_net(sq, 0.1)
    assert len(net) >= 25 and _covers(sq, net, 0.1)
    assert np.array_equal(net, net[np.lexsort((net[:, 1], net[:, 0]))])


def test_delta_net_rejects_nonpositive():
    with pytest.raises(ValueError):
        g.delta_net(g.unit_square(), 0.0)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, delta=st.sampled_from([0.05, 0.2, 0.7]))
def test_delta_net_covers_random(seed, delta):
    P = random_polygon(np.random.default_rng(seed))
    net = g.delta_net(P, delta)
    assert P.contains(net, tol=1e-9).all() and _covers(P, net, delta, n=120)


def test_needle_width_examples():
    axis, w = g.needle_width(g.rectangle(0, 0, 1, 0.01))
    assert w == pytest.approx(0.005)
    assert np.allclose(np.abs(axis.direction), (1, 0))
    assert g.needle_width(g.unit_square())[1] == pytest.approx(0.5)
    assert g.needle_width(np.array([(0, 0), (1, 1), (2, 2)]))[1] == 0.0


def test_needle_width_square_against_direction_scan():
    # brute force over 3600 axis directions
    v = g.unit_square().vertices
    th = np.linspace(0, math.pi, 3600, endpoint=False)
    nrm = g.line_normals(th)
    proj = v @ nrm.T
    brute = ((proj.max(0) - proj.min(0)) / 2).min()
    assert g.needle_width(g.unit_square())[1] == pytest.approx(brute, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_needle_width_certificate_and_scan(seed):
    P = random_polygon(np.random.default_rng(seed))
    axis, w = g.needle_width(P)
    assert np.abs(axis.distance(P.vertices)).max() <= w + 1e-9
    th = np.linspace(0, math.pi, 3600, endpoint=False)
    proj = P.vertices @ g.line_normals(th).T
    assert w <= ((proj.max(0) - proj.min(0)) / 2).min() + 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_needle_width_monotone(seed):
    rng = np.random.default_rng(seed)
    P = random_polygon(rng)
    Q = g.clip_halfplane(P, g.HalfPlane(rng.normal(size=2), float(rng.normal(scale=0.3))))
    if not Q.is_empty:
        assert g.needle_width(Q)[1] <= g.needle_width(P)[1] + 1e-12


def test_needle_width_empty():
    with pytest.raises(ValueError):
        g.needle_width(np.zeros((0, 2)))


# -- exact cut areas ---------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(seed=seeds)
def test_polygon_cut_areas_match_clipping(seed):
    rng = np.random.default_rng(seed)
    P = random_polygon(rng)
    M = g.sample_uniform(P, 1, rng)[0]
    th = rng.uniform(0, math.pi, 5)
    got = g.polygon_cut_areas(P, M, th)
    for t, a in zip(th, got):
        plus, _ = g.split_by_line(P, M, (math.cos(t), math.sin(t)))
        assert a == pytest.approx(plus.area, abs=1e-12)


def test_disk_cut_areas_match_sampling():
    rng = np.random.default_rng(5)
    P = g.unit_square()
    M, c, r = np.array([0.3, 0.2]), np.array([0.5, 0.5]), 0.4
    th = np.array([0.0, 0.7, 2.0])
    got = g.disk_cut_areas(P, M, th, c, r)
    pts = rng.random((400_000, 2))
    inside = np.hypot(*(pts - c).T) <= r
    side = (pts - M) @ g.line_normals(th).T >= 0
    ref = (inside[:, None] & side).mean(0)
    assert np.allclose(got, ref, atol=4e-3)
    assert g.polygon_disk_area(P, c, 0.5) == pytest.approx(math.pi / 4, rel=1e-12)


def test_region_areas():
    sq = g.unit_square()
    assert g.DiskRegion((0.5, 0.5), 0.4, outside=True).area_in(sq) == pytest.approx(1 - math.pi * 0.16)
    assert g.HalfPlaneRegion((1, 0), 0.5).area_in(sq) == pytest.approx(0.5)
    assert g.Plane().area_in(sq) == pytest.approx(1.0)
    assert g.Nowhere().area_in(sq) == 0.0


def test_segment_intervals():
    D = g.DiskRegion((0, 0), 1.0)
    (u, v), = D.segment_intervals((-2, 0), (2, 0))
    assert (u, v) == pytest.approx((0.25, 0.75))
    A = g.DiskRegion((0, 0), 0.5, outside=True)
    assert A.segment_intervals((-1, 0), (1, 0)) == pytest.approx([(0.0, 0.25), (0.75, 1.0)])
    S = g.SlabRegion((1, 0), [(0.2, 0.4)])
    assert S.segment_intervals((0, 0), (1, 0)) == pytest.approx([(0.2, 0.4)])


# -- Monte Carlo -------------------------------------------------------------

def _box_oracle(fun, box=((0, 0), (1, 1))):
    return g.FunctionOracle(fun, (np.array(box[0], float), np.array(box[1], float)))


def test_montecarlo_trivial():
    est = g.montecarlo_volume(_box_oracle(lambda p: np.ones(len(p), bool)), 1000, 3)
    assert est.mean == 1.0 and est.ci99 == 0.0
    est = g.montecarlo_volume(_box_oracle(lambda p: np.zeros(len(p), bool)), 1000, 3)
    assert est.mean == 0.0


def test_montecarlo_disk():
    disk = _box_oracle(lambda p: (p**2).sum(1) <= 1, ((-1, -1), (1, 1)))
    est = g.montecarlo_volume(disk, 10**6, 11)
    assert abs(est.mean - math.pi) <= 4 * est.ci99


def test_montecarlo_reproducible_and_thread_independent():
    disk = _box_oracle(lambda p: (p**2).sum(1) <= 1, ((-1, -1), (1, 1)))
    a = g.montecarlo_volume(disk, 300_000, 9)
    b = g.montecarlo_volume(disk, 300_000, 9, threads=4)
    assert a == b
    assert g.VolumeEstimate.from_json(a.to_json()) == a


def test_montecarlo_seed_agreement_rate():
    disk = _box_oracle(lambda p: (p**2).sum(1) <= 1, ((-1, -1), (1, 1)))
    ok = 0
    for t in range(1000):
        a = g.montecarlo_volume(disk, 2000, 2 * t)
        b = g.montecarlo_volume(disk, 2000, 2 * t + 1)
        ok += abs(a.mean - b.mean) <= a.ci99 + b.ci99
    assert ok >= 990


def test_montecarlo_rejects_zero_count():
    with pytest.raises(ValueError):
        g.montecarlo_volume(_box_oracle(lambda p: p[:, 0] > 0), 0, 1)
