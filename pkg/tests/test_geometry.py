from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pullback_lab.errors import ChartGap, DomainEscape, OutOfOverlap
from pullback_lab.geometry import (MANIFOLDS, Chart, Manifold, Point, SmoothMap, Tangent, angle_doubling, change_chart,
                                   change_chart_tangent, circle, circle_arc, constant_path, degree_map,
                                   differential, disk, disk_segment, identity_map, interval, make_path,
                                   path_velocity, rotation_map, sphere)
from pullback_lab.sampling import halton


def test_sphere_chart_changes():
    m = sphere()
    pole = Point(0, [0.0, 0.0])
    assert change_chart(m, pole, 0) is pole
    assert np.allclose(change_chart(m, Point(0, [1.0, 0.0]), 1).coords, [1.0, 0.0])
    assert np.allclose(change_chart(m, Point(0, [2.0, 0.0]), 1).coords, [0.5, 0.0])
    with pytest.raises(OutOfOverlap):
        change_chart(m, pole, 1)


def test_sphere_embedding_is_unit_and_consistent():
    m = sphere()
    p = Point(0, [0.3, -1.2])
    q = change_chart(m, p, 1)
    assert np.isclose(np.linalg.norm(m.embed(p)), 1.0)
    assert np.allclose(m.embed(p), m.embed(q), atol=1e-14)
    assert np.allclose(m.embed(Point(0, [0, 0])), [0, 0, 1])
    assert np.allclose(m.embed(Point(1, [0, 0])), [0, 0, -1])


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_chart_round_trips(name):
    m = MANIFOLDS[name]()
    pts = m.sample(halton(1000, m.sample_dim))
    for a in m.charts:
        for b in m.charts:
            if a.id == b.id:
                continue
            ids = np.array([p.chart_id for p in pts])
            xs = np.array([p.coords for p in pts])
            xa, ok_a = m.convert(ids, xs, a.id)
            xb, ok_b = m.convert(np.full(len(xs), a.id)[ok_a], xa[ok_a], b.id)
            back, ok_back = m.convert(np.full(ok_b.sum(), b.id), xb[ok_b], a.id)
            assert ok_back.all()
            assert np.max(np.abs(back - xa[ok_a][ok_b])) < 1e-9


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_charts_cover_the_manifold(name):
    m = MANIFOLDS[name]()
    u = halton(2000, m.sample_dim)
    amb = m.sample_fn(u)
    ids, coords = m.locate(amb)
    assert np.all(m.margins([fn(amb) for fn in m.unembed_fns]).max(axis=0) > 0)
    assert np.allclose(m.embed_array(ids, coords), amb, atol=1e-12)


def test_preferred_chart_rule():
    m = sphere()
    # margin >= 0.1 in chart 0 -> chart 0 even though chart 1 is deeper
    assert m.preferred_chart(Point(1, [0.35, 0.0])) == 0
    # |z| = 2.95 has margin 0.05 < 0.1 in chart 0; chart 1 wins
    assert m.preferred_chart(Point(0, [2.95, 0.0])) == 1


def test_differential_examples():
    line = interval()
    v = Tangent(Point(0, [0.4]), [1.0])
    assert np.allclose(differential(identity_map(line), v.base, v).components, [1.0])
    p = Point(0, [0.3])
    d = differential(angle_doubling(), p, Tangent(p, [1.0]))
    assert abs(d.components[0] - 2.0) < 1e-6


def test_differential_of_x_squared_at_three():
    # the real line as a one-chart manifold, wide enough to contain 3
    r = Manifold("R", 1, (Chart(0, 1, lambda c: 100.0 - np.abs(np.atleast_2d(c)[..., 0])),),
                 (lambda c: c,), (lambda x: x,), lambda u: u, 1)
    f = SmoothMap(r, r, lambda p: Point(0, p.coords**2))
    p = Point(0, [3.0])
    assert abs(differential(f, p, Tangent(p, [1.0])).components[0] - 6.0) < 1e-6


def test_differential_domain_escape():
    r_chart_edge = Point(0, [1.2499999, 0.0])
    f = SmoothMap(disk(), disk(), lambda p: p)
    with pytest.raises(DomainEscape):
        differential(f, r_chart_edge, Tangent(r_chart_edge, [1.0, 0.0]))


def test_differential_linearity():
    f = rotation_map([1, 1, 0], 0.7)
    p = Point(0, [0.4, -0.2])
    v, w = Tangent(p, [1.0, 0.5]), Tangent(p, [-0.3, 2.0])
    a, b = 1.7, -0.6
    lhs = differential(f, p, Tangent(p, a * v.components + b * w.components)).components
    rhs = a * differential(f, p, v).components + b * differential(f, p, w).components
    assert np.allclose(lhs, rhs, atol=1e-5)


def test_tangent_transforms_by_jacobian():
    m = sphere()
    p = Point(0, [0.8, 0.5])
    v = Tangent(p, [0.3, -1.1])
    moved = change_chart_tangent(m, v, 1)
    h = 1e-6
    fd = (change_chart(m, Point(0, p.coords + h * v.components), 1).coords
          - change_chart(m, Point(0, p.coords - h * v.components), 1).coords) / (2 * h)
    assert np.allclose(moved.components, fd, atol=1e-5)


@pytest.mark.parametrize("f", [rotation_map([0, 0, 1], 1.1), rotation_map([1, 0, 0], 2.0), degree_map(2),
                               degree_map(-1)])
def test_smooth_maps_are_chart_independent(f):
    m = sphere()
    for p in m.sample(halton(1000, 2)):
        for cid in (0, 1):
            q = m.try_change_chart(p, cid)
            if q is None:
                continue
            assert m.distance(f(p), f(q)) < 1e-9


def test_degree_map_on_equator():
    m = sphere()
    for k in (-2, -1, 0, 1, 2):
        for a in np.linspace(0, 2 * np.pi, 7):
            z = Point(0, [math.cos(a), math.sin(a)])
            img = change_chart(m, degree_map(k)(z), 0)
            assert np.allclose(img.coords, [math.cos(k * a), math.sin(k * a)], atol=1e-12)


def test_path_velocity_examples():
    m = disk()
    still = constant_path(m, Point(0, [0.2, 0.1]))
    assert np.allclose(path_velocity(still, 0.4).components, 0)
    line = disk_segment([0.0, 0.0], [1.0, 0.0])
    assert np.allclose(path_velocity(line, 0.3).components, [1, 0], atol=1e-6)
    assert np.allclose(path_velocity(line, 0.0).components, [1, 0], atol=1e-6)
    assert np.allclose(path_velocity(line, 1.0).components, [1, 0], atol=1e-6)
    loop = circle_arc(0.0, 2 * np.pi)
    for t in (0.0, 0.1, 0.5, 0.77, 1.0):
        assert abs(np.linalg.norm(path_velocity(loop, t).components) - 2 * np.pi) < 1e-4


def test_path_schedule_is_continuous():
    m = sphere()
    from pullback_lab.geometry import sphere_arc
    a = sphere_arc([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 2 * np.pi)
    assert len(a.charts) >= 2
    for b in a.breakpoints[1:-1]:
        left, right = a(b, "left"), a(b, "right")
        assert m.distance(left, right) < 1e-9
    assert m.distance(a(0.0), a(1.0, "left")) < 1e-9


def test_make_path_raises_chart_gap_outside_every_chart():
    m = disk()
    with pytest.raises(ChartGap):
        make_path(m, lambda t: Point(0, [2.0 * t, 0.0]))


@given(st.floats(0.0, 2 * np.pi), st.floats(-3.0, 3.0))
def test_circle_arc_points_are_on_the_circle(theta0, angle):
    a = circle_arc(theta0, angle)
    for t in (0.0, 0.25, 0.5, 1.0):
        x = circle().embed(a(t))
        assert np.allclose(x, [math.cos(theta0 + angle * t), math.sin(theta0 + angle * t)], atol=1e-12)


def test_points_are_immutable():
    p = Point(0, [1.0, 2.0])
    with pytest.raises(ValueError):
        p.coords[0] = 3.0
