from __future__ import annotations

import numpy as np
import pytest

from pullback_lab import group as grp
from pullback_lab.bundle import (CoverSet, PrincipalBundle, TotalPoint, bundle_by_name, hopf, make_total_point,
                                 right_action, total_point_distance, trivial_s2_u1)
from pullback_lab.connection import connection_from_partition, flat_connection, monopole_connection
from pullback_lab.errors import EndpointMismatch, NoCoveringSet, NotALoop, OutOfCover, TagMismatch
from pullback_lab.geometry import (Point, circle, circle_arc, constant_path, disk, disk_segment, equator_arc,
                                   reparametrize, reverse_path, sphere, sphere_arc)
from pullback_lab.harness import (convergence_ratio, monopole_holonomy_error, projection_deviation,
                                  random_path, transport_suite, unitarity_deviation)
from pullback_lab.homotopy import smoothing_phi
from pullback_lab.sampling import SplitMix64
from pullback_lab.transport import compose_paths, holonomy, horizontal_lift, parallel_transport


@pytest.fixture(scope="module")
def mono():
    return monopole_connection()


def start_on_equator(b, g=None):
    return make_total_point(b, equator_arc(np.pi)(0.0), g)


# ---- path composition ----


def test_compose_paths_midpoint_and_joint():
    beta = sphere_arc([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1.0)
    end = sphere().embed(beta(1.0, "left"))
    alpha = sphere_arc(end, [0.0, 1.0, 0.0], 0.7)
    ab = compose_paths(alpha, beta)
    m = sphere()
    assert m.distance(ab(0.5), beta(1.0, "left")) <= 1e-12
    assert m.distance(ab(0.5), alpha(0.0)) <= 1e-12
    assert 0.5 in ab.joints
    for t in np.linspace(0, 1, 9):
        want = beta(2 * t) if t <= 0.5 else alpha(2 * t - 1)
        assert m.distance(ab(t), want) <= 1e-12


def test_quarter_arcs_compose_to_half_circle():
    m = circle()
    q1, q2 = circle_arc(0.0, np.pi / 2), circle_arc(np.pi / 2, np.pi / 2)
    half = circle_arc(0.0, np.pi)
    both = compose_paths(q2, q1)
    for t in np.linspace(0, 1, 1001):
        assert m.distance(both(t), half(t)) <= 1e-9


def test_compose_with_constant_path_keeps_point_sequence():
    m = sphere()
    beta = sphere_arc([0.0, 1.0, 0.0], [1.0, 0.0, 0.0], 1.2)
    both = compose_paths(constant_path(m, beta(1.0, "left")), beta)
    for t in np.linspace(0, 1, 101):
        assert m.distance(both(0.5 * t), beta(t)) <= 1e-12
        assert m.distance(both(0.5 + 0.5 * t), beta(1.0, "left")) <= 1e-12


def test_compose_paths_endpoint_mismatch():
    with pytest.raises(EndpointMismatch):
        compose_paths(equator_arc(1.0, start=2.0), equator_arc(1.0))


# ---- lifts ----


def test_zero_connection_keeps_group_entry():
    b = trivial_s2_u1()
    c = flat_connection(b)
    p = start_on_equator(b, grp.u1(0.3))
    lift = horizontal_lift(c, sphere_arc([1.0, 0.0, 0.0], [0.3, 1.0, 0.2], 2.5), p, 200)
    assert np.max(np.abs(lift.groups - p.g.matrix)) <= 1e-14
    q = lift.end
    assert np.isclose(q.g.matrix[0, 0], np.exp(0.3j))
    assert np.allclose(holonomy(c, equator_arc(2 * np.pi), p, 100).matrix, 1.0)


def test_constant_path_gives_constant_lift(hopf_b):
    c = connection_from_partition(hopf_b)
    x = Point(0, [0.9, 0.4])
    p = make_total_point(hopf_b, x, grp.u1(1.0))
    lift = horizontal_lift(c, constant_path(sphere(), x), p, 50)
    assert np.max(np.abs(lift.groups - p.g.matrix)) <= 1e-15


def test_monopole_half_equator_against_fine_oracle(mono):
    p = start_on_equator(mono.bundle)
    arc = equator_arc(np.pi)
    g = parallel_transport(mono, arc, p, 1000).g.matrix[0, 0]
    fine = parallel_transport(mono, arc, p, 10000).g.matrix[0, 0]
    finer = parallel_transport(mono, arc, p, 20000).g.matrix[0, 0]
    assert abs(fine - finer) <= 1e-10  # oracle consistency
    assert abs(g - fine) <= 1e-8
    assert abs(fine - (-1j)) <= 1e-10


def test_monopole_full_equator_holonomy(mono):
    p = start_on_equator(mono.bundle)
    h = holonomy(mono, equator_arc(2 * np.pi), p, 1000)
    assert abs(h.matrix[0, 0] + 1) <= 1e-6
    assert monopole_holonomy_error() <= 1e-6


def test_reversed_loop_has_inverse_holonomy(hopf_b):
    c = connection_from_partition(hopf_b)
    loop = sphere_arc([0.6, 0.0, 0.8], [0.2, 0.3, 1.0], 2 * np.pi)
    p = make_total_point(hopf_b, loop(0.0), grp.u1(0.2))
    h = holonomy(c, loop, p).matrix
    hr = holonomy(c, reverse_path(loop), p).matrix
    assert np.allclose(h @ hr, np.eye(1), atol=1e-6)
    assert abs(abs(h[0, 0]) - 1) <= 1e-12


def test_non_loop_rejected(mono):
    with pytest.raises(NotALoop):
        holonomy(mono, equator_arc(np.pi), start_on_equator(mono.bundle))


def test_no_covering_set():
    m = disk()
    b = PrincipalBundle("half", m, grp.U1, (CoverSet(0, lambda c: 0.5 - np.hypot(c[..., 0], c[..., 1])),))
    c = flat_connection(b)
    p = make_total_point(b, Point(0, [0.0, 0.0]))
    with pytest.raises(NoCoveringSet):
        horizontal_lift(c, disk_segment([0.0, 0.0], [0.9, 0.0]), p, 50)


def test_bad_starts(mono):
    arc = equator_arc(1.0)
    p = start_on_equator(mono.bundle)
    with pytest.raises(ValueError):
        horizontal_lift(mono, arc, p, 0)
    with pytest.raises(ValueError):
        horizontal_lift(mono, equator_arc(1.0, start=1.0), p, 10)
    with pytest.raises(TagMismatch):
        horizontal_lift(mono, arc, TotalPoint(0, p.base, grp.identity(grp.SU2)), 10)
    with pytest.raises(OutOfCover):
        horizontal_lift(mono, sphere_arc([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], 1.0),
                        TotalPoint(1, Point(0, [0.0, 0.0]), grp.u1(0.0)), 10)


def test_lift_through_both_poles_switches_cover(mono):
    loop = sphere_arc([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 2 * np.pi)
    p = make_total_point(mono.bundle, loop(0.0))
    lift = horizontal_lift(mono, loop, p, 400)
    assert set(lift.covers.tolist()) == {0, 1}
    assert projection_deviation(lift) <= 1e-9 and unitarity_deviation(lift) <= 1e-9
    # a great circle through the poles encloses half the sphere: holonomy -1
    assert abs(holonomy(mono, loop, p, 1000).matrix[0, 0] + 1) <= 1e-6


@pytest.mark.parametrize("name", ["hopf", "twisted-disk-su2"])
def test_lift_invariants(name):
    b = bundle_by_name(name)
    c = connection_from_partition(b)
    rng = SplitMix64(11)
    for _ in range(5):
        path = random_path(b.base, rng)
        p = make_total_point(b, path(0.0), grp.random_element(b.tag, rng))
        h = grp.random_element(b.tag, rng)
        lift = horizontal_lift(c, path, p)
        assert projection_deviation(lift) <= 1e-9
        assert lift.node(0) is p
        assert unitarity_deviation(lift) <= 1e-9
        moved = parallel_transport(c, path, right_action(b, p, h))
        assert total_point_distance(b, moved, right_action(b, lift.end, h)) <= 1e-6
        back = parallel_transport(c, reverse_path(path), lift.end)
        assert total_point_distance(b, back, p) <= 1e-6
        rep = parallel_transport(c, reparametrize(path, smoothing_phi), p)
        assert total_point_distance(b, rep, lift.end) <= 1e-6


def test_transport_suite_on_hopf(hopf_b):
    worst = transport_suite(connection_from_partition(hopf_b), samples=5, steps=1000, seed=2)
    assert worst["start"] == 0.0
    assert max(worst.values()) <= 1e-6


def test_convergence_ratio():
    assert convergence_ratio() >= 8.0


def test_lifted_path_nodes(hopf_b):
    c = connection_from_partition(hopf_b)
    p = start_on_equator(hopf_b)
    lift = horizontal_lift(c, equator_arc(1.0), p, 10)
    assert len(lift) == 11 and len(lift.nodes) == 11
    assert lift.nodes[-1][0] == 1.0 and lift.end.base.chart_id in (0, 1)
    assert lift.steps == 10


def test_hopf_is_really_twisted(hopf_b):
    # transports differ between connections, but holonomy of the equator always has |h| = 1
    p = start_on_equator(hopf_b)
    a = parallel_transport(connection_from_partition(hopf_b), equator_arc(np.pi), p).g.matrix
    b = parallel_transport(monopole_connection(hopf_b), equator_arc(np.pi), p).g.matrix
    assert abs(abs(a[0, 0]) - 1) <= 1e-12 and abs(abs(b[0, 0]) - 1) <= 1e-12
    assert hopf() is not None
