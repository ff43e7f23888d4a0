from __future__ import annotations

import numpy as np
import pytest

from pullback_lab import group as grp
from pullback_lab.bundle import (TotalPoint, bundle_by_name, pull_back, total_point_distance, trivial_s2_u1)
from pullback_lab.connection import connection_from_partition, flat_connection, monopole_connection
from pullback_lab.errors import NotSteady, OutOfCover
from pullback_lab.geometry import Point, degree_map, identity_map, sphere
from pullback_lab.homotopy import (HOMOTOPY_PAIRS, constant_homotopy, homotopy_catalogue, reverse,
                                   rotation_homotopy)
from pullback_lab.morphism import (apply_morphism, equivariance_deviation, fibre_deviation, induced_morphism,
                                   lipschitz_ratio, random_total_points, reindex, verify_functoriality,
                                   verify_isomorphism)
from pullback_lab.sampling import SplitMix64


@pytest.fixture(scope="module")
def s2_cat():
    return homotopy_catalogue("S2")


@pytest.fixture(scope="module")
def part(hopf_module):
    return connection_from_partition(hopf_module)


@pytest.fixture(scope="module")
def hopf_module():
    return bundle_by_name("hopf")


def test_constant_homotopy_gives_identity(hopf_module, part):
    m = induced_morphism(constant_homotopy(degree_map(2)), hopf_module, part)
    for p in random_total_points(m.source, 10, SplitMix64(1)):
        q = m(p)
        assert q.base is p.base
        assert total_point_distance(m.source, reindex(q, m.target, m.source), p) <= 1e-9
    assert verify_isomorphism(constant_homotopy(degree_map(2)), hopf_module, part, samples=5).max_deviation <= 1e-12


def test_trivial_bundle_zero_connection(s2_cat):
    b = trivial_s2_u1()
    c = flat_connection(b)
    H = s2_cat["rot-z"]
    m = induced_morphism(H, b, c, 200)
    for p in random_total_points(m.source, 10, SplitMix64(4)):
        assert np.allclose(m(p).g.matrix, p.g.matrix, atol=1e-14)
    assert verify_isomorphism(H, b, c, samples=5, steps=200).max_deviation <= 1e-14
    rep = verify_functoriality(H, s2_cat["rot-x"], b, c, samples=5, steps=200)
    assert rep.max_deviation <= 1e-14


def test_hopf_equivariance_and_fibres(hopf_module, part, s2_cat):
    m = induced_morphism(s2_cat["rot-x"], hopf_module, part)
    assert fibre_deviation(m, samples=10) == 0.0
    assert equivariance_deviation(m, samples=20) < 1e-6


def test_functoriality_with_constant_tail(hopf_module, part, s2_cat):
    H = s2_cat["rot-z"]
    rep = verify_functoriality(H, s2_cat["const-rot-z-end"], hopf_module, part, samples=10)
    assert rep.max_deviation < 1e-6 and rep.passed


def test_functoriality_of_rotations(hopf_module, part, s2_cat):
    rep = verify_functoriality(s2_cat["rot-z"], s2_cat["rot-x"], hopf_module, part, samples=15)
    assert rep.passed and rep.tolerance == 1e-5 and rep.samples == 15
    assert rep.passed == (rep.max_deviation <= rep.tolerance)


def test_isomorphism_of_catalogue_homotopies(hopf_module, part, s2_cat):
    for name in ("rot-x", "deg2-rot-y"):
        assert verify_isomorphism(s2_cat[name], hopf_module, part, samples=10).max_deviation < 1e-5


def test_non_canonical(hopf_module, part, s2_cat):
    H = s2_cat["rot-x"]
    a = induced_morphism(H, hopf_module, part)
    b = induced_morphism(H, hopf_module, monopole_connection(hopf_module))
    gaps = [total_point_distance(a.target, a(p), b(p)) for p in random_total_points(a.source, 10, SplitMix64(0))]
    assert max(gaps) > 1e-3
    assert equivariance_deviation(b, samples=10) < 1e-6


def test_lipschitz_bound(hopf_module, part, s2_cat):
    m = induced_morphism(s2_cat["rot-x"], hopf_module, part)
    assert 0 < lipschitz_ratio(m, samples=10) < 100


def test_requires_steady_homotopy(hopf_module, part):
    with pytest.raises(NotSteady):
        induced_morphism(rotation_homotopy(identity_map(sphere()), [0.0, 0.0, 1.0], 1.0), hopf_module, part)


def test_rejects_wrong_connection(hopf_module, s2_cat):
    with pytest.raises(ValueError):
        induced_morphism(s2_cat["rot-z"], hopf_module, flat_connection(trivial_s2_u1()))


def test_point_outside_source_cover(hopf_module, part, s2_cat):
    m = induced_morphism(s2_cat["rot-z"], hopf_module, part)
    labels = [cs.label for cs in m.source.cover]
    # chart 0 around the north pole, paired with the south cap of the target
    k = labels.index((0, 1))
    with pytest.raises(OutOfCover):
        apply_morphism(m, TotalPoint(k, Point(0, [0.0, 0.0]), grp.u1(0.0)))


def test_source_and_target_are_pullbacks(hopf_module, part, s2_cat):
    H = s2_cat["deg2-rot-z"]
    m = induced_morphism(H, hopf_module, part)
    assert [cs.label for cs in m.source.cover] == [cs.label for cs in pull_back(hopf_module, H.f_end).cover]
    assert m.target.base is sphere()


def test_reverse_morphism_is_inverse_pointwise(hopf_module, part, s2_cat):
    H = s2_cat["deg2-rot-y"]
    fwd, back = induced_morphism(H, hopf_module, part), induced_morphism(reverse(H), hopf_module, part)
    for p in random_total_points(fwd.source, 5, SplitMix64(9)):
        q = back(reindex(fwd(p), fwd.target, back.source))
        assert total_point_distance(fwd.source, reindex(q, back.target, fwd.source), p) <= 1e-6


def test_disk_pair_functorial_at_finer_steps():
    b = bundle_by_name("twisted-disk-su2")
    c = connection_from_partition(b)
    cat = homotopy_catalogue("D2")
    (h, k), = HOMOTOPY_PAIRS["D2"]
    rep = verify_functoriality(cat[h], cat[k], b, c, samples=20, steps=2000)
    assert rep.passed
    assert verify_isomorphism(cat[k], b, c, samples=10).passed
