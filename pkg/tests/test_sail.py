from __future__ import annotations

import numpy as np
import pytest

from _oracles import random_hyperbolic_companions, soundness_violations
from kleinsail.cone import make_orthant
from kleinsail.errors import DegeneracyError, DomainError
from kleinsail.matops import companion
from kleinsail.sail import (
    CERTIFIED,
    SPURIOUS,
    Facet,
    build_sail_patch,
    certified_facet_from_plane,
    certify_facet,
    certify_plane,
    enumerate_cone_points,
    hull_facets,
    star_complete,
    word_exponents,
)

O1 = make_orthant(companion((1, -3, 0, 4)))
V1 = {0: (-3, -2, -1, 1), 1: (0, 0, 1, 5), 2: (0, 0, 0, 1), 3: (2, 1, 1, 3), 4: (-5, -4, -3, -2), 5: (4, 1, 0, 0), 6: (3, 1, 0, 0), 7: (12, 5, 2, 1)}
# (vertex indices, primitive normal, level), normals from an independent CAS
T1 = {
    "T11": ((0, 2, 4, 5), (-1, 8, -13, 4), 4),
    "T12": ((2, 4, 5, 6), (0, 3, -7, 3), 3),
    "T13": ((2, 5, 6, 7), (0, 2, -5, 2), 2),
    "T14": ((2, 3, 5, 7), (-1, 8, -14, 4), 4),
    "T15": ((0, 2, 3, 5), (-1, 7, -11, 3), 3),
    "T16": ((0, 1, 3, 5), (-2, 10, -13, 3), 2),
    "T17": ((0, 1, 2, 3), (0, 2, -4, 1), 1),
}


@pytest.mark.parametrize("name", sorted(T1))
def test_example1_faces_certify(name):
    idx, h, c = T1[name]
    f = certified_facet_from_plane(h, c, O1)
    assert f is not None and f.status == CERTIFIED
    assert f.vertex_set == {V1[i] for i in idx}
    assert certify_facet(f, O1).status == CERTIFIED


def test_shifted_plane_is_spurious():
    # the T17 plane moved one step outward cuts off lattice points of the cone
    cert = certify_plane((0, 2, -4, 1), 2, O1)
    assert cert.status == SPURIOUS and cert.witness is not None
    assert O1.contains(cert.witness)
    assert np.dot((0, 2, -4, 1), cert.witness) < 2


def test_plane_negative_on_a_ray_is_spurious():
    cert = certify_plane((0, 0, 0, -1), 1, O1)
    assert cert.status == SPURIOUS


def test_nonpositive_level_is_spurious():
    assert certify_plane((0, 2, -4, 1), 0, O1).status == SPURIOUS


def test_enumerate_cone_points():
    pts = enumerate_cone_points(O1, 2)
    assert (0, 0, 0, 1) in pts and (0, 0, 0, -1) not in pts
    assert all(O1.contains(p) for p in pts)
    with pytest.raises(DomainError):
        enumerate_cone_points(O1, 0)


def test_hull_facets_degenerate():
    with pytest.raises(DegeneracyError):
        hull_facets([(1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0), (2, 1, 0, 0), (3, 1, 0, 0)])


def test_word_exponents():
    ex = word_exponents(3, 1)
    assert len(ex) == 27 and ex[0] == (0, 0, 0)


def test_patch_star_of_e4():
    patch = build_sail_patch(O1, [(0, 0, 0, 1)])
    assert (0, 0, 0, 1) in patch.complete
    star = patch.star((0, 0, 0, 1))
    assert star_complete((0, 0, 0, 1), star)
    planes = {(f.normal, f.level) for f in star}
    t1_planes_at_e4 = {(h, c) for idx, h, c in T1.values() if 2 in idx}
    assert t1_planes_at_e4 <= planes


def test_seed_outside_orthant():
    with pytest.raises(DomainError):
        build_sail_patch(O1, [(0, 0, 0, -1)])


def test_certification_soundness_sample():
    bad = checked = 0
    for abcd in random_hyperbolic_companions(12, seed=11):
        b, c = soundness_violations(abcd)
        bad += b
        checked += c
    assert bad == 0 and checked > 0
