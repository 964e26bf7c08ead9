from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kleinsail.errors import DegeneracyError, ResourceError
from kleinsail.lattice import box_chunks, count_l1_ball, ellipsoid_points, lll_reduce
from kleinsail.polytope import hull3


@pytest.mark.parametrize("dim, r", [(1, 3), (2, 2), (3, 2), (4, 3)])
def test_count_l1_ball_brute_force(dim, r):
    brute = sum(1 for p in itertools.product(range(-r, r + 1), repeat=dim) if sum(map(abs, p)) <= r)
    assert count_l1_ball(dim, r) == brute


def test_count_l1_ball_survey_size():
    # sum_k 2^k C(16,k) C(7,k)
    assert count_l1_ball(16, 7) == 9173505


def test_box_chunks():
    pts = np.concatenate(list(box_chunks(2, 3)))
    assert len(pts) == 125 and len({tuple(p) for p in pts}) == 125


def test_lll_is_unimodular():
    b = np.array([[1, 0, 0], [0, 1, 0], [137, 311, 1]], dtype=float)
    u = lll_reduce(b)
    d = round(np.linalg.det(u.astype(float)))
    assert abs(d) == 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=9, max_size=9), st.floats(0.5, 3.0))
def test_ellipsoid_points_brute_force(entries, radius):
    t = np.array(entries, dtype=float).reshape(3, 3) + 6 * np.eye(3)
    if abs(np.linalg.det(t)) < 1:
        return
    c = np.array([0.3, -0.2, 0.1])
    got = {tuple(p) for p in ellipsoid_points(t, c, radius)}
    r = 4
    brute = {
        p
        for p in itertools.product(range(-r, r + 1), repeat=3)
        if np.linalg.norm(t @ np.array(p) - c) <= radius - 1e-9
    }
    assert brute <= got


def test_ellipsoid_node_cap():
    with pytest.raises(ResourceError):
        ellipsoid_points(np.eye(4) * 0.01, np.zeros(4), 1.0, node_cap=100)


def test_cube_and_tetrahedron():
    cube = hull3(list(itertools.product((0, 1), repeat=3)))
    assert (cube.vertex_count, cube.edge_count, len(cube.faces), cube.volume6) == (8, 12, 6, 6)
    tet = hull3([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert (tet.vertex_count, tet.edge_count, len(tet.faces), tet.volume6) == (4, 6, 4, 1)


def test_interior_points_are_not_vertices():
    pts = [(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 0, 0), (0, 1, 0), (1, 1, 0)]
    h = hull3(pts)
    assert h.vertex_count == 4 and h.volume6 == 8


def test_degenerate_hull():
    with pytest.raises(DegeneracyError):
        hull3([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)])
