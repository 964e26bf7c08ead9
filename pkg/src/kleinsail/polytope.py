"""Exact combinatorics of small 3-dimensional lattice polytopes.

Sail faces have few lattice points, so the hull is found by brute force
over point triples in exact integer arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegeneracyError

Point3 = tuple[int, int, int]


@dataclass(frozen=True)
class Polytope3:
    """Convex hull of integer points in Z^3.

    ``faces`` are vertex-index cycles (indices into ``points``), one per
    2-face; ``edges`` are sorted index pairs.
    """

    points: tuple[Point3, ...]
    vertices: tuple[int, ...]
    faces: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    volume6: int

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def _primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for a in v:
        g = math.gcd(g, int(a))
    return tuple(int(a) // g for a in v) if g else tuple(v)


def _cross(a: Sequence[int], b: Sequence[int]) -> tuple[int, int, int]:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _polygon_cycle(pts: np.ndarray, idx: list[int], normal: Sequence[int]) -> tuple[int, ...]:
    """Vertices of a planar lattice polygon, counterclockwise around ``normal``."""
    drop = int(np.argmax(np.abs(normal)))
    keep = [k for k in range(3) if k != drop]
    proj = {i: (int(pts[i][keep[0]]), int(pts[i][keep[1]])) for i in idx}
    order = sorted(idx, key=lambda i: proj[i])

    def cross(o: int, a: int, b: int) -> int:
        (ox, oy), (ax, ay), (bx, by) = proj[o], proj[a], proj[b]
        return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)

    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= 0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) <= 0:
            upper.pop()
        upper.append(i)
    cyc = lower[:-1] + upper[:-1]
    # make the cycle counterclockwise when seen from the outer normal
    if normal[drop] * (1 if drop != 1 else -1) < 0:
        cyc = cyc[::-1]
    start = cyc.index(min(cyc))
    return tuple(cyc[start:] + cyc[:start])


def hull3(points: Sequence[Sequence[int]]) -> Polytope3:
    """Exact convex hull of integer points spanning a 3-dimensional body."""
    pts_t = tuple(tuple(int(a) for a in p) for p in points)
    pts = np.array(pts_t, dtype=np.int64).reshape(-1, 3)
    n = len(pts)
    if n < 4:
        raise DegeneracyError("need at least 4 points for a 3-dimensional hull")
    base = pts[0]
    diffs = pts - base
    if np.linalg.matrix_rank(diffs.astype(float)) < 3:
        raise DegeneracyError("points are not affinely 3-dimensional")
    planes: dict[tuple, list[int]] = {}
    for i, j, k in itertools.combinations(range(n), 3):
        nv = _cross(pts[j] - pts[i], pts[k] - pts[i])
        if nv == (0, 0, 0):
            continue
        vals = pts @ np.array(nv, dtype=np.int64)
        off = int(vals[i])
        lo, hi = int(vals.min()), int(vals.max())
        if hi == off:
            outward = _primitive(nv)
        elif lo == off:
            outward = _primitive(tuple(-a for a in nv))
        else:
            continue
        key_off = int(np.dot(pts[i], outward))
        key = (outward, key_off)
        if key not in planes:
            on = np.nonzero(pts @ np.array(outward, dtype=np.int64) == key_off)[0]
            planes[key] = [int(x) for x in on]
    faces = []
    for (normal, _), idx in sorted(planes.items()):
        faces.append(_polygon_cycle(pts, idx, normal))
    faces.sort()
    verts = sorted({i for f in faces for i in f})
    edges = set()
    for f in faces:
        for a, b in zip(f, f[1:] + f[:1]):
            edges.add((min(a, b), max(a, b)))
    p0 = verts[0]
    vol6 = 0
    for f in faces:
        if p0 in f:
            continue
        for a, b in zip(f[1:], f[2:]):
            m = np.array([pts[f[0]] - pts[p0], pts[a] - pts[p0], pts[b] - pts[p0]], dtype=object)
            vol6 += abs(_det3(m))
    return Polytope3(pts_t, tuple(verts), tuple(faces), tuple(sorted(edges)), vol6)


def _det3(m) -> int:
    return int(
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )
