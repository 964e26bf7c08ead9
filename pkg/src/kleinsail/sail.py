"""Certified pieces of the sail: lattice points of an orthant, hull facets,
facet certification and assembly of a patch with complete vertex stars."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import mpmath
import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .cone import OrthantSpec
from .errors import DegeneracyError, DomainError, InvariantViolation, ResourceError
from .lattice import box_chunks, ellipsoid_points
from .matops import DIM, IntMatrix, plane_coordinates, primitive_vector
from .polytope import Polytope3, hull3

log = logging.getLogger(__name__)

Vector = tuple[int, ...]

CANDIDATE = "candidate"
CERTIFIED = "certified"
SPURIOUS = "spurious"

DEFAULT_BOUND_CAP = 64
# centroid ball of the standard 4-simplex: centre 1/5, radius sqrt(0.76)
_SIMPLEX_CENTRE = 0.2
_SIMPLEX_RADIUS = 0.76**0.5
_RADIUS_MARGIN = 1e-6


def _vec(p: Iterable[int]) -> Vector:
    return tuple(int(a) for a in p)


@dataclass(frozen=True)
class FaceGeometry:
    """Combinatorics of a 3-dimensional face in its own plane lattice."""

    polytope: Polytope3
    vertices: tuple[Vector, ...]
    two_faces: tuple[tuple[Vector, ...], ...]
    edges: tuple[tuple[Vector, Vector], ...]

    @property
    def volume(self) -> int:
        return self.polytope.volume6


def face_geometry(normal: Sequence[int], points: Sequence[Sequence[int]]) -> FaceGeometry:
    """Vertices, 2-faces and edges of conv(points) on the plane with ``normal``."""
    pts = [_vec(p) for p in points]
    _, coords = plane_coordinates(normal, pts)
    poly = hull3(coords)
    verts = tuple(sorted(pts[i] for i in poly.vertices))
    two_faces = tuple(sorted(tuple(pts[i] for i in f) for f in poly.faces))
    edges = tuple(sorted(tuple(sorted((pts[a], pts[b]))) for a, b in poly.edges))
    return FaceGeometry(poly, verts, two_faces, edges)


@dataclass(frozen=True)
class Facet:
    """A 3-dimensional face candidate {h.x = c} with its vertices.

    ``points`` holds every lattice point of the face once it is certified.
    """

    vertices: tuple[Vector, ...]
    normal: Vector
    level: int
    status: str = CANDIDATE
    points: tuple[Vector, ...] = ()

    @property
    def key(self) -> tuple[Vector, int]:
        return (self.normal, self.level)

    @cached_property
    def geometry(self) -> FaceGeometry:
        return face_geometry(self.normal, self.points or self.vertices)

    @property
    def vertex_set(self) -> frozenset[Vector]:
        return frozenset(self.vertices)

    def two_face_sets(self) -> tuple[frozenset[Vector], ...]:
        return tuple(frozenset(f) for f in self.geometry.two_faces)

    def image(self, g: IntMatrix) -> "Facet":
        """g(F) as a candidate (vertices mapped, normal h g^-1, same level)."""
        verts = tuple(sorted(g.apply(v) for v in self.vertices))
        pts = tuple(sorted(g.apply(v) for v in self.points))
        normal = _normal_of(verts[:], self.level)
        return Facet(verts, normal, self.level, CANDIDATE, pts)

    def to_dict(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "normal": list(self.normal),
            "level": self.level,
            "status": self.status,
        }


def _normal_of(points: Sequence[Vector], level: int | None = None) -> Vector:
    """Primitive integer normal of the affine hyperplane through ``points``,
    oriented so the origin side is negative (h.p > 0 on the points)."""
    pts = np.array(points, dtype=object)
    base = pts[0]
    diffs = [list(p - base) for p in pts[1:]]
    basis = _independent_rows(diffs, DIM - 1)
    if basis is None:
        raise DegeneracyError("points do not span a hyperplane")
    h = _generalized_cross(basis)
    h = primitive_vector(h)
    c = sum(a * b for a, b in zip(h, points[0]))
    if c < 0:
        h = tuple(-a for a in h)
    return h


def _independent_rows(rows: list[list[int]], k: int) -> list[list[int]] | None:
    chosen: list[list[int]] = []
    for r in rows:
        trial = chosen + [r]
        if np.linalg.matrix_rank(np.array(trial, dtype=float)) == len(trial):
            chosen = trial
            if len(chosen) == k:
                return chosen
    return None


def _generalized_cross(rows: Sequence[Sequence[int]]) -> list[int]:
    """Vector orthogonal to DIM-1 rows, entries are signed maximal minors."""
    from .exact import bareiss_det

    out = []
    for k in range(DIM):
        minor = [[r[j] for j in range(DIM) if j != k] for r in rows]
        out.append((-1) ** k * bareiss_det(minor))
    return out


@dataclass(frozen=True)
class Certificate:
    status: str
    witness: Vector | None = None
    points: tuple[Vector, ...] = ()
    reason: str = ""


@dataclass
class SailPatch:
    """Certified facets around some vertices of one sail."""

    orthant: OrthantSpec
    facets: tuple[Facet, ...]
    complete: frozenset[Vector]
    bound: int
    targets: tuple[Vector, ...] = ()
    adjacency: dict[Vector, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.adjacency:
            adj: dict[Vector, list[int]] = {}
            for i, f in enumerate(self.facets):
                for v in f.vertices:
                    adj.setdefault(v, []).append(i)
            self.adjacency = {v: tuple(ix) for v, ix in sorted(adj.items())}

    @property
    def vertices(self) -> tuple[Vector, ...]:
        return tuple(self.adjacency)

    def star(self, v: Sequence[int]) -> tuple[Facet, ...]:
        return tuple(self.facets[i] for i in self.adjacency.get(_vec(v), ()))

    def facet_by_key(self) -> dict[tuple[Vector, int], Facet]:
        return {f.key: f for f in self.facets}


# --- point enumeration ------------------------------------------------------


def enumerate_cone_points(orthant: OrthantSpec, bound: int) -> list[Vector]:
    """Nonzero integer points of the open orthant with max-norm <= bound."""
    return [_vec(p) for p in cone_point_array(orthant, bound)]


def cone_point_array(orthant: OrthantSpec, bound: int) -> np.ndarray:
    if bound < 1:
        raise DomainError("enumeration bound must be at least 1")
    parts = []
    for chunk in box_chunks(bound, DIM):
        mask = orthant.contains_many(chunk)
        if mask.any():
            parts.append(chunk[mask])
    if not parts:
        return np.zeros((0, DIM), dtype=np.int64)
    return np.concatenate(parts)


def _drop_reducible(points: np.ndarray, orthant: OrthantSpec, small: np.ndarray) -> np.ndarray:
    """Drop x = y + (nonzero cone point) for y in ``small``; such x are never
    sail vertices.  Only float-certain memberships are used, so the filter
    errs towards keeping points."""
    keep = np.ones(len(points), dtype=bool)
    m = orthant.form_matrix
    for y in small:
        d = points - y
        vals = d.astype(float) @ m.T
        scale = np.abs(d.astype(float)) @ np.abs(m).T
        surely_in = np.all(vals > 1e-9 * scale + 1e-12, axis=1)
        keep &= ~surely_in
    return points[keep]


# --- hull -------------------------------------------------------------------


def hull_facets(points: Sequence[Sequence[int]] | np.ndarray) -> list[Facet]:
    """Origin-facing facets of conv(points) with exact primitive normals.

    Qhull proposes simplices; every plane is recomputed in integers and
    checked against all input points, and coplanar simplices are merged by
    their (normal, level) key.
    """
    pts = np.asarray(points, dtype=np.int64).reshape(-1, DIM)
    if len(pts) <= DIM or np.linalg.matrix_rank((pts[1:] - pts[0]).astype(float)) < DIM:
        raise DegeneracyError("points do not affinely span R^4")
    try:
        hull = ConvexHull(pts.astype(float))
    except QhullError as exc:
        raise DegeneracyError(f"qhull failed: {exc}") from exc
    planes: dict[tuple[Vector, int], None] = {}
    ptsT = pts.T
    for simplex in hull.simplices:
        sub = pts[simplex]
        diffs = (sub[1:] - sub[0]).tolist()
        h = _generalized_cross(diffs)
        if not any(h):
            continue
        h = primitive_vector(h)
        c = int(np.dot(np.array(h, dtype=np.int64), sub[0]))
        vals = np.array(h, dtype=np.int64) @ ptsT
        if vals.min() >= c:
            pass
        elif vals.max() <= c:
            h = tuple(-a for a in h)
            c = -c
        else:
            continue
        if c <= 0:
            continue
        planes[(h, c)] = None
    out = []
    for h, c in sorted(planes, key=lambda k: (k[1], k[0])):
        on = pts[(pts @ np.array(h, dtype=np.int64)) == c]
        try:
            geo = face_geometry(h, on.tolist())
        except DegeneracyError:
            continue
        out.append(Facet(geo.vertices, h, c, CANDIDATE))
    return out


# --- certification ----------------------------------------------------------


def _slab_candidates(h: Vector, c: int, orthant: OrthantSpec, node_cap: int | None = None) -> np.ndarray:
    """Integer points of a ball containing {x in closed cone : h.x <= c}."""
    with mpmath.workprec(160):
        rows = []
        for form, ray_row, s in zip(orthant.forms, orthant.ray_matrix(140), orthant.sigma):
            lj = [s * v for v in form.approx(140)]
            hr = mpmath.fsum(a * b for a, b in zip(h, ray_row))
            lr = mpmath.fsum(a * b for a, b in zip(lj, ray_row))
            coef = hr / (c * lr)
            rows.append([float(coef * v) for v in lj])
    t = np.array(rows)
    centre = np.full(DIM, _SIMPLEX_CENTRE)
    radius = _SIMPLEX_RADIUS * (1 + _RADIUS_MARGIN) + 1e-9
    kwargs = {} if node_cap is None else {"node_cap": node_cap}
    return ellipsoid_points(t, centre, radius, **kwargs)


def certify_plane(h: Sequence[int], c: int, orthant: OrthantSpec) -> Certificate:
    """Decide whether {h.x = c} supports the sail in a 3-dimensional face."""
    h = _vec(h)
    if c <= 0:
        return Certificate(SPURIOUS, reason="level must be positive")
    if any(s <= 0 for s in orthant.ray_signs(h)):
        return Certificate(SPURIOUS, reason="normal not positive on every extreme ray")
    cand = _slab_candidates(h, c, orthant)
    if len(cand) == 0:
        return Certificate(SPURIOUS, reason="empty slab")
    hx = cand @ np.array(h, dtype=np.int64)
    sel = (hx > 0) & (hx <= c)
    cand, hx = cand[sel], hx[sel]
    inside = orthant.contains_many(cand)
    cand, hx = cand[inside], hx[inside]
    below = cand[hx < c]
    if len(below):
        order = sorted((int(v), _vec(p)) for v, p in zip(hx[hx < c], below))
        return Certificate(SPURIOUS, witness=order[0][1], reason="lattice point between origin and plane")
    on = sorted(_vec(p) for p in cand[hx == c])
    return Certificate(CERTIFIED, points=tuple(on))


def certify_facet(f: Facet, orthant: OrthantSpec) -> Certificate:
    """Certify a candidate against the infinite sail, or return a witness."""
    cert = certify_plane(f.normal, f.level, orthant)
    if cert.status != CERTIFIED:
        return cert
    pts = set(cert.points)
    missing = [v for v in f.vertices if v not in pts]
    if missing:
        raise InvariantViolation(f"slab enumeration missed facet vertices {missing[:3]}")
    try:
        geo = face_geometry(f.normal, cert.points)
    except DegeneracyError:
        return Certificate(SPURIOUS, reason="plane meets the sail in a lower-dimensional face")
    extra = sorted(set(geo.vertices) - set(f.vertices))
    if extra:
        return Certificate(SPURIOUS, witness=extra[0], points=cert.points, reason="face has further vertices")
    return cert


def certified_facet_from_plane(h: Sequence[int], c: int, orthant: OrthantSpec) -> Facet | None:
    """The true sail face in plane {h.x = c}, or None if it is not a 3-face."""
    cert = certify_plane(h, c, orthant)
    if cert.status != CERTIFIED:
        return None
    try:
        geo = face_geometry(h, cert.points)
    except DegeneracyError:
        return None
    return Facet(geo.vertices, _vec(h), int(c), CERTIFIED, cert.points)


def recertify(f: Facet, orthant: OrthantSpec) -> Facet | None:
    """Certified copy of an arbitrary facet (e.g. an image under a symmetry)."""
    if f.status == CERTIFIED and f.points:
        return f
    g = certified_facet_from_plane(f.normal, f.level, orthant)
    if g is None or g.vertex_set != f.vertex_set:
        return None
    return g


# --- patch assembly ---------------------------------------------------------


def star_complete(v: Vector, facets: Sequence[Facet]) -> bool:
    """Every 2-face through v of every incident facet is shared by exactly two
    incident facets (the link of v closes up)."""
    incident = [f for f in facets if v in f.vertex_set]
    if not incident:
        return False
    counts: dict[frozenset, int] = {}
    for f in incident:
        for r in f.two_face_sets():
            if v in r:
                counts[r] = counts.get(r, 0) + 1
    return all(n == 2 for n in counts.values())


def word_exponents(ngen: int, depth: int) -> list[tuple[int, ...]]:
    """Exponent vectors with every |m_i| <= depth, ordered by L1 norm then lexicographically."""
    exps = list(itertools.product(range(-depth, depth + 1), repeat=ngen))
    exps.sort(key=lambda m: (sum(abs(a) for a in m), m))
    return exps


def group_element(generators: Sequence[IntMatrix], exps: Sequence[int]) -> IntMatrix:
    g = IntMatrix.identity()
    for b, m in zip(generators, exps):
        if m:
            g = g @ (b ** m)
    return g


def build_sail_patch(
    orthant: OrthantSpec,
    seeds: Sequence[Sequence[int]],
    generators: Sequence[IntMatrix] = (),
    depth: int = 1,
    bound_cap: int = DEFAULT_BOUND_CAP,
    targets: Sequence[Sequence[int]] | None = None,
    start_bound: int | None = None,
) -> SailPatch:
    """Certified facets around ``targets`` (default: the seeds).

    Point set = cone points of a box plus images of the seeds under generator
    words with exponents in [-depth, depth]; the box doubles until every
    target vertex has a complete star or ``bound_cap`` is reached.
    """
    seeds = [_vec(s) for s in seeds]
    for s in seeds:
        if not orthant.contains(s):
            raise DomainError(f"seed {s} is not in orthant {orthant.sigma}")
    targets = [_vec(t) for t in (targets if targets is not None else seeds)]
    images = set(seeds)
    if generators:
        for m in word_exponents(len(generators), depth):
            g = group_element(generators, m)
            for s in seeds:
                images.add(g.apply(s))
    images = {p for p in images if orthant.contains(p)}
    bound = start_bound or max(2, max(max(abs(a) for a in t) for t in targets))
    bound = min(bound, bound_cap)
    cache: dict[tuple[Vector, int], Facet | None] = {}
    facets: dict[tuple[Vector, int], Facet] = {}
    while True:
        pts = cone_point_array(orthant, bound)
        small = pts[np.max(np.abs(pts), axis=1) <= 1] if len(pts) else pts
        extra = np.array(sorted(images), dtype=np.int64).reshape(-1, DIM)
        allpts = np.unique(np.concatenate([pts, extra]), axis=0)
        reduced = _drop_reducible(allpts, orthant, small)
        log.info("bound %d: %d cone points, %d after reduction", bound, len(allpts), len(reduced))
        for cand in hull_facets(reduced):
            if cand.key in cache:
                continue
            cert = certify_facet(cand, orthant)
            if cert.status == CERTIFIED:
                f = Facet(cand.vertices, cand.normal, cand.level, CERTIFIED, cert.points)
                cache[cand.key] = f
                facets[cand.key] = f
            elif cert.reason == "face has further vertices":
                f = certified_facet_from_plane(cand.normal, cand.level, orthant)
                cache[cand.key] = f
                if f is not None:
                    facets[f.key] = f
            else:
                cache[cand.key] = None
        ordered = tuple(sorted(facets.values(), key=lambda f: (f.level, f.normal)))
        done = all(star_complete(t, ordered) for t in targets)
        if done or bound >= bound_cap:
            break
        bound = min(2 * bound, bound_cap)
    if not facets:
        raise ResourceError(f"no certified facet found up to bound {bound}")
    complete = frozenset(v for v in {v for f in ordered for v in f.vertices} if star_complete(v, ordered))
    return SailPatch(orthant, ordered, complete, bound, tuple(targets))
