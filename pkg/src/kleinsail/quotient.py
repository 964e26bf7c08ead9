"""The unit group action on a sail: generator checks, orbit tests, fundamental
domains, integer-affine invariants, fingerprints and extra symmetries."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cone import DEFAULT_PRECISION, OrthantSpec, log_coordinates, log_translation, orthant_sign_vector
from .errors import (
    BudgetError,
    ContractError,
    DegeneracyError,
    DomainError,
    VerificationError,
)
from .matops import GeneratorWord, IntMatrix, commutes, det, eval_word, inverse, is_primitive, parse_word
from .sail import CERTIFIED, Facet, SailPatch, _vec, certified_facet_from_plane, face_geometry, recertify

log = logging.getLogger(__name__)

Vector = tuple[int, ...]
Exponents = tuple[int, ...]

DEFAULT_EXPONENT_BOX = 4
# rounding is trusted only if every real exponent is this close to an integer
_ROUND_SLACK = 0.25


# --- invariants ---------------------------------------------------------------


def integer_distance(h: Sequence[int], c: int) -> int:
    """Integer distance from the origin to {h.x = c} for primitive h."""
    if not any(h):
        raise ContractError("zero normal")
    if not is_primitive(h):
        raise ContractError(f"normal {tuple(h)} is not primitive")
    if c == 0:
        raise ContractError("plane passes through the origin")
    return abs(int(c))


def integer_volume(f: Facet | Sequence[Sequence[int]]) -> int:
    """Normalized volume (unit tetrahedron = 1) of a 3-dimensional face."""
    if isinstance(f, Facet):
        return f.geometry.volume
    pts = [_vec(p) for p in f]
    from .sail import _normal_of

    return face_geometry(_normal_of(pts), pts).volume


# --- the group -------------------------------------------------------------------


@dataclass(frozen=True)
class XiGroup:
    """Free abelian group generated by three unimodular operators commuting
    with A and preserving the chosen orthant."""

    operator: IntMatrix
    orthant: OrthantSpec
    generators: tuple[IntMatrix, ...]
    words: tuple[str, ...]
    translations: tuple[tuple[float, ...], ...]
    errors: tuple[float, ...]
    inverses: tuple[IntMatrix, ...] = field(default=(), compare=False)

    def element(self, exps: Sequence[int]) -> IntMatrix:
        g = IntMatrix.identity()
        for b, binv, m in zip(self.generators, self.inverses, exps):
            if m > 0:
                g = g @ (b ** m)
            elif m < 0:
                g = g @ (binv ** (-m))
        return g

    def word(self, exps: Sequence[int], names: Sequence[str] | None = None) -> str:
        names = names or [f"B{i + 1}" for i in range(len(self.generators))]
        parts = [f"{n}^{m}" if m != 1 else n for n, m in zip(names, exps) if m]
        return "*".join(parts) or "E"


def verify_xi(
    orthant: OrthantSpec,
    words: Sequence[str | GeneratorWord],
    precision: int = DEFAULT_PRECISION,
) -> XiGroup:
    """Evaluate and check the generator words; errors name the failed property."""
    a = orthant.operator
    gens, texts = [], []
    for w in words:
        gw = parse_word(w) if isinstance(w, str) else w
        gens.append(eval_word(gw, a))
        texts.append(str(gw))
    return xi_from_matrices(orthant, gens, texts, precision)


def xi_from_matrices(
    orthant: OrthantSpec,
    gens: Sequence[IntMatrix],
    texts: Sequence[str] | None = None,
    precision: int = DEFAULT_PRECISION,
) -> XiGroup:
    a = orthant.operator
    texts = list(texts or [f"B{i + 1}" for i in range(len(gens))])
    for t, g in zip(texts, gens):
        d = det(g)
        if d != 1:
            raise VerificationError(f"determinant: generator {t} has determinant {d}", offending=t)
        if not commutes(g, a):
            raise VerificationError(f"commutation: generator {t} does not commute with A", offending=t)
        img = g.apply(orthant.witness)
        if not any(img) or orthant_sign_vector(img, orthant.forms) != orthant.sigma:
            raise VerificationError(f"orthant: generator {t} does not preserve the orthant", offending=t)
    for (s, g), (t, h) in itertools.combinations(zip(texts, gens), 2):
        if not commutes(g, h):
            raise VerificationError(f"abelian: generators {s} and {t} do not commute", offending=(s, t))
    trans, errs = [], []
    for g in gens:
        v, e = log_translation(g, orthant, precision)
        trans.append(v)
        errs.append(e)
    if len(gens) == 3 and abs(np.linalg.det(np.array(trans))) < 1e-9:
        raise VerificationError("rank: generator translations are linearly dependent")
    return XiGroup(a, orthant, tuple(gens), tuple(texts), tuple(trans), tuple(errs), tuple(inverse(g) for g in gens))


# --- orbits --------------------------------------------------------------------


def _solve_exponents(
    x: Vector, y: Vector, group: XiGroup, precision: int
) -> Exponents | None:
    """Nearest integer exponent vector m with sum m_i tau_i = log(y) - log(x)."""
    forms = group.orthant.forms
    lx, ex = log_coordinates(x, forms, precision)
    ly, ey = log_coordinates(y, forms, precision)
    diff = np.array(ly) - np.array(lx)
    tau = np.array(group.translations).T
    if tau.shape[0] != tau.shape[1]:
        sol, *_ = np.linalg.lstsq(tau, diff, rcond=None)
    else:
        sol = np.linalg.solve(tau, diff)
    # propagated error of the right-hand side and of the translations
    inv_norm = np.linalg.norm(np.linalg.pinv(tau), ord=np.inf)
    err = inv_norm * (ex + ey + max(group.errors) * (np.abs(sol).sum() + 1)) * len(x)
    if err > _ROUND_SLACK:
        raise BudgetError(f"log precision {precision} too low to resolve exponents (error {err:.3g})")
    m = np.rint(sol)
    if np.max(np.abs(sol - m)) > _ROUND_SLACK:
        return None
    return tuple(int(v) for v in m)


def _maps_onto(g: IntMatrix, src: Sequence[Vector], dst: frozenset[Vector]) -> bool:
    return len(src) == len(dst) and all(g.apply(v) in dst for v in src)


def _vsum(vs: Sequence[Vector]) -> Vector:
    return tuple(sum(c) for c in zip(*vs))


def orbit_element(
    src: Sequence[Vector],
    dst: Sequence[Vector],
    group: XiGroup,
    precision: int = DEFAULT_PRECISION,
    box: int = DEFAULT_EXPONENT_BOX,
) -> tuple[Exponents, IntMatrix] | None:
    """An exactly verified g in the group with g(src) = dst as sets."""
    src = [_vec(v) for v in src]
    target = frozenset(_vec(v) for v in dst)
    if len(src) != len(target):
        return None
    m = _solve_exponents(_vsum(src), _vsum(sorted(target)), group, precision)
    if m is not None:
        g = group.element(m)
        if _maps_onto(g, src, target):
            return m, g
    ngen = len(group.generators)
    for exps in sorted(itertools.product(range(-box, box + 1), repeat=ngen), key=lambda e: (sum(map(abs, e)), e)):
        g = group.element(exps)
        if _maps_onto(g, src, target):
            return exps, g
    return None


def orbit_equivalent(
    f1: Facet, f2: Facet, group: XiGroup, precision: int = DEFAULT_PRECISION, box: int = DEFAULT_EXPONENT_BOX
) -> tuple[Exponents, IntMatrix] | None:
    """(exponents, g) with g(f1) = f2 vertex by vertex, or None."""
    if len(f1.vertices) != len(f2.vertices) or f1.level != f2.level:
        return None
    return orbit_element(f1.vertices, f2.vertices, group, precision, box)


def vertex_orbit_element(
    x: Sequence[int], y: Sequence[int], group: XiGroup, precision: int = DEFAULT_PRECISION, box: int = DEFAULT_EXPONENT_BOX
) -> tuple[Exponents, IntMatrix] | None:
    return orbit_element([_vec(x)], [_vec(y)], group, precision, box)


# --- fundamental domain ----------------------------------------------------------


@dataclass(frozen=True)
class FaceClass:
    """One orbit of sail faces: a representative and its invariants."""

    label: str
    representative: Facet
    vertex_count: int
    distance: int
    volume: int
    edge_count: int
    provisional: bool = False
    members: tuple[tuple[Facet, Exponents], ...] = ()

    @property
    def invariants(self) -> tuple[int, int, int, int]:
        return (self.vertex_count, self.edge_count, self.distance, self.volume)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "representative": self.representative.to_dict(),
            "vertex_count": self.vertex_count,
            "edge_count": self.edge_count,
            "distance": self.distance,
            "volume": self.volume,
            "provisional": self.provisional,
        }


def face_class(label: str, f: Facet, provisional: bool = False, members=()) -> FaceClass:
    geo = f.geometry
    return FaceClass(
        label,
        f,
        len(geo.vertices),
        integer_distance(f.normal, f.level),
        geo.volume,
        len(geo.edges),
        provisional,
        tuple(members),
    )


def _rep_order(f: Facet, anchors: Sequence[Vector]) -> tuple:
    # prefer representatives touching the first anchor, then small coordinates
    touch = tuple(int(a not in f.vertex_set) for a in anchors)
    return (touch, f.level, max(max(map(abs, v)) for v in f.vertices), f.vertices)


def fundamental_domain(
    patch: SailPatch,
    group: XiGroup,
    precision: int = DEFAULT_PRECISION,
    box: int = DEFAULT_EXPONENT_BOX,
) -> list[FaceClass]:
    """Orbit representatives of all facets incident to complete-star vertices.

    A class is provisional when one of its representative's vertices is not
    in the orbit of a complete-star vertex: faces beyond it could then be
    missing from the patch.
    """
    if not patch.facets or not patch.complete:
        raise DomainError("patch has no vertex with a complete star")
    anchors = [t for t in patch.targets if t in patch.complete] or sorted(patch.complete)
    pool = sorted(
        {f.key: f for v in sorted(patch.complete) for f in patch.star(v)}.values(),
        key=lambda f: _rep_order(f, anchors),
    )
    reps: list[Facet] = []
    members: list[list[tuple[Facet, Exponents]]] = []
    for f in pool:
        for i, r in enumerate(reps):
            if r.level != f.level or len(r.vertices) != len(f.vertices):
                continue
            hit = orbit_equivalent(f, r, group, precision, box)
            if hit is not None:
                members[i].append((f, hit[0]))
                break
        else:
            reps.append(f)
            members.append([(f, (0,) * len(group.generators))])
    complete = sorted(patch.complete)
    covered: dict[Vector, bool] = {}

    def in_complete_orbit(v: Vector) -> bool:
        if v not in covered:
            covered[v] = v in patch.complete or any(
                vertex_orbit_element(v, c, group, precision, box) is not None for c in complete
            )
        return covered[v]

    classes = []
    order = sorted(range(len(reps)), key=lambda i: (face_class("", reps[i]).invariants, reps[i].normal))
    for n, i in enumerate(order):
        r = reps[i]
        prov = not all(in_complete_orbit(v) for v in r.vertices)
        classes.append(face_class(f"C{n + 1}", r, prov, members[i]))
    return classes


def uncovered_vertices(classes: Sequence[FaceClass], patch: SailPatch, group: XiGroup, precision: int = DEFAULT_PRECISION) -> list[Vector]:
    """Representative vertices not in the orbit of a complete-star vertex."""
    out = []
    for c in classes:
        for v in c.representative.vertices:
            if v in patch.complete:
                continue
            if not any(vertex_orbit_element(v, w, group, precision) for w in sorted(patch.complete)):
                out.append(v)
    return sorted(set(out))


@dataclass(frozen=True)
class Fingerprint:
    entries: tuple[tuple[int, int, int, int], ...]
    count: int

    def to_dict(self) -> dict:
        return {"count": self.count, "entries": [list(e) for e in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> "Fingerprint":
        return cls(tuple(tuple(e) for e in d["entries"]), int(d["count"]))


def fingerprint(classes: Sequence[FaceClass]) -> Fingerprint:
    """Sorted (vertices, edges, distance, volume) multiset plus class count."""
    if not classes:
        raise ContractError("empty class list")
    if any(c.provisional for c in classes):
        raise ContractError("fingerprint of a provisional fundamental domain")
    return Fingerprint(tuple(sorted(c.invariants for c in classes)), len(classes))


def classify_facet(
    f: Facet, classes: Sequence[FaceClass], group: XiGroup, precision: int = DEFAULT_PRECISION, box: int = DEFAULT_EXPONENT_BOX
) -> tuple[FaceClass, Exponents, IntMatrix] | None:
    """The class of f with g such that g(f) is the class representative."""
    for c in classes:
        hit = orbit_equivalent(f, c.representative, group, precision, box)
        if hit is not None:
            return c, hit[0], hit[1]
    return None


# --- symmetries -------------------------------------------------------------------


def image_facet(s: IntMatrix, f: Facet) -> Facet:
    """s(f) with its normal h s^-1 and unchanged level."""
    sinv = inverse(s)
    normal = tuple(sum(f.normal[i] * sinv[i, j] for i in range(len(f.normal))) for j in range(len(f.normal)))
    verts = tuple(sorted(s.apply(v) for v in f.vertices))
    return Facet(verts, normal, f.level)


def verify_symmetry(
    s: IntMatrix,
    classes: Sequence[FaceClass],
    group: XiGroup,
    precision: int = DEFAULT_PRECISION,
    box: int = DEFAULT_EXPONENT_BOX,
) -> dict[str, str]:
    """Permutation of class labels induced by a lattice symmetry of the sail.

    Every representative image is re-certified as a face of the same sail;
    a failure raises VerificationError naming the vertex or facet.
    """
    d = det(s)
    if d not in (1, -1):
        raise DomainError(f"symmetry has determinant {d}")
    orthant = group.orthant
    perm: dict[str, str] = {}
    for c in classes:
        f = c.representative
        for v in f.vertices:
            w = s.apply(v)
            if not orthant.contains(w):
                raise VerificationError(f"vertex {v} maps to {w} outside the orthant", offending=v)
        img = image_facet(s, f)
        cert = recertify(img, orthant)
        if cert is None:
            raise VerificationError(f"image of facet {c.label} is not a sail face", offending=img.vertices)
        hit = classify_facet(cert, classes, group, precision, box)
        if hit is None:
            raise VerificationError(f"image of facet {c.label} lies in no known class", offending=img.vertices)
        perm[c.label] = hit[0].label
    if sorted(perm.values()) != sorted(perm):
        raise VerificationError(f"induced map on classes is not a permutation: {perm}")
    return perm


# --- gluing -----------------------------------------------------------------------


@dataclass(frozen=True)
class Gluing:
    """2-face ``face_a`` of class ``a`` meets the image under g^-1 of 2-face
    ``face_b`` of class ``b``; g maps the neighbouring sail facet onto the
    representative of ``b``."""

    a: str
    face_a: tuple[int, ...]
    exponents: Exponents
    b: str
    face_b: tuple[int, ...]


def _neighbour(f: Facet, ridge: frozenset[Vector], patch: SailPatch) -> Facet | None:
    for v in ridge:
        for g in patch.star(v):
            if g.key != f.key and ridge <= g.vertex_set and ridge in g.two_face_sets():
                return g
    return None


def gluing_scheme(
    classes: Sequence[FaceClass],
    patch: SailPatch,
    group: XiGroup,
    precision: int = DEFAULT_PRECISION,
    box: int = DEFAULT_EXPONENT_BOX,
) -> list[Gluing]:
    """For each 2-face of each representative, the partner 2-face and the
    group word carrying the neighbouring facet onto its representative."""
    complete = sorted(patch.complete)
    out = []
    for c in classes:
        f = c.representative
        for ridge_t in f.geometry.two_faces:
            ridge = frozenset(ridge_t)
            nb = None
            if any(v in patch.complete for v in ridge):
                nb = _neighbour(f, ridge, patch)
            else:
                # move the ridge next to a complete vertex, look there, move back
                for v in sorted(ridge):
                    for w in complete:
                        hit = vertex_orbit_element(v, w, group, precision, box)
                        if hit is None:
                            continue
                        g = hit[1]
                        gf = recertify(image_facet(g, f), group.orthant)
                        if gf is None:
                            continue
                        gnb = _neighbour(gf, frozenset(g.apply(x) for x in ridge), patch)
                        if gnb is not None:
                            nb = recertify(image_facet(inverse(g), gnb), group.orthant)
                            break
                    if nb is not None:
                        break
            if nb is None:
                raise VerificationError(f"no neighbour across a 2-face of {c.label}", offending=tuple(sorted(ridge)))
            hit = classify_facet(nb, classes, group, precision, box)
            if hit is None:
                raise VerificationError(f"neighbour of {c.label} lies in no class", offending=nb.vertices)
            cb, exps, g = hit
            rb = sorted(g.apply(x) for x in ridge)
            ia = tuple(sorted(f.vertices.index(x) for x in ridge))
            ib = tuple(sorted(cb.representative.vertices.index(x) for x in rb))
            out.append(Gluing(c.label, ia, exps, cb.label, ib))
    return out


def certified_face_of(vertices: Sequence[Sequence[int]], orthant: OrthantSpec) -> Facet | None:
    """The certified sail face spanned by the given vertices, or None."""
    from .sail import _normal_of

    vs = tuple(sorted(_vec(v) for v in vertices))
    try:
        h = _normal_of(vs)
    except DegeneracyError:
        return None
    c = sum(a * b for a, b in zip(h, vs[0]))
    f = certified_facet_from_plane(h, c, orthant)
    if f is None or f.vertex_set != frozenset(vs):
        return None
    return f
