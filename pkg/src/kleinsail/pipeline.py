"""End-to-end runs: analysis documents, re-checks, golden comparisons and
symmetry checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .config import RunConfig, load_golden, load_json, load_config
from .cone import OrthantSpec, format_sign_vector, make_orthant, parse_sign_vector
from .errors import ContractError, DegeneracyError, DomainError, VerificationError
from .exact import isolate_real_roots
from .matops import IntMatrix, char_poly, det
from .quotient import (
    FaceClass,
    Fingerprint,
    Gluing,
    XiGroup,
    certified_face_of,
    classify_facet,
    face_class,
    fingerprint,
    fundamental_domain,
    gluing_scheme,
    integer_distance,
    uncovered_vertices,
    verify_symmetry,
    verify_xi,
)
from .sail import (
    CERTIFIED,
    Facet,
    SailPatch,
    _normal_of,
    build_sail_patch,
    certify_facet,
    certify_plane,
    cone_point_array,
    face_geometry,
    hull_facets,
)

log = logging.getLogger(__name__)

SCHEMA = "kleinsail.report/1"
ASSUMPTION = "the generator words are assumed to generate the whole unit group of the sail (not only a finite-index subgroup)"
_INTERVAL_WIDTH = Fraction(1, 2**64)
_MAX_ROUNDS = 3


@dataclass
class Analysis:
    config: RunConfig
    orthant: OrthantSpec
    group: XiGroup
    patch: SailPatch
    classes: list[FaceClass]
    fingerprint: Fingerprint | None
    gluing: list[Gluing]

    def word(self, exps: Sequence[int]) -> str:
        return self.group.word(exps, self.config.names())


def find_seed(orthant: OrthantSpec, bound_cap: int) -> tuple[int, ...]:
    """A sail vertex: a vertex of the first certified hull facet."""
    bound = 2
    while bound <= bound_cap:
        pts = cone_point_array(orthant, bound)
        if len(pts) > 4:
            try:
                cands = hull_facets(pts)
            except DegeneracyError:
                cands = []
            for f in cands:
                if certify_facet(f, orthant).status == CERTIFIED:
                    return min(f.vertices, key=lambda v: (max(map(abs, v)), v))
        bound *= 2
    raise DomainError(f"no certified sail facet found up to bound {bound_cap}")


def make_config_orthant(cfg: RunConfig) -> OrthantSpec:
    a = cfg.operator()
    if cfg.sigma:
        return make_orthant(a, sigma=parse_sign_vector(cfg.sigma))
    return make_orthant(a, contains=cfg.contains)


def analyze(cfg: RunConfig) -> Analysis:
    """Certified patch, unit group, fundamental domain and gluing for ``cfg``."""
    orthant = make_config_orthant(cfg)
    if len(cfg.generators) != 3:
        raise DomainError("three generator words are required")
    group = verify_xi(orthant, cfg.generators, cfg.precision)
    seeds = [s for s in cfg.seeds if orthant.contains(s)] or [find_seed(orthant, cfg.bound_cap)]
    targets = list(seeds)
    for _ in range(_MAX_ROUNDS):
        patch = build_sail_patch(
            orthant, seeds, group.generators, depth=cfg.depth, bound_cap=cfg.bound_cap, targets=targets
        )
        classes = fundamental_domain(patch, group, cfg.precision, cfg.exponent_box)
        missing = uncovered_vertices(classes, patch, group, cfg.precision)
        if not missing:
            break
        targets = sorted(set(targets) | set(missing))
        seeds = sorted(set(seeds) | set(missing))
    fp = None if any(c.provisional for c in classes) else fingerprint(classes)
    glue = gluing_scheme(classes, patch, group, cfg.precision, cfg.exponent_box) if fp else []
    return Analysis(cfg, orthant, group, patch, classes, fp, glue)


# --- documents -------------------------------------------------------------------


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def gluing_line(g: Gluing, an: Analysis, labels: dict[str, str] | None = None) -> str:
    labels = labels or {}
    a = labels.get(g.a, g.a)
    b = labels.get(g.b, g.b)
    ia = ",".join(map(str, g.face_a))
    ib = ",".join(map(str, g.face_b))
    return f"{a}/{ia} {an.word(g.exponents)} {b}/{ib}"


def document(an: Analysis, labels: dict[str, str] | None = None, extra: dict | None = None) -> dict[str, Any]:
    """The self-contained report of an analysis."""
    a = an.orthant.operator
    chi = char_poly(a)
    roots = [r.refined_to(_INTERVAL_WIDTH) for r in isolate_real_roots(chi)]
    gens = []
    for text, name, g in zip(an.group.words, an.config.names(), an.group.generators):
        gens.append(
            {
                "name": name,
                "word": text,
                "matrix": g.tolist(),
                "det": det(g),
                "commutes_with_operator": True,
                "preserves_orthant": True,
            }
        )
    doc: dict[str, Any] = {
        "schema": SCHEMA,
        "name": an.config.name,
        "operator": a.tolist(),
        "charpoly": list(chi.coeffs),
        "eigenvalues": [{"lo": _frac(r.lo), "hi": _frac(r.hi)} for r in roots],
        "orthant": {"sigma": format_sign_vector(an.orthant.sigma), "witness": list(an.orthant.witness)},
        "generators": gens,
        "generators_pairwise_commute": True,
        "assumption": ASSUMPTION,
        "patch": {
            "bound": an.patch.bound,
            "targets": [list(t) for t in an.patch.targets],
            "complete_vertices": [list(v) for v in sorted(an.patch.complete)],
        },
        "facets": [f.to_dict() for f in an.patch.facets],
        "classes": [dict(c.to_dict(), name=(labels or {}).get(c.label)) for c in an.classes],
        "fingerprint": an.fingerprint.to_dict() if an.fingerprint else None,
        "gluing": [gluing_line(g, an, labels) for g in an.gluing],
    }
    if extra:
        doc.update(extra)
    return doc


def recheck(doc: dict[str, Any], precision: int = 128) -> list[str]:
    """Re-derive every facet and class claim of a document from its vertices.

    Returns a list of disagreements (empty when everything agrees).
    """
    problems = []
    a = IntMatrix(doc["operator"])
    if list(char_poly(a).coeffs) != doc["charpoly"]:
        problems.append("characteristic polynomial differs")
    orthant = make_orthant(a, sigma=parse_sign_vector(doc["orthant"]["sigma"]))
    if not orthant.contains(doc["orthant"]["witness"]):
        problems.append("orthant witness is outside the orthant")
    for g in doc["generators"]:
        m = IntMatrix(g["matrix"])
        if det(m) != g["det"] or m @ a != a @ m:
            problems.append(f"generator {g['name']} fails determinant or commutation")
    for item in list(doc["facets"]) + [c["representative"] for c in doc["classes"]]:
        verts = [tuple(v) for v in item["vertices"]]
        h = _normal_of(sorted(verts))
        c = sum(x * y for x, y in zip(h, verts[0]))
        if list(h) != item["normal"] or c != item["level"]:
            problems.append(f"plane of facet {verts[:2]}... differs")
            continue
        f = certified_face_of(verts, orthant)
        if f is None:
            problems.append(f"facet {verts[:2]}... fails certification")
    for c in doc["classes"]:
        rep = c["representative"]
        verts = [tuple(v) for v in rep["vertices"]]
        geo = face_geometry(rep["normal"], verts)
        got = {
            "vertex_count": len(geo.vertices),
            "edge_count": len(geo.edges),
            "distance": integer_distance(rep["normal"], rep["level"]),
            "volume": geo.volume,
        }
        for k, v in got.items():
            if c[k] != v:
                problems.append(f"class {c['label']}: {k} recomputed as {v}, document says {c[k]}")
    if doc.get("fingerprint"):
        entries = sorted([c["vertex_count"], c["edge_count"], c["distance"], c["volume"]] for c in doc["classes"])
        if entries != doc["fingerprint"]["entries"] or len(entries) != doc["fingerprint"]["count"]:
            problems.append("fingerprint does not match the class table")
    return problems


# --- golden comparison -----------------------------------------------------------------


@dataclass
class GoldenResult:
    diffs: list[dict]
    labels: dict[str, str]

    @property
    def ok(self) -> bool:
        return not self.diffs


def compare_golden(an: Analysis, golden: dict) -> GoldenResult:
    """Structured differences between an analysis and a golden file."""
    diffs: list[dict] = []
    coords = {}
    for name, v in sorted(golden["vertices"].items()):
        got = an.group.element(v["word"]).apply(_first_vertex(golden))
        coords[name] = tuple(v["coords"])
        if list(got) != v["coords"]:
            diffs.append({"item": name, "field": "coords", "expected": v["coords"], "computed": list(got)})
    labels: dict[str, str] = {}
    for fname, spec in sorted(golden["faces"].items()):
        verts = [coords[n] for n in spec["vertices"]]
        f = certified_face_of(verts, an.orthant)
        if f is None:
            diffs.append({"item": fname, "field": "certified", "expected": True, "computed": False})
            continue
        fc = face_class(fname, f)
        for key in ("distance", "volume", "vertex_count"):
            exp = spec[key]
            got = getattr(fc, key)
            if exp != got:
                diffs.append({"item": fname, "field": key, "expected": exp, "computed": got})
        hit = classify_facet(f, an.classes, an.group, an.config.precision, an.config.exponent_box)
        if hit is None:
            diffs.append({"item": fname, "field": "class", "expected": "some class", "computed": None})
            continue
        label = hit[0].label
        if label in labels:
            diffs.append({"item": fname, "field": "class", "expected": "distinct class", "computed": f"same as {labels[label]}"})
        labels[label] = fname
    if len(an.classes) != golden["class_count"]:
        diffs.append({"item": "classes", "field": "count", "expected": golden["class_count"], "computed": len(an.classes)})
    for c in an.classes:
        if c.label not in labels:
            diffs.append({"item": c.label, "field": "golden face", "expected": "one", "computed": None})
    return GoldenResult(diffs, labels)


def _first_vertex(golden: dict) -> tuple[int, ...]:
    for v in golden["vertices"].values():
        if not any(v["word"]):
            return tuple(v["coords"])
    raise DomainError("golden file has no base vertex with the empty word")


def verify_example(cfg: RunConfig) -> tuple[Analysis, GoldenResult, dict]:
    an = analyze(cfg)
    gr = compare_golden(an, load_golden(cfg))
    doc = document(an, gr.labels, {"golden_diff": gr.diffs})
    return an, gr, doc


# --- symmetry ----------------------------------------------------------------------------


@dataclass
class SymmetryResult:
    permutation: dict[str, str]
    expected: dict[str, str] | None

    @property
    def matches(self) -> bool:
        return self.expected is None or self.permutation == self.expected


def run_symmetry(spec: dict) -> tuple[Analysis, SymmetryResult, dict]:
    """Analyze the referenced example and check the symmetry matrix on it."""
    cfg = load_config(spec["config"]) if isinstance(spec["config"], str) else RunConfig.from_dict(spec["config"])
    s = IntMatrix(spec["matrix"])
    an = analyze(cfg)
    labels: dict[str, str] = {}
    if cfg.golden:
        labels = compare_golden(an, load_golden(cfg)).labels
    d = det(s)
    if d not in (1, -1):
        raise VerificationError(f"symmetry matrix has determinant {d}; it is not a lattice automorphism")
    perm = verify_symmetry(s, an.classes, an.group, cfg.precision, cfg.exponent_box)
    named = {labels.get(k, k): labels.get(v, v) for k, v in sorted(perm.items())}
    named = dict(sorted(named.items()))
    res = SymmetryResult(named, spec.get("expected"))
    doc = document(
        an,
        labels,
        {"symmetry": {"matrix": s.tolist(), "permutation": named, "expected": res.expected, "matches": res.matches}},
    )
    return an, res, doc


def survey_report(max_abs_sum: int, checkpoint=None, workers: int | None = None):
    """Survey against the Example 1 analysis (operator and fingerprint)."""
    from .config import example_config
    from .survey import run_survey

    ref = analyze(example_config(1))
    return run_survey(
        max_abs_sum,
        reference=ref.orthant.operator,
        reference_fingerprint=ref.fingerprint.to_dict(),
        checkpoint=checkpoint,
        workers=workers,
    )
