"""Independent brute-force oracles shared by property and acceptance tests."""

from __future__ import annotations

import itertools
import random

import numpy as np

from kleinsail.cone import classify_charpoly, make_orthant
from kleinsail.exact import IntPoly
from kleinsail.matops import IntMatrix, companion
from kleinsail.sail import CERTIFIED, _drop_reducible, certify_plane, cone_point_array, hull_facets


def random_hyperbolic_companions(n: int, seed: int = 0, span: int = 6) -> list[tuple[int, int, int, int]]:
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        a = rng.choice((1, -1))
        b, c, d = (rng.randint(-span, span) for _ in range(3))
        if classify_charpoly(IntPoly([-a, -b, -c, -d, 1])) is None:
            out.append((a, b, c, d))
    return out


def soundness_violations(abcd, bound: int = 6, per_trial: int = 3) -> tuple[int, int]:
    """Certify a few hull planes and compare with brute force in a box.

    Returns (violations, certified planes checked).
    """
    o = make_orthant(companion(abcd))
    box = cone_point_array(o, bound)
    small = box[np.max(np.abs(box), axis=1) <= 1]
    cands = hull_facets(_drop_reducible(box, o, small))[:per_trial]
    bad = checked = 0
    for f in cands:
        h = np.array(f.normal)
        cert = certify_plane(f.normal, f.level, o)
        vals = box @ h
        if cert.status == CERTIFIED:
            checked += 1
            if np.any(vals < f.level):
                bad += 1
            on_plane = {tuple(int(a) for a in p) for p in box[vals == f.level]}
            if not on_plane <= set(cert.points):
                bad += 1
        elif cert.witness is not None:
            w = cert.witness
            if not (o.contains(w) and int(np.dot(h, w)) < f.level):
                bad += 1
    return bad, checked


def random_unimodular(rng: random.Random, steps: int = 8) -> IntMatrix:
    m = [[int(i == j) for j in range(4)] for i in range(4)]
    for _ in range(steps):
        i, j = rng.sample(range(4), 2)
        k = rng.choice((-2, -1, 1, 2))
        for r in range(4):
            m[r][j] += k * m[r][i]
        if rng.random() < 0.3:
            m[i], m[j] = m[j], m[i]
    return IntMatrix(m)
