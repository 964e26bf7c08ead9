from __future__ import annotations

import random

import mpmath
import numpy as np
import pytest

from kleinsail.cone import (
    classify_charpoly,
    eigen_forms,
    eigen_rays,
    format_sign_vector,
    log_coordinates,
    log_translation,
    make_orthant,
    orthant_sign_vector,
    parse_sign_vector,
)
from kleinsail.errors import ClassificationError, DomainError, InvariantViolation
from kleinsail.exact import IntPoly
from kleinsail.matops import IntMatrix, companion, eval_word, inverse, parse_word

A1 = companion((1, -3, 0, 4))


def test_forms_are_left_eigenvectors():
    forms = eigen_forms(A1)
    with mpmath.workprec(200):
        m = mpmath.matrix(A1.tolist())
        for f in forms:
            row = mpmath.matrix([f.approx(200)])
            lam = f.root.midpoint()
            lam = mpmath.mpf(lam.numerator) / lam.denominator
            diff = row * m - lam * row
            assert max(abs(x) for x in diff) < mpmath.mpf(2) ** -150


def test_forms_and_rays_pair_diagonally():
    forms = eigen_forms(A1)
    rays = eigen_rays(A1, forms)
    with mpmath.workprec(200):
        for i, f in enumerate(forms):
            for j, r in enumerate(rays):
                v = mpmath.fsum(a * b for a, b in zip(f.approx(200), r.approx(200)))
                if i == j:
                    assert abs(v) > 1e-3
                else:
                    assert abs(v) < mpmath.mpf(2) ** -150


def test_default_orthant_example1():
    o = make_orthant(A1)
    assert format_sign_vector(o.sigma) == "++++"
    assert o.contains((0, 0, 0, 1))
    assert o.contains((-3, -2, -1, 1))
    assert not o.contains((0, 0, 0, -1))
    assert not o.contains((0, 0, 0, 0))


def test_sign_vector_roundtrip():
    assert parse_sign_vector("+-+-") == (1, -1, 1, -1)
    assert format_sign_vector((1, -1, 1, -1)) == "+-+-"


def test_origin_has_no_orthant():
    with pytest.raises(DomainError):
        orthant_sign_vector((0, 0, 0, 0), eigen_forms(A1))


@pytest.mark.parametrize(
    "m, problem",
    [
        (IntMatrix.identity(), "reducible charpoly"),
        (companion((-1, 0, 0, 0)), "not hyperbolic"),  # t^4 + 1: irreducible, no real roots
    ],
)
def test_classification_errors(m, problem):
    with pytest.raises(ClassificationError, match=problem):
        eigen_forms(m)


def test_not_hyperbolic():
    # t^4 + t + 1 is irreducible and positive on R
    assert classify_charpoly(IntPoly([1, 1, 0, 0, 1])) == "not hyperbolic"
    assert classify_charpoly(IntPoly([-1, 3, 0, -4, 1])) is None


def test_contains_many_agrees_with_exact():
    o = make_orthant(A1)
    rng = np.random.default_rng(3)
    pts = rng.integers(-6, 7, size=(400, 4))
    mask = o.contains_many(pts)
    for p, m in zip(pts, mask):
        assert m == o.contains(tuple(int(a) for a in p))


def test_non_companion_operator_orthants():
    # P A P^-1 has the P-image of the eigen-hyperplanes of A
    p = IntMatrix([[1, 2, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 1]])
    b = p @ A1 @ inverse(p)
    fa, fb = eigen_forms(A1), eigen_forms(b)
    rng = random.Random(5)
    flips = None
    for _ in range(100):
        x = tuple(rng.randint(-5, 5) for _ in range(4))
        if not any(x):
            continue
        sa = orthant_sign_vector(x, fa)
        sb = orthant_sign_vector(p.apply(x), fb)
        f = tuple(u * v for u, v in zip(sa, sb))
        flips = flips or f
        assert f == flips


def test_log_translation_is_constant():
    o = make_orthant(A1)
    g = eval_word(parse_word("A^-2"), A1)
    tau, err = log_translation(g, o)
    for x in [(0, 0, 0, 1), (-3, -2, -1, 1), (4, 1, 0, 0)]:
        a, ea = log_coordinates(x, o.forms)
        b, eb = log_coordinates(g.apply(x), o.forms)
        assert max(abs(bb - aa - t) for aa, bb, t in zip(a, b, tau)) <= ea + eb + err + 1e-12
