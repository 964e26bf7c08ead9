from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from kleinsail.errors import ContractError, DomainError, WordSyntaxError
from kleinsail.exact import IntPoly
from kleinsail.matops import (
    IntMatrix,
    adjugate,
    char_poly,
    commutes,
    companion,
    det,
    eval_word,
    hnf_basis,
    inverse,
    parse_word,
    plane_coordinates,
    poly_at_matrix,
    unimodular_completion,
)

A1 = companion((1, -3, 0, 4))
A3 = companion((-1, -3, 1, 3))

# generator matrices from an independent CAS expansion
B11 = [[9, -4, -11, 3], [3, 0, -4, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
B12 = [[4, -4, -3, 1], [1, 1, -4, 1], [1, -2, 1, 0], [0, 1, -2, 1]]
B13 = [[5, -3, -7, 2], [2, -1, -3, 1], [1, -1, -1, 1], [1, -2, -1, 3]]
B32 = [[4, -1, -3, 1], [-1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1]]


def test_companion_shape():
    assert A1.tolist() == [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, -3, 0, 4]]
    assert det(A1) == -1 and det(A3) == 1


@settings(max_examples=1000, deadline=None)
@given(st.tuples(*[st.integers(-50, 50)] * 4))
def test_companion_identities(abcd):
    a, b, c, d = abcd
    m = companion(abcd)
    assert char_poly(m) == IntPoly([-a, -b, -c, -d, 1])
    assert det(m) == -a


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=16, max_size=16))
def test_adjugate_identity(entries):
    m = IntMatrix([entries[i : i + 4] for i in range(0, 16, 4)])
    d = det(m)
    assert m @ adjugate(m) == IntMatrix.identity().scale(d)
    # Cayley-Hamilton
    assert poly_at_matrix(char_poly(m), m) == IntMatrix.zero()


def test_inverse():
    assert A1 @ inverse(A1) == IntMatrix.identity()
    assert A1 ** -3 @ A1**3 == IntMatrix.identity()
    with pytest.raises(DomainError):
        inverse(IntMatrix.identity().scale(2))


@pytest.mark.parametrize(
    "word, expected",
    [("A^-2", B11), ("(A-E)^2*A^-2", B12), ("(A-E)^2*(A+E)*A^-2", B13)],
)
def test_example1_generators(word, expected):
    g = eval_word(parse_word(word), A1)
    assert g.tolist() == expected
    assert det(g) == 1 and commutes(g, A1)


def test_example3_words():
    assert eval_word(parse_word("(A-E)*A^-1"), A3).tolist() == B32
    assert eval_word(parse_word("A+E"), A3) == A3 + IntMatrix.identity()


@pytest.mark.parametrize(
    "text, factors",
    [
        ("A+E", (((1, 1), 1),)),
        ("A^-2", (((0, 1), -2),)),
        ("2*A-3*E", (((-3, 2), 1),)),
        ("((A-E)*A^-1)^2", (((-1, 1), 2), ((0, 1), -2))),
        ("-(A+E)", (((-1,), 1), ((1, 1), 1))),
        ("(A - E) ^ 2", (((-1, 1), 2),)),
    ],
)
def test_parse_word(text, factors):
    got = tuple((p.coeffs, e) for p, e in parse_word(text).factors)
    assert got == factors


@pytest.mark.parametrize("bad", ["", "A+", "B", "(A", "A^", "A^x", "(A^-1+E)", "A)"])
def test_parse_word_errors(bad):
    with pytest.raises(WordSyntaxError):
        parse_word(bad)


def test_eval_word_needs_unit_factor():
    # det(2A + E) = 16 chi(-1/2) = -31
    assert det(eval_word(parse_word("2*A+E"), A1)) == -31
    with pytest.raises(DomainError):
        eval_word(parse_word("(2*A+E)^-1"), A1)


def test_hnf_basis():
    basis, rank = hnf_basis([(2, 4, 0, 0), (0, 6, 0, 0), (2, 10, 0, 0)])
    assert rank == 2
    assert basis == [(2, 4, 0, 0), (0, 6, 0, 0)]


def test_unimodular_completion_random():
    rng = random.Random(7)
    for _ in range(200):
        h = [rng.randint(-9, 9) for _ in range(4)]
        if not any(h):
            continue
        from math import gcd

        g = 0
        for a in h:
            g = gcd(g, a)
        h = [a // g for a in h]
        w = unimodular_completion(h)
        assert w[0] == h
        assert abs(det(IntMatrix(w))) == 1


def test_completion_contract():
    with pytest.raises(ContractError):
        unimodular_completion((2, 4, 0, 0))


def test_plane_coordinates_are_injective():
    h = (3, 3, -7, 2)
    pts = [(-1, -1, -1, 0), (-2, -2, -1, 3), (0, 0, 1, 4)]
    _, coords = plane_coordinates(h, pts)
    assert len(set(coords)) == 3
