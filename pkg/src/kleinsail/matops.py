"""Integer 4x4 matrices, the companion family, generator words, lattice bases."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ContractError, DomainError, WordSyntaxError
from .exact import IntPoly, bareiss_det

DIM = 4

Vector = tuple[int, ...]


class IntMatrix:
    """Immutable square integer matrix of size ``DIM``."""

    __slots__ = ("rows", "_hash")

    def __init__(self, rows: Iterable[Iterable[int]]):
        rs = tuple(tuple(int(x) for x in r) for r in rows)
        if len(rs) != DIM or any(len(r) != DIM for r in rs):
            raise DomainError(f"IntMatrix must be {DIM}x{DIM}")
        self.rows = rs
        self._hash = hash(rs)

    @classmethod
    def identity(cls) -> "IntMatrix":
        return cls([[int(i == j) for j in range(DIM)] for i in range(DIM)])

    @classmethod
    def zero(cls) -> "IntMatrix":
        return cls([[0] * DIM for _ in range(DIM)])

    def __eq__(self, other) -> bool:
        return isinstance(other, IntMatrix) and self.rows == other.rows

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"IntMatrix({[list(r) for r in self.rows]})"

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(zip(*self.rows))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix([a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix([a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix([-a for a in r] for r in self.rows)

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix([k * a for a in r] for r in self.rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        cols = list(zip(*other.rows))
        return IntMatrix([sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows)

    def apply(self, v: Sequence[int]) -> Vector:
        """Matrix times column vector."""
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.rows)

    def __pow__(self, k: int) -> "IntMatrix":
        if k < 0:
            return inverse(self) ** (-k)
        result = IntMatrix.identity()
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(DIM))

    def abs_sum(self) -> int:
        return sum(abs(a) for r in self.rows for a in r)


def det(m: IntMatrix) -> int:
    return bareiss_det(m.rows)


def _minor(rows: Sequence[Sequence[int]], i: int, j: int) -> list[list[int]]:
    return [list(r[:j]) + list(r[j + 1:]) for k, r in enumerate(rows) if k != i]


def adjugate(m: IntMatrix) -> IntMatrix:
    rows = m.rows
    return IntMatrix(
        [(-1) ** (i + j) * bareiss_det(_minor(rows, j, i)) for j in range(DIM)] for i in range(DIM)
    )


def inverse(m: IntMatrix) -> IntMatrix:
    """Inverse over Z via the adjugate; requires determinant +-1."""
    d = det(m)
    if d not in (1, -1):
        raise DomainError(f"matrix with determinant {d} is not invertible over Z")
    return adjugate(m).scale(d)


def is_unimodular(m: IntMatrix) -> bool:
    return det(m) in (1, -1)


def commutes(a: IntMatrix, b: IntMatrix) -> bool:
    return a @ b == b @ a


@dataclass(frozen=True)
class CompanionSpec:
    a: int
    b: int
    c: int
    d: int


def companion(spec: CompanionSpec | Sequence[int]) -> IntMatrix:
    """The operator A_{a,b,c,d}: shift rows with last row (a, b, c, d)."""
    if not isinstance(spec, CompanionSpec):
        spec = CompanionSpec(*spec)
    return IntMatrix([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [spec.a, spec.b, spec.c, spec.d]])


def char_poly(m: IntMatrix) -> IntPoly:
    """det(tI - M) by Faddeev-LeVerrier (all divisions are exact)."""
    n = DIM
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    ident = IntMatrix.identity()
    mk = IntMatrix.zero()
    c = 1
    for k in range(1, n + 1):
        mk = m @ (mk + ident.scale(c))
        tr = mk.trace()
        if tr % k:
            raise AssertionError("Faddeev-LeVerrier division not exact")
        c = -tr // k
        coeffs[n - k] = c
    return IntPoly(coeffs)


def poly_at_matrix(p: IntPoly, m: IntMatrix) -> IntMatrix:
    acc = IntMatrix.zero()
    ident = IntMatrix.identity()
    for c in reversed(p.coeffs):
        acc = acc @ m + ident.scale(c)
    return acc


def adjugate_poly(m: IntMatrix) -> list[list[IntPoly]]:
    """adj(tI - M) as a matrix of integer polynomials in t.

    Uses adj(tI - M) = sum_k t^(n-1-k) sum_{j<=k} c_j M^(k-j), where
    det(tI - M) = sum_j c_j t^(n-j).
    """
    n = DIM
    chi = char_poly(m)
    c = [chi.coeffs[n - j] for j in range(n + 1)]
    ident = IntMatrix.identity()
    blocks = []
    acc = IntMatrix.zero()
    for k in range(n):
        acc = (acc @ m) + ident.scale(c[k]) if k else ident.scale(c[0])
        blocks.append(acc)
    entries = [[[0] * n for _ in range(n)] for _ in range(n)]
    for k, blk in enumerate(blocks):
        deg = n - 1 - k
        for i in range(n):
            for j in range(n):
                entries[i][j][deg] = blk[i, j]
    return [[IntPoly(entries[i][j]) for j in range(n)] for i in range(n)]


# --- generator words --------------------------------------------------------


@dataclass(frozen=True)
class GeneratorWord:
    """Formal product of (polynomial in A) ** exponent factors."""

    factors: tuple[tuple[IntPoly, int], ...]
    text: str = ""

    def __str__(self) -> str:
        return self.text or "*".join(f"({p.format('A')})^{e}" for p, e in self.factors)


def eval_word(w: GeneratorWord, a: IntMatrix) -> IntMatrix:
    """Exact integer matrix of the word at operator ``a``."""
    out = IntMatrix.identity()
    for p, e in w.factors:
        f = poly_at_matrix(p, a)
        if e < 0:
            d = det(f)
            if d not in (1, -1):
                raise DomainError(f"factor {p.format('A')} has determinant {d}; no integer inverse")
        out = out @ (f ** e)
    return out


_TOKEN = re.compile(r"\s*(?:(\d+)|(A|E)|([-+*^()]))")


def _tokenize(text: str) -> list[str]:
    pos = 0
    tokens = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise WordSyntaxError(f"unexpected character at {pos} in {text!r}")
        tokens.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
    return tokens


Factors = list[tuple[IntPoly, int]]


def _factors_to_poly(fs: Factors, text: str) -> IntPoly:
    out = IntPoly([1])
    for p, e in fs:
        if e < 0:
            raise WordSyntaxError(f"negative power inside a sum in {text!r}")
        out = out * p**e
    return out


class _Parser:
    """Recursive-descent parser for the word grammar (documented in README).

    word    := sum
    sum     := ['-'] product (('+' | '-') product)*
    product := power ('*' power)*
    power   := atom ('^' int)?
    atom    := 'A' | 'E' | digits | '(' sum ')'
    int     := ['-'] digits

    Values are kept as products of (polynomial in A)^exponent; a sum of
    several products collapses into one polynomial factor and therefore may
    not contain negative exponents.
    """

    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise WordSyntaxError(f"expected {expected or 'token'} in {self.text!r}")
        self.i += 1
        return tok

    def integer(self) -> int:
        neg = False
        if self.peek() == "-":
            self.take()
            neg = True
        tok = self.take()
        if not tok.isdigit():
            raise WordSyntaxError(f"expected integer exponent in {self.text!r}")
        return -int(tok) if neg else int(tok)

    def word(self) -> Factors:
        if not self.toks:
            raise WordSyntaxError("empty word")
        fs = self.sum()
        if self.peek() is not None:
            raise WordSyntaxError(f"trailing input {self.peek()!r} in {self.text!r}")
        return fs

    def sum(self) -> Factors:
        signs = [1]
        if self.peek() == "-":
            self.take()
            signs[0] = -1
        terms = [self.product()]
        while self.peek() in ("+", "-"):
            signs.append(1 if self.take() == "+" else -1)
            terms.append(self.product())
        if len(terms) == 1:
            return terms[0] if signs[0] == 1 else [(IntPoly([-1]), 1)] + terms[0]
        total = IntPoly()
        for sg, fs in zip(signs, terms):
            total = total + _factors_to_poly(fs, self.text) * sg
        return [(total, 1)]

    def product(self) -> Factors:
        fs = list(self.power())
        while self.peek() == "*":
            self.take()
            fs.extend(self.power())
        return fs

    def power(self) -> Factors:
        fs = self.atom()
        if self.peek() == "^":
            self.take()
            k = self.integer()
            fs = [(p, e * k) for p, e in fs]
        return fs

    def atom(self) -> Factors:
        tok = self.take()
        if tok == "A":
            return [(IntPoly([0, 1]), 1)]
        if tok == "E":
            return [(IntPoly([1]), 1)]
        if tok.isdigit():
            return [(IntPoly([int(tok)]), 1)]
        if tok == "(":
            fs = self.sum()
            self.take(")")
            return fs
        raise WordSyntaxError(f"unexpected {tok!r} in {self.text!r}")


def parse_word(text: str) -> GeneratorWord:
    """Parse e.g. ``"(A-E)^2*(A+E)*A^-2"`` into a :class:`GeneratorWord`."""
    factors = _Parser(text).word()
    return GeneratorWord(tuple(factors), text.replace(" ", ""))


# --- lattice bases ----------------------------------------------------------


def hnf_basis(vectors: Iterable[Sequence[int]]) -> tuple[list[Vector], int]:
    """Row Hermite normal form basis of the sublattice spanned by ``vectors``.

    Returns (basis, rank); pivots are positive and entries above each pivot
    are reduced into [0, pivot).
    """
    rows = [list(map(int, v)) for v in vectors]
    rows = [r for r in rows if any(r)]
    if not rows:
        return [], 0
    ncols = len(rows[0])
    basis: list[list[int]] = []
    col = 0
    while rows and col < ncols:
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            col += 1
            continue
        rest = [r for r in rows if r[col] == 0]
        # Euclid on the column until one row remains with a nonzero entry
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            new = [piv]
            for r in nz[1:]:
                q = r[col] // piv[col]
                r = [a - q * b for a, b in zip(r, piv)]
                if r[col] != 0:
                    new.append(r)
                elif any(r):
                    rest.append(r)
            nz = new
        piv = nz[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        basis.append(piv)
        rows = [r for r in rest if any(r)]
        col += 1
    # reduce above pivots
    for i in range(len(basis)):
        pc = next(j for j, a in enumerate(basis[i]) if a)
        for k in range(i):
            q = basis[k][pc] // basis[i][pc]
            if q:
                basis[k] = [a - q * b for a, b in zip(basis[k], basis[i])]
    return [tuple(b) for b in basis], len(basis)


def primitive_vector(v: Sequence[int]) -> Vector:
    g = 0
    for a in v:
        g = math.gcd(g, int(a))
    if g == 0:
        raise DomainError("zero vector has no primitive multiple")
    return tuple(int(a) // g for a in v)


def is_primitive(v: Sequence[int]) -> bool:
    g = 0
    for a in v:
        g = math.gcd(g, int(a))
    return g == 1


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def unimodular_completion(h: Sequence[int]) -> list[list[int]]:
    """Unimodular integer matrix W (as row lists) whose first row is ``h``.

    ``h`` must be primitive.  Rows 2.. of W give integer coordinates on
    every plane {x : h.x = c}; the matching columns 2.. of W^-1 form a basis
    of the direction lattice {z in Z^n : h.z = 0}.
    """
    h = [int(a) for a in h]
    n = len(h)
    if not is_primitive(h):
        raise ContractError(f"{h} is not primitive")
    # column operations V with h V = e_1, accumulated on the identity
    v = [[int(i == j) for j in range(n)] for i in range(n)]
    row = list(h)

    def colop(j: int, k: int, a: int, b: int, c: int, d: int) -> None:
        # (col_j, col_k) <- (a col_j + b col_k, c col_j + d col_k)
        for i in range(n):
            x, y = v[i][j], v[i][k]
            v[i][j], v[i][k] = a * x + b * y, c * x + d * y
        x, y = row[j], row[k]
        row[j], row[k] = a * x + b * y, c * x + d * y

    for k in range(1, n):
        if row[k] == 0:
            continue
        g, s, t = _ext_gcd(row[0], row[k])
        a0, ak = row[0] // g, row[k] // g
        # new col0 = s col0 + t colk (entry g); new colk = -ak col0 + a0 colk (entry 0)
        colop(0, k, s, t, -ak, a0)
    if row[0] == -1:
        for i in range(n):
            v[i][0] = -v[i][0]
        row[0] = 1
    assert row[0] == 1 and all(x == 0 for x in row[1:])
    return _int_inverse(v)


def _int_inverse(v: list[list[int]]) -> list[list[int]]:
    n = len(v)
    d = bareiss_det(v)
    if d not in (1, -1):
        raise AssertionError("completion is not unimodular")
    adj = [[(-1) ** (i + j) * bareiss_det(_minor(v, j, i)) for j in range(n)] for i in range(n)]
    return [[d * a for a in r] for r in adj]


def plane_coordinates(h: Sequence[int], points: Iterable[Sequence[int]]) -> tuple[list[list[int]], list[Vector]]:
    """Integer coordinates of points on a plane {h.x = c} in its own lattice.

    Returns (W, coords) with W from :func:`unimodular_completion` and
    ``coords[i]`` the last n-1 entries of W @ point.
    """
    w = unimodular_completion(h)
    coords = []
    for p in points:
        y = [sum(a * b for a, b in zip(r, p)) for r in w]
        coords.append(tuple(y[1:]))
    return w, coords
