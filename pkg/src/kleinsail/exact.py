"""Exact polynomial arithmetic, Sturm root isolation and algebraic signs.

Rationals are :class:`fractions.Fraction`, which normalizes eagerly
(positive denominator, lowest terms).  Integer polynomials are immutable
and hashable so Sturm sequences can be cached per polynomial.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import BudgetError, DomainError, RootOnEndpointError

Number = Union[int, Fraction]

DEFAULT_BUDGET = 256


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b) if a and b else 0


class IntPoly:
    """Polynomial with integer coefficients, stored in ascending degree."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable[int] = ()):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[int, ...] = tuple(cs)
        self._hash = hash(self.coeffs)

    @classmethod
    def from_rational(cls, coeffs: Sequence[Number]) -> "IntPoly":
        """Scale rational coefficients by a positive factor to a primitive integer polynomial."""
        fr = [Fraction(c) for c in coeffs]
        den = 1
        for c in fr:
            den = _lcm(den, c.denominator)
        return cls(int(c * den) for c in fr).primitive()

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> "IntPoly":
        return cls([0] * k + [c])

    @classmethod
    def constant(cls, c: int) -> "IntPoly":
        return cls([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = IntPoly([other])
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"IntPoly({list(self.coeffs)})"

    def __str__(self) -> str:
        return self.format("t")

    def format(self, var: str = "t") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if k == 0:
                body = str(a)
            else:
                mono = var if k == 1 else f"{var}^{k}"
                body = mono if a == 1 else f"{a}*{mono}"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __neg__(self) -> "IntPoly":
        return IntPoly(-c for c in self.coeffs)

    def __add__(self, other) -> "IntPoly":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __sub__(self, other) -> "IntPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "IntPoly":
        return _as_poly(other) - self

    def __mul__(self, other) -> "IntPoly":
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return IntPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IntPoly":
        if k < 0:
            raise DomainError("negative power of a polynomial")
        result = IntPoly([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def derivative(self) -> "IntPoly":
        return IntPoly(k * c for k, c in enumerate(self.coeffs) if k)

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def primitive(self) -> "IntPoly":
        """Divide by the content, keeping the sign of every value."""
        g = self.content()
        if g <= 1:
            return self
        return IntPoly(c // g for c in self.coeffs)

    def compose_neg(self) -> "IntPoly":
        """p(-t)."""
        return IntPoly(c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs))

    def reciprocal(self) -> "IntPoly":
        """t^deg p(1/t)."""
        return IntPoly(reversed(self.coeffs))

    def divmod_rational(self, other: "IntPoly") -> tuple[list[Fraction], list[Fraction]]:
        """Quotient and remainder over Q, ascending coefficient lists."""
        if not other.coeffs:
            raise DomainError("division by the zero polynomial")
        rem = [Fraction(c) for c in self.coeffs]
        dq = other.degree
        lc = Fraction(other.lc)
        if len(rem) - 1 < dq:
            return [], rem
        quo = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            coef = rem[k] / lc
            quo[k - dq] = coef
            if coef:
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= coef * b
        rem = rem[:dq]
        while rem and rem[-1] == 0:
            rem.pop()
        return quo, rem

    def rem_primitive(self, other: "IntPoly") -> "IntPoly":
        """Remainder over Q, scaled by a positive constant to a primitive integer polynomial."""
        _, r = self.divmod_rational(other)
        return IntPoly.from_rational(r) if r else IntPoly()

    def divides(self, other: "IntPoly") -> bool:
        """True when self divides other over Q."""
        _, r = other.divmod_rational(self)
        return not r

    def exact_quotient(self, other: "IntPoly") -> "IntPoly":
        """self / other, which must be exact with a primitive integer quotient up to scaling."""
        q, r = self.divmod_rational(other)
        if r:
            raise DomainError(f"{other} does not divide {self}")
        return IntPoly.from_rational(q)


def _as_poly(x) -> IntPoly:
    if isinstance(x, IntPoly):
        return x
    if isinstance(x, int):
        return IntPoly([x])
    raise TypeError(f"cannot use {type(x).__name__} as IntPoly")


T = IntPoly([0, 1])


def poly_gcd(a: IntPoly, b: IntPoly) -> IntPoly:
    """Primitive gcd with positive leading coefficient."""
    a, b = a.primitive(), b.primitive()
    while b:
        a, b = b, a.rem_primitive(b)
    if not a:
        return a
    return -a if a.lc < 0 else a


def squarefree_part(p: IntPoly) -> IntPoly:
    if not p:
        raise DomainError("zero polynomial has no squarefree part")
    g = poly_gcd(p, p.derivative())
    if g.degree <= 0:
        return p.primitive()
    return p.exact_quotient(g)


def is_squarefree(p: IntPoly) -> bool:
    return poly_gcd(p, p.derivative()).degree <= 0


def sign(x) -> int:
    return (x > 0) - (x < 0)


# --- Sturm sequences --------------------------------------------------------


@functools.lru_cache(maxsize=4096)
def sturm_sequence(p: IntPoly) -> tuple[IntPoly, ...]:
    """Canonical Sturm chain p, p', -rem(p, p'), ... with primitive members."""
    if not p:
        raise DomainError("Sturm sequence of the zero polynomial")
    seq = [p, p.derivative()]
    while seq[-1] and seq[-1].degree > 0:
        r = seq[-2].rem_primitive(seq[-1])
        if not r:
            break
        seq.append(-r)
    return tuple(q for q in seq if q)


def _sign_changes(values: Iterable[int]) -> int:
    last = 0
    changes = 0
    for v in values:
        s = sign(v)
        if s == 0:
            continue
        if last and s != last:
            changes += 1
        last = s
    return changes


def _variations_at(seq: Sequence[IntPoly], x: Fraction) -> int:
    return _sign_changes(q(x) for q in seq)


def _variations_at_infinity(seq: Sequence[IntPoly], positive: bool) -> int:
    vals = []
    for q in seq:
        s = sign(q.lc)
        if not positive and q.degree % 2 == 1:
            s = -s
        vals.append(s)
    return _sign_changes(vals)


def sturm_count(p: IntPoly, lo: Number, hi: Number) -> int:
    """Number of distinct real roots of ``p`` in the open interval (lo, hi)."""
    lo, hi = Fraction(lo), Fraction(hi)
    if not p:
        raise DomainError("zero polynomial")
    if lo >= hi:
        raise DomainError("sturm_count needs lo < hi")
    if p(lo) == 0 or p(hi) == 0:
        raise RootOnEndpointError(f"interval endpoint is a root of {p}")
    seq = sturm_sequence(p)
    return _variations_at(seq, lo) - _variations_at(seq, hi)


def real_root_count(p: IntPoly) -> int:
    """Number of distinct real roots of ``p`` over the whole line."""
    seq = sturm_sequence(p)
    return _variations_at_infinity(seq, False) - _variations_at_infinity(seq, True)


def cauchy_bound(p: IntPoly) -> Fraction:
    lc = abs(p.lc)
    return 1 + Fraction(max((abs(c) for c in p.coeffs[:-1]), default=0), lc)


# --- real algebraic numbers -------------------------------------------------


@dataclass(frozen=True)
class RealAlgebraic:
    """A real root of ``minpoly``, the unique one in the interval [lo, hi].

    Instances are immutable; :meth:`refine` returns a new, tighter value.
    ``lo == hi`` marks an exactly known rational root.
    """

    minpoly: IntPoly
    lo: Fraction
    hi: Fraction
    budget: int = DEFAULT_BUDGET

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def refine(self, steps: int = 1) -> "RealAlgebraic":
        """Bisect ``steps`` times by the sign of the minimal polynomial."""
        if self.is_exact:
            return self
        p = self.minpoly
        lo, hi = self.lo, self.hi
        s_lo = sign(p(lo))
        for _ in range(steps):
            mid = (lo + hi) / 2
            s_mid = sign(p(mid))
            if s_mid == 0:
                lo = hi = mid
                break
            if s_mid == s_lo:
                lo = mid
            else:
                hi = mid
        return RealAlgebraic(p, lo, hi, self.budget)

    def refined_to(self, width: Fraction) -> "RealAlgebraic":
        """Refine until the interval is at most ``width`` wide, within the budget."""
        r = self
        used = 0
        while r.width > width:
            if used >= r.budget:
                raise BudgetError(f"could not refine root of {self.minpoly} to width {float(width):.3g}")
            r = r.refine(1)
            used += 1
        return r

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.midpoint())

    def check(self) -> bool:
        """Verify the isolation invariant exactly."""
        if self.is_exact:
            return self.minpoly(self.lo) == 0
        a, b = self.minpoly(self.lo), self.minpoly(self.hi)
        if a == 0 or b == 0:
            return sign(a) != sign(b)
        return sturm_count(self.minpoly, self.lo, self.hi) == 1


def _nonroot_split(p: IntPoly, lo: Fraction, hi: Fraction) -> Fraction:
    """A point strictly inside (lo, hi) that is not a root of p."""
    k = 2
    while True:
        for j in range(1, k):
            x = lo + (hi - lo) * j / k
            if p(x) != 0:
                return x
        k += 1


def isolate_real_roots(p: IntPoly, budget: int = DEFAULT_BUDGET) -> list[RealAlgebraic]:
    """Disjoint isolating intervals for all real roots of a squarefree ``p``, increasing."""
    if not p:
        raise DomainError("cannot isolate roots of the zero polynomial")
    if not is_squarefree(p):
        raise DomainError(f"{p} is not squarefree; divide by gcd(p, p') first")
    if p.degree == 0:
        return []
    p = p.primitive()
    m = cauchy_bound(p)
    lo, hi = -m, m
    # the Cauchy bound is strict, so neither endpoint is a root
    out: list[RealAlgebraic] = []
    stack = [(lo, hi, sturm_count(p, lo, hi))]
    while stack:
        a, b, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            out.append(RealAlgebraic(p, a, b, budget))
            continue
        mid = _nonroot_split(p, a, b)
        left = sturm_count(p, a, mid)
        stack.append((mid, b, n - left))
        stack.append((a, mid, left))
    out.sort(key=lambda r: r.lo)
    return out


# --- exact sign evaluation --------------------------------------------------


class Sign(enum.IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


def _interval_eval(coeffs: Sequence[Number], lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Rational interval enclosing {q(x) : lo <= x <= hi} via Horner."""
    a = b = Fraction(0)
    for c in reversed(coeffs):
        prods = (a * lo, a * hi, b * lo, b * hi)
        a = min(prods) + c
        b = max(prods) + c
    return a, b


def algebraic_sign(q: IntPoly, root: RealAlgebraic) -> Sign:
    """Exact sign of q(root).

    Zero is decided algebraically (a common factor of ``q`` and the minimal
    polynomial vanishing in the isolating interval); nonzero signs come from
    interval evaluation with bisection, never from a guess.
    """
    if not q:
        return Sign.ZERO
    if q.degree == 0:
        return Sign(sign(q.lc))
    p = root.minpoly
    if root.is_exact:
        return Sign(sign(q(root.lo)))
    a, b = _interval_eval(q.coeffs, root.lo, root.hi)
    if a > 0:
        return Sign.POSITIVE
    if b < 0:
        return Sign.NEGATIVE
    _, rem = q.divmod_rational(p)
    if not rem:
        return Sign.ZERO
    g = poly_gcd(q, p)
    if g.degree >= 1:
        gs = squarefree_part(g)
        lo, hi = root.lo, root.hi
        if gs(lo) == 0 or gs(hi) == 0 or sturm_count(gs, lo, hi) > 0:
            return Sign.ZERO
    r = root
    for _ in range(root.budget + 1):
        a, b = _interval_eval(rem, r.lo, r.hi)
        if a > 0:
            return Sign.POSITIVE
        if b < 0:
            return Sign.NEGATIVE
        if r.is_exact:
            return Sign(sign(a))
        r = r.refine(1)
    raise BudgetError(f"sign of {q} at root of {p} not certified within {root.budget} bisections")


def eval_interval(q: IntPoly, root: RealAlgebraic) -> tuple[Fraction, Fraction]:
    """Rational enclosure of q(root) from the current isolating interval."""
    return _interval_eval(q.coeffs, root.lo, root.hi)


# --- factorization tests ----------------------------------------------------


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def rational_roots(p: IntPoly) -> list[Fraction]:
    """All rational roots of an integer polynomial (rational root theorem)."""
    if not p:
        raise DomainError("zero polynomial")
    out = set()
    cs = list(p.coeffs)
    if cs[0] == 0:
        out.add(Fraction(0))
        while cs and cs[0] == 0:
            cs.pop(0)
    q = IntPoly(cs)
    if q.degree <= 0:
        return sorted(out)
    for num in _divisors(q.coeffs[0]):
        for den in _divisors(q.lc):
            for s in (1, -1):
                x = Fraction(s * num, den)
                if q(x) == 0:
                    out.add(x)
    return sorted(out)


def _has_monic_quadratic_factor(p: IntPoly) -> bool:
    """Monic quartic p = (t^2 + b t + c)(t^2 + e t + f) over Z?"""
    a0, a1, a2, a3, _ = p.coeffs
    for c in _divisors(a0):
        for c_signed in (c, -c):
            f, rem = divmod(a0, c_signed)
            if rem:
                continue
            if f != c_signed:
                num = a1 - c_signed * a3
                den = f - c_signed
                if num % den:
                    continue
                b = num // den
                e = a3 - b
                if c_signed + f + b * e == a2:
                    return True
            else:
                if a1 != c_signed * a3:
                    continue
                disc = a3 * a3 - 4 * (a2 - 2 * c_signed)
                if disc >= 0 and math.isqrt(disc) ** 2 == disc and (a3 + math.isqrt(disc)) % 2 == 0:
                    return True
    return False


def is_irreducible(p: IntPoly) -> bool:
    """Irreducibility over Q for integer polynomials of degree at most 4.

    Degree 4 requires a monic polynomial (characteristic polynomials are).
    """
    d = p.degree
    if d <= 0:
        return False
    if p.content() != 1 and d == 0:
        return False
    if d == 1:
        return True
    if rational_roots(p):
        return False
    if d <= 3:
        return True
    if d == 4:
        if p.lc != 1:
            raise NotImplementedError("quadratic factor search needs a monic quartic")
        return not _has_monic_quadratic_factor(p)
    raise NotImplementedError("irreducibility test implemented up to degree 4")


def discriminant(p: IntPoly) -> int:
    """Discriminant via the resultant of p and p' (Sylvester determinant)."""
    n = p.degree
    if n < 1:
        raise DomainError("discriminant needs degree >= 1")
    dp = p.derivative()
    res = _resultant(p, dp)
    sgn = -1 if (n * (n - 1) // 2) % 2 else 1
    val = Fraction(sgn * res, p.lc)
    assert val.denominator == 1
    return int(val)


def _resultant(a: IntPoly, b: IntPoly) -> int:
    m, n = a.degree, b.degree
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(reversed(a.coeffs)) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(reversed(b.coeffs)) + [0] * (size - n - 1 - i))
    return bareiss_det(rows)


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    m = [list(map(int, r)) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sgn = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sgn = -sgn
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sgn * m[n - 1][n - 1]


def is_rational_square(x: Fraction) -> bool:
    x = Fraction(x)
    if x < 0:
        return False
    n, d = x.numerator, x.denominator
    return math.isqrt(n) ** 2 == n and math.isqrt(d) ** 2 == d
