"""Eigen-hyperplanes of a hyperbolic operator and the orthants they cut out."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import ClassificationError, DomainError, InvariantViolation
from .exact import (
    IntPoly,
    RealAlgebraic,
    Sign,
    algebraic_sign,
    is_irreducible,
    is_squarefree,
    isolate_real_roots,
)
from .matops import DIM, IntMatrix, adjugate_poly, char_poly, det

DEFAULT_PRECISION = 128
# roots are pre-refined this far so most exact signs need no bisection
_ROOT_WIDTH = Fraction(1, 2**200)
# relative slack for the vectorized float sign test; exact fallback below it
_FLOAT_SLACK = 1e-11


def _poly_combination(polys: Sequence[IntPoly], x: Sequence[int]) -> IntPoly:
    acc = IntPoly()
    for p, a in zip(polys, x):
        if a:
            acc = acc + p * int(a)
    return acc


def _mp_root(root: RealAlgebraic, prec: int) -> mpmath.mpf:
    with mpmath.workprec(prec):
        return mpmath.mpf(root.midpoint().numerator) / root.midpoint().denominator


def _mp_poly(p: IntPoly, x) -> mpmath.mpf:
    acc = mpmath.mpf(0)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class EigenForm:
    """Linear form x -> sum_k coeffs[k](lambda) * x_k, lambda = ``root``.

    Satisfies L(A x) = lambda L(x); its kernel is one eigen-hyperplane.
    """

    root: RealAlgebraic
    coeffs: tuple[IntPoly, ...]

    def poly(self, x: Sequence[int]) -> IntPoly:
        return _poly_combination(self.coeffs, x)

    def sign(self, x: Sequence[int]) -> Sign:
        return algebraic_sign(self.poly(x), self.root)

    def approx(self, prec: int = 64) -> list:
        with mpmath.workprec(prec + 20):
            lam = _mp_root(self.root, prec + 20)
            return [_mp_poly(q, lam) for q in self.coeffs]


@dataclass(frozen=True)
class EigenRay:
    """Right eigenvector with polynomial coordinates, evaluated at ``root``."""

    root: RealAlgebraic
    coords: tuple[IntPoly, ...]

    def pairing(self, h: Sequence[int]) -> IntPoly:
        return _poly_combination(self.coords, h)

    def approx(self, prec: int = 64) -> list:
        with mpmath.workprec(prec + 20):
            lam = _mp_root(self.root, prec + 20)
            return [_mp_poly(q, lam) for q in self.coords]


SignVector = tuple[int, ...]


def format_sign_vector(sigma: SignVector) -> str:
    return "".join("+" if s > 0 else "-" for s in sigma)


def parse_sign_vector(text: str) -> SignVector:
    if len(text) != DIM or set(text) - {"+", "-"}:
        raise DomainError(f"sign vector must be {DIM} characters of + and -: {text!r}")
    return tuple(1 if ch == "+" else -1 for ch in text)


def _is_companion(a: IntMatrix) -> bool:
    for i in range(DIM - 1):
        for j in range(DIM):
            if a[i, j] != int(j == i + 1):
                return False
    return True


def classify_charpoly(chi: IntPoly) -> str | None:
    """None for a hyperbolic irreducible quartic, else the failing property."""
    if not is_irreducible(chi):
        return "reducible charpoly"
    if not is_squarefree(chi) or len(isolate_real_roots(chi)) < DIM:
        return "not hyperbolic"
    return None


def eigen_forms(a: IntMatrix) -> tuple[EigenForm, ...]:
    """Four eigen-forms of ``a`` ordered by increasing eigenvalue."""
    d = det(a)
    if d not in (1, -1):
        raise ClassificationError(f"operator has determinant {d}; |det| = 1 required")
    chi = char_poly(a)
    problem = classify_charpoly(chi)
    if problem:
        raise ClassificationError(f"operator rejected: {problem} ({chi})")
    roots = [r.refined_to(_ROOT_WIDTH) for r in isolate_real_roots(chi)]
    if _is_companion(a):
        aa, bb, cc, dd = a.rows[DIM - 1]
        t = IntPoly([0, 1])
        row = (t**3 - t**2 * dd - t * cc - bb, t**2 - t * dd - cc, t - dd, IntPoly([1]))
    else:
        adj = adjugate_poly(a)
        row = None
        for i in reversed(range(DIM)):
            cand = tuple(adj[i])
            if any(not chi.divides(q) for q in cand if q):
                row = cand
                break
        if row is None:
            raise InvariantViolation("adjugate of tI - A vanishes modulo the characteristic polynomial")
    return tuple(EigenForm(r, tuple(row)) for r in roots)


def eigen_rays(a: IntMatrix, forms: Sequence[EigenForm]) -> tuple[EigenRay, ...]:
    """Right eigenvectors matching ``forms`` (same roots, same order)."""
    chi = char_poly(a)
    if _is_companion(a):
        t = IntPoly([0, 1])
        col = (IntPoly([1]), t, t**2, t**3)
    else:
        adj = adjugate_poly(a)
        col = None
        for j in range(DIM):
            cand = tuple(adj[i][j] for i in range(DIM))
            if any(not chi.divides(q) for q in cand if q):
                col = cand
                break
        if col is None:
            raise InvariantViolation("adjugate of tI - A vanishes modulo the characteristic polynomial")
    return tuple(EigenRay(f.root, col) for f in forms)


def orthant_sign_vector(x: Sequence[int], forms: Sequence[EigenForm]) -> SignVector:
    """Exact signs of every eigen-form at the integer point ``x``."""
    if not any(x):
        raise DomainError("the origin has no orthant")
    out = []
    for f in forms:
        s = f.sign(x)
        if s == Sign.ZERO:
            raise InvariantViolation(f"integer point {tuple(x)} lies on an eigen-hyperplane")
        out.append(int(s))
    return tuple(out)


@dataclass(frozen=True)
class OrthantSpec:
    """The open orthant {x : sigma_i L_i(x) > 0 for all i}."""

    operator: IntMatrix
    forms: tuple[EigenForm, ...]
    sigma: SignVector
    witness: tuple[int, ...]
    rays: tuple[EigenRay, ...] = field(default=(), compare=False)

    @cached_property
    def form_matrix(self) -> np.ndarray:
        """Float rows sigma_i * L_i."""
        rows = []
        for s, f in zip(self.sigma, self.forms):
            rows.append([s * float(v) for v in f.approx(64)])
        return np.array(rows)

    @cached_property
    def ray_orientation(self) -> tuple[int, ...]:
        """s_j with s_j * ray_j inside the closed orthant."""
        out = []
        for s, f, r in zip(self.sigma, self.forms, self.rays):
            val = IntPoly()
            for q, p in zip(f.coeffs, r.coords):
                val = val + q * p
            sg = algebraic_sign(val, f.root)
            if sg == Sign.ZERO:
                raise InvariantViolation("eigen-form vanishes on its own eigenvector")
            out.append(s * int(sg))
        return tuple(out)

    def ray_matrix(self, prec: int = 64) -> list[list]:
        """Oriented extreme rays as mpmath rows (ray j in row j)."""
        out = []
        for o, r in zip(self.ray_orientation, self.rays):
            out.append([o * v for v in r.approx(prec)])
        return out

    def contains(self, x: Sequence[int]) -> bool:
        if not any(x):
            return False
        return orthant_sign_vector(x, self.forms) == self.sigma

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of rows of ``points`` lying in the open orthant.

        Float evaluation decides every point whose value clears a rounding
        margin; the remaining ones are decided exactly.
        """
        pts = np.asarray(points)
        if pts.size == 0:
            return np.zeros(len(pts), dtype=bool)
        pf = pts.astype(float)
        m = self.form_matrix
        vals = pf @ m.T
        scale = np.abs(pf) @ np.abs(m).T
        sure = np.abs(vals) > _FLOAT_SLACK * scale + 1e-300
        # one surely-negative form already excludes the point
        outside = np.any(sure & (vals < 0), axis=1)
        all_sure = np.all(sure, axis=1)
        zero = ~np.any(pts != 0, axis=1)
        result = ~outside & all_sure & ~zero
        for idx in np.nonzero(~outside & ~all_sure & ~zero)[0]:
            result[idx] = self.contains(tuple(int(v) for v in pts[idx]))
        return result

    def ray_signs(self, h: Sequence[int]) -> tuple[int, ...]:
        """Exact signs of h paired with each oriented extreme ray."""
        out = []
        for o, r in zip(self.ray_orientation, self.rays):
            out.append(o * int(algebraic_sign(r.pairing(h), r.root)))
        return tuple(out)


def make_orthant(
    a: IntMatrix,
    sigma: SignVector | None = None,
    contains: Sequence[int] | None = (0, 0, 0, 1),
    forms: Sequence[EigenForm] | None = None,
) -> OrthantSpec:
    """Orthant given by ``sigma`` or by a point it must contain."""
    forms = tuple(forms) if forms is not None else eigen_forms(a)
    rays = eigen_rays(a, forms)
    if sigma is None:
        if contains is None:
            raise DomainError("need a sign vector or a point")
        sigma = orthant_sign_vector(contains, forms)
        witness = tuple(int(v) for v in contains)
    else:
        sigma = tuple(int(s) for s in sigma)
        witness = _find_witness(forms, sigma)
    return OrthantSpec(a, forms, sigma, witness, rays)


def _find_witness(forms: Sequence[EigenForm], sigma: SignVector) -> tuple[int, ...]:
    """A small integer point in the orthant, certified exactly."""
    # solve L x = sigma numerically, then scale until rounding lands inside
    with mpmath.workprec(128):
        m = mpmath.matrix([f.approx(128) for f in forms])
        x = mpmath.lu_solve(m, mpmath.matrix([int(s) for s in sigma]))
        for scale in (1, 2, 4, 8, 16, 64, 256, 1024, 2**16, 2**24):
            cand = tuple(int(mpmath.nint(scale * x[i] / max(abs(v) for v in x))) for i in range(DIM))
            if any(cand) and orthant_sign_vector(cand, forms) == tuple(sigma):
                return cand
    raise InvariantViolation(f"no integer witness found for orthant {format_sign_vector(sigma)}")


def log_coordinates(
    x: Sequence[int], forms: Sequence[EigenForm], precision: int = DEFAULT_PRECISION
) -> tuple[tuple[float, float, float], float]:
    """(log|L_i(x)| - log|L_4(x)|)_{i<4} with a guaranteed absolute error bound."""
    lams = []
    width = Fraction(1, 2 ** (precision + 8))
    for f in forms:
        r = f.root if f.root.width <= width else f.root.refined_to(width)
        lams.append(r)
    iv = mpmath.iv
    saved = iv.prec
    iv.prec = precision
    try:
        logs = []
        for f, r in zip(forms, lams):
            lam = iv.mpf([iv.mpf(r.lo.numerator) / r.lo.denominator, iv.mpf(r.hi.numerator) / r.hi.denominator])
            val = iv.mpf(0)
            for q, a in zip(f.coeffs, x):
                if a:
                    acc = iv.mpf(0)
                    for c in reversed(q.coeffs):
                        acc = acc * lam + c
                    val = val + acc * int(a)
            if val.a <= 0 <= val.b:
                raise DomainError(f"point {tuple(x)} is not certified inside an open orthant")
            logs.append(iv.log(abs(val)))
        diffs = [logs[i] - logs[-1] for i in range(len(logs) - 1)]
        coords = tuple(float(d.mid) for d in diffs)
        err = max(float(d.delta) / 2 for d in diffs) + 1e-15 * max(1.0, *(abs(c) for c in coords))
    finally:
        iv.prec = saved
    return coords, err


def log_translation(g: IntMatrix, orthant: OrthantSpec, precision: int = DEFAULT_PRECISION) -> tuple[tuple[float, ...], float]:
    """Constant shift of log-coordinates induced by g (g must preserve the orthant)."""
    w = orthant.witness
    a, ea = log_coordinates(w, orthant.forms, precision)
    b, eb = log_coordinates(g.apply(w), orthant.forms, precision)
    return tuple(y - x for x, y in zip(a, b)), ea + eb


def as_int_rows(points: Iterable[Sequence[int]]) -> np.ndarray:
    return np.array([list(map(int, p)) for p in points], dtype=np.int64).reshape(-1, DIM)
