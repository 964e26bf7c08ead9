"""Exhaustive survey of small integer 4x4 matrices against Example 1.

Matrices are enumerated in blocks sharing the number of nonzero entries and
their magnitudes; determinants and characteristic polynomials are computed
in vectorized int64 arithmetic, and every distinct characteristic
polynomial is then classified exactly once.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .cone import classify_charpoly
from .exact import IntPoly, discriminant, is_rational_square
from .lattice import count_l1_ball
from .matops import DIM, IntMatrix, char_poly, companion, det, poly_at_matrix

log = logging.getLogger(__name__)

NOT_UNIMODULAR = "not unimodular"
REDUCIBLE = "reducible charpoly"
NOT_HYPERBOLIC = "not hyperbolic"
CANDIDATE = "candidate"
VERDICTS = (NOT_UNIMODULAR, REDUCIBLE, NOT_HYPERBOLIC, CANDIDATE)

MATCHED = "matched"
INEQUIVALENT = "inequivalent"
UNRESOLVED = "unresolved"

DEFAULT_CAP = 8
WORKERS_ENV = "KLEINSAIL_WORKERS"
# search ranges for the conjugacy shortcut
_POLY_BOX = 3
_KRYLOV_BOX = 2


@dataclass(frozen=True)
class MatrixClassification:
    matrix: IntMatrix
    verdict: str
    charpoly: IntPoly


def classify(m: IntMatrix) -> MatrixClassification:
    chi = char_poly(m)
    if det(m) not in (1, -1):
        return MatrixClassification(m, NOT_UNIMODULAR, chi)
    problem = classify_charpoly(chi)
    return MatrixClassification(m, problem or CANDIDATE, chi)


# --- enumeration -----------------------------------------------------------------


def _magnitudes(k: int, total: int) -> list[tuple[int, ...]]:
    return [m for m in itertools.product(range(1, total + 1), repeat=k) if sum(m) <= total]


def block_keys(max_abs_sum: int) -> list[tuple[int, tuple[int, ...]]]:
    """(support size, magnitudes) in enumeration order."""
    if max_abs_sum < 1:
        raise ValueError("max_abs_sum must be at least 1")
    total = max_abs_sum - 1
    keys = []
    for k in range(0, min(total, DIM * DIM) + 1):
        for mags in _magnitudes(k, total):
            keys.append((k, mags))
    return keys


def block_matrices(k: int, mags: Sequence[int]) -> np.ndarray:
    """All matrices (as n x 16 int64 rows) with the given nonzero magnitudes,
    ordered by support (lexicographic) then sign pattern."""
    if k == 0:
        return np.zeros((1, DIM * DIM), dtype=np.int64)
    supports = np.array(list(itertools.combinations(range(DIM * DIM), k)), dtype=np.int64)
    signs = np.array(list(itertools.product((1, -1), repeat=k)), dtype=np.int64)
    vals = signs * np.array(mags, dtype=np.int64)
    n_sup, n_sig = len(supports), len(signs)
    out = np.zeros((n_sup * n_sig, DIM * DIM), dtype=np.int64)
    rows = np.arange(n_sup * n_sig)
    sup_rep = np.repeat(supports, n_sig, axis=0)
    val_rep = np.tile(vals, (n_sup, 1))
    for j in range(k):
        out[rows, sup_rep[:, j]] = val_rep[:, j]
    return out


def enumerate_matrices(max_abs_sum: int) -> Iterator[IntMatrix]:
    """Every 4x4 integer matrix with sum of |entries| < max_abs_sum, once."""
    for k, mags in block_keys(max_abs_sum):
        for row in block_matrices(k, mags):
            yield IntMatrix(row.reshape(DIM, DIM).tolist())


def expected_count(max_abs_sum: int) -> int:
    return count_l1_ball(DIM * DIM, max_abs_sum - 1)


def batch_charpolys(mats: np.ndarray) -> np.ndarray:
    """Rows (c0, c1, c2, c3) with det(tI - M) = t^4 + c3 t^3 + c2 t^2 + c1 t + c0."""
    x = mats.reshape(-1, DIM, DIM)
    ident = np.eye(DIM, dtype=np.int64)
    mk = x.copy()
    cs = []
    c = -np.trace(mk, axis1=1, axis2=2)
    cs.append(c)
    for k in range(2, DIM + 1):
        mk = x @ (mk + c[:, None, None] * ident)
        tr = np.trace(mk, axis1=1, axis2=2)
        c = -tr // k
        cs.append(c)
    # cs = [c3, c2, c1, c0]
    return np.stack(cs[::-1], axis=1)


def batch_det(mats: np.ndarray) -> np.ndarray:
    return np.rint(np.linalg.det(mats.reshape(-1, DIM, DIM).astype(float))).astype(np.int64)


# --- block processing ---------------------------------------------------------------


@dataclass
class BlockResult:
    key: tuple[int, tuple[int, ...]]
    total: int
    not_unimodular: int
    # charpoly coefficients -> {det: count}
    polys: dict[tuple[int, ...], dict[int, int]]
    # unimodular matrices, kept only for charpolys later found to be candidates
    unimodular: list[tuple[tuple[int, ...], int, tuple[int, ...]]]


def process_block(key: tuple[int, tuple[int, ...]]) -> BlockResult:
    k, mags = key
    mats = block_matrices(k, mags)
    d = batch_det(mats)
    uni = np.abs(d) == 1
    sub = mats[uni]
    polys: dict[tuple[int, ...], dict[int, int]] = {}
    kept = []
    if len(sub):
        cps = batch_charpolys(sub)
        for row, cp, dd in zip(sub.tolist(), cps.tolist(), d[uni].tolist()):
            cp = tuple(cp) + (1,)
            bucket = polys.setdefault(cp, {})
            bucket[dd] = bucket.get(dd, 0) + 1
            kept.append((cp, dd, tuple(row)))
    return BlockResult(key, len(mats), int((~uni).sum()), polys, kept)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


# --- conjugacy shortcut -----------------------------------------------------------


def _krylov(m: IntMatrix, box: int = _KRYLOV_BOX) -> IntMatrix | None:
    """Unimodular K with rows w, wM, wM^2, wM^3 (so K M K^-1 is a companion)."""
    mt = m.T
    vecs = sorted(itertools.product(range(-box, box + 1), repeat=DIM), key=lambda v: (sum(map(abs, v)), v))
    for w in vecs:
        if not any(w):
            continue
        rows = [w]
        for _ in range(DIM - 1):
            rows.append(mt.apply(rows[-1]))
        k = IntMatrix(rows)
        if det(k) in (1, -1):
            return k
    return None


def _int_solve_conj(km: IntMatrix, kn: IntMatrix) -> IntMatrix:
    from .matops import inverse

    return inverse(km) @ kn


@dataclass(frozen=True)
class ConjugacyWitness:
    """M = P N P^-1 with N = q(A) for the reference operator A."""

    q: IntPoly
    p: IntMatrix


class ReferenceOrder:
    """Characteristic polynomials of small elements of Z[A] with a cyclic
    (Krylov) basis, used to recognise matrices conjugate into Z[A]."""

    def __init__(self, a: IntMatrix, box: int = _POLY_BOX):
        self.a = a
        self.chi = char_poly(a)
        self.disc = discriminant(self.chi)
        self.box = box
        self._table: dict[IntPoly, list[IntPoly]] | None = None

    @property
    def table(self) -> dict[IntPoly, list[IntPoly]]:
        if self._table is None:
            table: dict[IntPoly, list[IntPoly]] = {}
            qs = sorted(
                itertools.product(range(-self.box, self.box + 1), repeat=DIM),
                key=lambda c: (sum(map(abs, c)), c),
            )
            for cs in qs:
                q = IntPoly(cs)
                if q.degree < 1:
                    continue
                n = poly_at_matrix(q, self.a)
                if det(n) not in (1, -1):
                    continue
                table.setdefault(char_poly(n), []).append(q)
            self._table = table
        return self._table

    def field_obstructed(self, chi: IntPoly) -> bool:
        """True if Q[t]/chi cannot be the reference field: the ratio of the
        polynomial discriminants is not a rational square."""
        return not is_rational_square(Fraction(discriminant(chi), self.disc))

    def conjugate(self, m: IntMatrix) -> ConjugacyWitness | None:
        chi = char_poly(m)
        km = _krylov(m)
        if km is None:
            return None
        for q in self.table.get(chi, ()):
            n = poly_at_matrix(q, self.a)
            kn = _krylov(n)
            if kn is None:
                continue
            p = _int_solve_conj(km, kn)
            if det(p) in (1, -1) and p @ n == m @ p:
                return ConjugacyWitness(q, p)
        return None


# --- the survey ----------------------------------------------------------------------


@dataclass
class CandidateEntry:
    matrix: IntMatrix
    charpoly: IntPoly
    det: int
    status: str
    reason: str = ""
    fingerprint: dict | None = None
    witness: ConjugacyWitness | None = None

    def to_dict(self) -> dict:
        d = {
            "matrix": self.matrix.tolist(),
            "charpoly": list(self.charpoly.coeffs),
            "det": self.det,
            "status": self.status,
            "reason": self.reason,
            "fingerprint": self.fingerprint,
            "match": self.status == MATCHED,
        }
        if self.witness is not None:
            d["conjugator"] = self.witness.p.tolist()
            d["reference_polynomial"] = list(self.witness.q.coeffs)
        return d


@dataclass
class SurveyReport:
    bound: int
    total: int
    counts: dict[str, int]
    det_sign_counts: dict[str, dict[str, int]]
    charpoly_counts: dict[str, int]
    candidates: list[CandidateEntry]
    reference_fingerprint: dict | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def unresolved(self) -> list[CandidateEntry]:
        return [c for c in self.candidates if c.status == UNRESOLVED]

    @property
    def mismatched(self) -> list[CandidateEntry]:
        return [c for c in self.candidates if c.status == INEQUIVALENT]

    def to_dict(self) -> dict:
        status_counts = {s: 0 for s in (MATCHED, INEQUIVALENT, UNRESOLVED)}
        for c in self.candidates:
            status_counts[c.status] += 1
        return {
            "bound": self.bound,
            "enumerated": self.total,
            "counts": self.counts,
            "det_sign_counts": self.det_sign_counts,
            "distinct_unimodular_charpolys": self.charpoly_counts,
            "reference_fingerprint": self.reference_fingerprint,
            "candidate_status_counts": status_counts,
            "unresolved_count": status_counts[UNRESOLVED],
            "candidates": [c.to_dict() for c in self.candidates],
            "notes": self.notes,
        }


def _load_checkpoint(path: Path | None, bound: int) -> dict:
    if path is None or not path.exists():
        return {}
    data = json.loads(path.read_text())
    if data.get("bound") != bound:
        return {}
    return data


def _save_checkpoint(path: Path | None, bound: int, done: list[dict]) -> None:
    if path is None:
        return
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps({"bound": bound, "blocks": done}, sort_keys=True))
    tmp.replace(path)


def _result_to_json(r: BlockResult, candidate_polys: set | None = None) -> dict:
    return {
        "key": [r.key[0], list(r.key[1])],
        "total": r.total,
        "not_unimodular": r.not_unimodular,
        "polys": [[list(cp), sorted([int(d), n] for d, n in b.items())] for cp, b in sorted(r.polys.items())],
        "unimodular": [[list(cp), d, list(row)] for cp, d, row in r.unimodular if candidate_polys is None or cp in candidate_polys],
    }


def _result_from_json(d: dict) -> BlockResult:
    polys = {tuple(cp): {int(k): int(n) for k, n in b} for cp, b in d["polys"]}
    uni = [(tuple(cp), int(dd), tuple(row)) for cp, dd, row in d["unimodular"]]
    return BlockResult((d["key"][0], tuple(d["key"][1])), d["total"], d["not_unimodular"], polys, uni)


_VERDICT_CACHE: dict[tuple[int, ...], str] = {}


def _poly_verdict(cp: tuple[int, ...]) -> str:
    if cp not in _VERDICT_CACHE:
        _VERDICT_CACHE[cp] = classify_charpoly(IntPoly(cp)) or CANDIDATE
    return _VERDICT_CACHE[cp]


def _slim(r: BlockResult) -> BlockResult:
    """Keep only the matrices whose characteristic polynomial is a candidate."""
    keep = [u for u in r.unimodular if _poly_verdict(u[0]) == CANDIDATE]
    return BlockResult(r.key, r.total, r.not_unimodular, r.polys, keep)


def _process_slim(key):
    return _slim(process_block(key))


def scan(max_abs_sum: int, checkpoint: Path | None = None, workers: int | None = None) -> list[BlockResult]:
    """Process every enumeration block, resuming from ``checkpoint``."""
    keys = block_keys(max_abs_sum)
    state = _load_checkpoint(checkpoint, max_abs_sum)
    done = {(b["key"][0], tuple(b["key"][1])): _result_from_json(b) for b in state.get("blocks", [])}
    todo = [k for k in keys if k not in done]
    workers = workers or _workers()
    if todo:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                for r in ex.map(_process_slim, todo, chunksize=1):
                    done[r.key] = r
                    _save_checkpoint(checkpoint, max_abs_sum, [_result_to_json(done[k]) for k in keys if k in done])
        else:
            for key in todo:
                done[key] = _process_slim(key)
                _save_checkpoint(checkpoint, max_abs_sum, [_result_to_json(done[k]) for k in keys if k in done])
    return [done[k] for k in keys]


def run_survey(
    max_abs_sum: int,
    reference: IntMatrix | None = None,
    reference_fingerprint: dict | None = None,
    cap: int = DEFAULT_CAP,
    checkpoint: Path | None = None,
    workers: int | None = None,
    matrices: Sequence[IntMatrix] | None = None,
) -> SurveyReport:
    """Classify all matrices below the bound and resolve every candidate.

    A candidate is matched when it is integrally conjugate to a polynomial in
    the reference operator (then its continued fraction is the image of the
    reference one under the conjugator and every face invariant transfers);
    inequivalent when its eigenvalue field differs from the reference field;
    unresolved otherwise.  ``matrices`` replaces the enumeration.
    """
    if max_abs_sum > cap:
        raise ValueError(f"bound {max_abs_sum} exceeds the configured cap {cap}")
    reference = reference or companion((1, -3, 0, 4))
    order = ReferenceOrder(reference)
    counts = {v: 0 for v in VERDICTS}
    signs = {v: {"+1": 0, "-1": 0} for v in (REDUCIBLE, NOT_HYPERBOLIC, CANDIDATE)}
    polys_by_verdict: dict[str, set] = {v: set() for v in (REDUCIBLE, NOT_HYPERBOLIC, CANDIDATE)}
    cand_rows: list[tuple[tuple[int, ...], int, tuple[int, ...]]] = []
    if matrices is not None:
        total = len(matrices)
        for m in matrices:
            c = classify(m)
            counts[c.verdict] += 1
            if c.verdict != NOT_UNIMODULAR:
                d = det(m)
                signs[c.verdict][f"{d:+d}"] += 1
                polys_by_verdict[c.verdict].add(c.charpoly.coeffs)
                if c.verdict == CANDIDATE:
                    cand_rows.append((c.charpoly.coeffs, d, tuple(a for r in m.rows for a in r)))
    else:
        results = scan(max_abs_sum, checkpoint, workers)
        total = sum(r.total for r in results)
        if total != expected_count(max_abs_sum):
            raise AssertionError("enumeration count disagrees with the closed form")
        for r in results:
            counts[NOT_UNIMODULAR] += r.not_unimodular
            for cp, bucket in r.polys.items():
                v = _poly_verdict(cp)
                polys_by_verdict[v].add(cp)
                for d, n in bucket.items():
                    counts[v] += n
                    signs[v][f"{d:+d}"] += n
            cand_rows.extend(u for u in r.unimodular if _poly_verdict(u[0]) == CANDIDATE)
    entries = []
    for cp, d, row in cand_rows:
        m = IntMatrix(np.array(row).reshape(DIM, DIM).tolist())
        chi = IntPoly(cp)
        if order.field_obstructed(chi):
            entries.append(
                CandidateEntry(
                    m, chi, d, INEQUIVALENT,
                    f"discriminant ratio {discriminant(chi)}/{order.disc} is not a rational square: "
                    "the eigenvalue fields differ, so no lattice map relates the continued fractions",
                )
            )
            continue
        wit = order.conjugate(m)
        if wit is None:
            entries.append(CandidateEntry(m, chi, d, UNRESOLVED, "no conjugator into Z[A] found"))
            continue
        entries.append(
            CandidateEntry(
                m, chi, d, MATCHED,
                "M = P q(A) P^-1 with q(A) in Z[A]: the sails of M are P-images of the reference sails",
                reference_fingerprint, wit,
            )
        )
    return SurveyReport(
        bound=max_abs_sum,
        total=total,
        counts=counts,
        det_sign_counts=signs,
        charpoly_counts={v: len(s) for v, s in polys_by_verdict.items()},
        candidates=entries,
        reference_fingerprint=reference_fingerprint,
        notes=[
            "matrices with |det| = 1 are kept; det +1 and det -1 populations are counted separately",
            "matched candidates carry the reference fingerprint by transfer through the exhibited conjugator",
        ],
    )
