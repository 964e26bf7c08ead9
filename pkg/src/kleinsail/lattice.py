"""Lattice point enumeration: boxes, and ellipsoids via LLL + Fincke-Pohst."""

from __future__ import annotations

import itertools
import math
from typing import Iterator

import numpy as np

from .errors import ResourceError

DEFAULT_NODE_CAP = 5_000_000


def box_chunks(bound: int, dim: int = 4) -> Iterator[np.ndarray]:
    """All integer points with max-norm <= bound, in lexicographic chunks."""
    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    tail = np.array(np.meshgrid(*([rng] * (dim - 1)), indexing="ij")).reshape(dim - 1, -1).T
    for first in rng:
        chunk = np.empty((len(tail), dim), dtype=np.int64)
        chunk[:, 0] = first
        chunk[:, 1:] = tail
        yield chunk


def lll_reduce(basis: np.ndarray, delta: float = 0.99) -> np.ndarray:
    """Unimodular U such that the columns of ``basis @ U`` are LLL-reduced.

    Floating point only affects the quality of the reduction; U is always
    an exact integer matrix of determinant +-1.
    """
    b = np.array(basis, dtype=float)
    n = b.shape[1]
    u = np.array([[int(i == j) for j in range(n)] for i in range(n)], dtype=object)

    def gso(bm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        bstar = np.zeros_like(bm)
        mu = np.zeros((n, n))
        for i in range(n):
            v = bm[:, i].copy()
            for j in range(i):
                denom = bstar[:, j] @ bstar[:, j]
                mu[i, j] = (bm[:, i] @ bstar[:, j]) / denom if denom else 0.0
                v -= mu[i, j] * bstar[:, j]
            bstar[:, i] = v
        return bstar, mu

    k = 1
    bstar, mu = gso(b)
    iterations = 0
    while k < n:
        iterations += 1
        if iterations > 10000:
            break
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[:, k] -= q * b[:, j]
                u[:, k] = u[:, k] - q * u[:, j]
                bstar, mu = gso(b)
        lhs = bstar[:, k] @ bstar[:, k]
        rhs = (delta - mu[k, k - 1] ** 2) * (bstar[:, k - 1] @ bstar[:, k - 1])
        if lhs >= rhs:
            k += 1
        else:
            b[:, [k - 1, k]] = b[:, [k, k - 1]]
            u[:, [k - 1, k]] = u[:, [k, k - 1]]
            bstar, mu = gso(b)
            k = max(k - 1, 1)
    return u


def ellipsoid_points(
    t: np.ndarray,
    center: np.ndarray,
    radius: float,
    node_cap: int = DEFAULT_NODE_CAP,
) -> np.ndarray:
    """Integer x with ||t @ x - center|| <= radius (Fincke-Pohst after LLL).

    ``t`` must be invertible.  Callers add their own safety margin to
    ``radius`` and filter the returned points exactly.
    """
    t = np.asarray(t, dtype=float)
    n = t.shape[0]
    u = lll_reduce(t)
    uf = u.astype(float)
    b = t @ uf
    q, r = np.linalg.qr(b)
    y = q.T @ np.asarray(center, dtype=float)
    rad2 = radius * radius
    found: list[tuple[int, ...]] = []
    nodes = 0
    z = [0] * n

    def recurse(i: int, partial: float) -> None:
        nonlocal nodes
        # residual target for coordinate i given z[i+1:]
        s = y[i] - sum(r[i, j] * z[j] for j in range(i + 1, n))
        rii = r[i, i]
        room = rad2 - partial
        if room < 0:
            return
        half = math.sqrt(room) / abs(rii)
        centre = s / rii
        lo = math.ceil(centre - half - 1e-12)
        hi = math.floor(centre + half + 1e-12)
        for zi in range(lo, hi + 1):
            nodes += 1
            if nodes > node_cap:
                raise ResourceError(f"lattice enumeration exceeded {node_cap} nodes")
            z[i] = zi
            d = rii * zi - s
            if i == 0:
                found.append(tuple(z))
            else:
                recurse(i - 1, partial + d * d)
        z[i] = 0

    recurse(n - 1, 0.0)
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    zs = np.array(found, dtype=object)
    xs = zs @ u.T
    return np.array(xs.tolist(), dtype=np.int64)


def count_l1_ball(dim: int, radius: int) -> int:
    """Number of integer vectors in Z^dim with L1 norm <= radius."""
    return sum(2**k * math.comb(dim, k) * math.comb(radius, k) for k in range(0, min(dim, radius) + 1))


def signed_compositions(total_max: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonzero integer tuples of length ``parts`` with L1 norm <= total_max."""
    for mags in itertools.product(range(1, total_max + 1), repeat=parts):
        if sum(mags) <= total_max:
            for signs in itertools.product((1, -1), repeat=parts):
                yield tuple(m * s for m, s in zip(mags, signs))
