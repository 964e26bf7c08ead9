"""Exports of a report document: JSON, OFF meshes and gluing schemes."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .config import dumps
from .matops import plane_coordinates
from .polytope import hull3

FORMATS = ("json", "off", "gluing")


def to_json(doc: dict[str, Any]) -> str:
    return dumps(doc)


def from_json(text: str) -> dict[str, Any]:
    return json.loads(text)


def to_off(doc: dict[str, Any]) -> str:
    """One OFF mesh holding every class representative of the fundamental domain.

    Each representative is drawn in integer coordinates of its own plane
    lattice and shifted along the first axis so the pieces do not overlap;
    polygons are the 2-faces of each representative.
    """
    verts: list[tuple[int, int, int]] = []
    polys: list[list[int]] = []
    shift = 0
    for c in doc["classes"]:
        rep = c["representative"]
        _, coords = plane_coordinates(rep["normal"], [tuple(v) for v in rep["vertices"]])
        poly = hull3(coords)
        lo = min(p[0] for p in coords)
        hi = max(p[0] for p in coords)
        base = len(verts)
        for p in coords:
            verts.append((p[0] - lo + shift, p[1], p[2]))
        for f in poly.faces:
            polys.append([base + i for i in f])
        shift += hi - lo + 2
    lines = ["OFF", f"{len(verts)} {len(polys)} 0"]
    lines += [" ".join(map(str, v)) for v in verts]
    lines += [" ".join(map(str, [len(f)] + f)) for f in polys]
    return "\n".join(lines) + "\n"


def to_gluing(doc: dict[str, Any]) -> str:
    return "".join(line + "\n" for line in doc["gluing"])


def parse_gluing(text: str) -> list[tuple[str, tuple[int, ...], str, str, tuple[int, ...]]]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        a, word, b = line.split()
        la, ia = a.split("/")
        lb, ib = b.split("/")
        out.append((la, tuple(map(int, ia.split(","))), word, lb, tuple(map(int, ib.split(",")))))
    return out


def export(doc: dict[str, Any], fmt: str, out: str | Path | None = None) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unsupported export format {fmt!r}; choose from {', '.join(FORMATS)}")
    text = {"json": to_json, "off": to_off, "gluing": to_gluing}[fmt](doc)
    if out is not None:
        Path(out).write_text(text)
    return text
