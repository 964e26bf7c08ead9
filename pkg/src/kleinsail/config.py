"""Run configurations (JSON) and the shipped example data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any

from .cone import DEFAULT_PRECISION
from .errors import DomainError
from .matops import IntMatrix, companion
from .quotient import DEFAULT_EXPONENT_BOX
from .sail import DEFAULT_BOUND_CAP

BUILTIN = ("example1", "example2", "example3", "statement2")


@dataclass
class RunConfig:
    """Everything needed to run the pipeline on one operator."""

    name: str = "custom"
    companion: tuple[int, int, int, int] | None = None
    matrix: tuple[tuple[int, ...], ...] | None = None
    generators: tuple[str, ...] = ()
    generator_names: tuple[str, ...] = ()
    contains: tuple[int, ...] | None = (0, 0, 0, 1)
    sigma: str | None = None
    seeds: tuple[tuple[int, ...], ...] = ()
    bound_cap: int = DEFAULT_BOUND_CAP
    depth: int = 1
    precision: int = DEFAULT_PRECISION
    exponent_box: int = DEFAULT_EXPONENT_BOX
    golden: str | None = None
    out: str | None = None

    def operator(self) -> IntMatrix:
        if (self.companion is None) == (self.matrix is None):
            raise DomainError("config needs exactly one of 'companion' and 'matrix'")
        if self.companion is not None:
            return companion(self.companion)
        return IntMatrix(self.matrix)

    def names(self) -> tuple[str, ...]:
        if self.generator_names:
            return self.generator_names
        return tuple(f"B{i + 1}" for i in range(len(self.generators)))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = _plain(v)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(unknown)}")
        kw: dict[str, Any] = {}
        for k, v in d.items():
            if k in ("companion", "contains") and v is not None:
                v = tuple(int(a) for a in v)
            elif k == "matrix" and v is not None:
                v = tuple(tuple(int(a) for a in r) for r in v)
            elif k == "seeds":
                v = tuple(tuple(int(a) for a in s) for s in v)
            elif k in ("generators", "generator_names"):
                v = tuple(str(a) for a in v)
            kw[k] = v
        cfg = cls(**kw)
        if cfg.generator_names and len(cfg.generator_names) != len(cfg.generators):
            raise DomainError("generator_names must match generators")
        return cfg

    def dumps(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(a) for a in v]
    return v


def dumps(obj) -> str:
    """Canonical JSON text used for every emitted document."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def normalize(text: str) -> str:
    """Canonical form of a config text (defaults filled in)."""
    return RunConfig.loads(text).dumps()


def data_path(name: str) -> Path:
    return Path(str(resources.files("kleinsail") / "data" / name))


def load_json(name_or_path: str) -> dict:
    p = Path(name_or_path)
    if not p.exists():
        stem = name_or_path if name_or_path.endswith(".json") else name_or_path + ".json"
        p = data_path(stem)
    if not p.exists():
        raise DomainError(f"no such config: {name_or_path}")
    return json.loads(p.read_text())


def load_config(name_or_path: str) -> RunConfig:
    return RunConfig.from_dict(load_json(name_or_path))


def example_config(n: int) -> RunConfig:
    if n not in (1, 2, 3):
        raise DomainError(f"examples are 1, 2 and 3, not {n}")
    return load_config(f"example{n}")


def load_golden(cfg: RunConfig) -> dict:
    if not cfg.golden:
        raise DomainError(f"config {cfg.name} has no golden file")
    return load_json(cfg.golden)
