"""Klein sails of hyperbolic operators on Z^4: certified faces, unit-group
quotients and integer-affine invariants."""

from __future__ import annotations

__version__ = "0.1.0"
