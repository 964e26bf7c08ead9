"""Exception hierarchy shared by all modules.

Each top-level class corresponds to one CLI exit-code category (see
``kleinsail.cli.EXIT_CODES``).
"""

from __future__ import annotations


class KleinSailError(Exception):
    """Base class for every error raised by this package."""


class DomainError(KleinSailError, ValueError):
    """An argument lies outside the domain of an operation."""


class RootOnEndpointError(DomainError):
    """A Sturm count was requested on an interval whose endpoint is a root."""


class ContractError(KleinSailError, ValueError):
    """A caller violated a documented precondition."""


class DegeneracyError(KleinSailError, ValueError):
    """Input points or faces do not have the required affine dimension."""


class BudgetError(KleinSailError, RuntimeError):
    """An interval refinement budget ran out before a result was certified."""


class ResourceError(KleinSailError, RuntimeError):
    """A search hit its configured cap without producing a result."""


class ClassificationError(KleinSailError):
    """An operator is not unimodular, hyperbolic and irreducible."""


class InvariantViolation(KleinSailError, AssertionError):
    """An internal invariant failed; always a bug or a bad input operator."""


class VerificationError(KleinSailError):
    """A claimed property (generator, symmetry, golden data) does not hold."""

    def __init__(self, message: str, offending=None):
        super().__init__(message)
        self.offending = offending


class WordSyntaxError(KleinSailError, ValueError):
    """A generator word does not follow the expression grammar."""
