"""Exception taxonomy shared across the package.

Numerical routines raise these instead of returning sentinel values so that
callers (and the CLI exit-code mapping) can tell configuration mistakes apart
from genuine numerical failures.
"""
from __future__ import annotations


class SourcewaveError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SourcewaveError):
    """Invalid run configuration (unknown keys, bad ranges, malformed data)."""


class OutOfRange(SourcewaveError):
    """An argument lies outside the domain an operation is defined on."""


class NonConvergence(SourcewaveError):
    """An iterative or adaptive scheme failed to reach its tolerance."""


class InvalidSign(SourcewaveError):
    """A quantity that must be positive came out nonpositive."""


class DivisionUnstable(SourcewaveError):
    """A quotient could not be normalized to a trustworthy value."""


class InfeasiblePoint(SourcewaveError):
    """A candidate point violates a hard constraint of a variational branch."""


class AmbiguousMinimizer(SourcewaveError):
    """Two branches tie but propose materially different velocities.

    Carries both candidate values so callers can report them.
    """

    def __init__(self, message: str, candidates: tuple[float, ...] = ()):
        super().__init__(message)
        self.candidates = candidates


class NotAShock(SourcewaveError):
    """The solution is continuous at the queried interface."""
