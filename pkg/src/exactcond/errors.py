"""Exception types shared across the package."""

from __future__ import annotations


class ExactcondError(Exception):
    """Base class for all errors raised by this package."""


class UnboundedDensity(ExactcondError):
    """The density has no finite supremum, so bounded rejection is impossible."""


class InvalidRejection(ExactcondError):
    """An acceptance ratio exceeded 1, i.e. the supplied bound was not an upper bound."""


class SingularSystem(ExactcondError):
    """The two-constraint completion matrix is singular; no unique completion exists."""


class NonTerminating(ExactcondError):
    """A rejection loop exhausted its attempt budget without accepting."""

    def __init__(self, message: str, attempts: int, rng_calls: int):
        super().__init__(message)
        self.attempts = attempts
        self.rng_calls = rng_calls


class SupportTooLarge(ExactcondError):
    """Brute-force enumeration would exceed the configured outcome cap."""


class InfeasibleTarget(ExactcondError):
    """The conditioning event has probability zero: no outcome hits the target."""


class InvalidFamily(ExactcondError):
    """A combinatorial family descriptor is malformed (bad size, weights, or profile)."""


class InvalidProfile(ExactcondError):
    """A multiplicity vector does not describe a structure of the requested size."""
