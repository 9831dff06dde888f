"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class BurstmapError(Exception):
    """Base class for domain errors (mapped to exit status 1 by the CLI)."""


class FlightError(BurstmapError):
    """A flight could not be completed to the requested tolerance.

    ``partial`` carries whatever state the integrator reached.
    """

    def __init__(self, message: str, status: int, partial: dict | None = None):
        super().__init__(message)
        self.status = status
        self.partial = partial or {}


class PreconditionError(BurstmapError):
    """An operation was called outside its domain."""


class BracketError(BurstmapError):
    """A root bracket shows no sign change."""


class AmbiguousItinerary(BurstmapError):
    """An orbit point sits too close to the critical point to be labelled."""

    def __init__(self, index: int, value: float, w_star: float):
        super().__init__(
            f"orbit point {index} (w={value!r}) is within tolerance of w*={w_star!r}"
        )
        self.index = index
        self.value = value


class ConfigError(BurstmapError):
    """Invalid run configuration."""
