"""Exception hierarchy shared by every module."""

from __future__ import annotations


class PercolataError(Exception):
    """Base class for all errors raised by this package."""


class InvalidVertexError(PercolataError, ValueError):
    """A vertex does not belong to the graph (wrong arity, bad coordinate)."""


class ArgumentError(PercolataError, ValueError):
    """Arguments are inconsistent with the operation's preconditions."""


class ResourceLimitError(PercolataError):
    """A configured budget (vertices, edges, search nodes) was exceeded."""


class PartialResultError(PercolataError):
    """An enumeration ran out of budget; ``partial`` holds what was finished."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class CensoredError(PercolataError):
    """The answer depends on edges outside the window (not decidable here)."""


class InconclusiveError(PercolataError):
    """Every observation was censored, no statistic can be reported."""


class InvariantError(PercolataError):
    """A hard combinatorial invariant failed. This is a bug, never noise."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
