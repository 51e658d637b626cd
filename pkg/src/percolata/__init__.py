"""Bernoulli bond percolation on products of cycles: sampling, cutsets, interfaces and exact oracles."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ArgumentError,
    CensoredError,
    InconclusiveError,
    InvalidVertexError,
    InvariantError,
    PartialResultError,
    PercolataError,
    ResourceLimitError,
)
from .graphs import GraphSpec, ball, locality_radius, rooted_ball_isomorphic
from .window import Window, make_window

__all__ = [
    "__version__",
    "ArgumentError",
    "CensoredError",
    "GraphSpec",
    "InconclusiveError",
    "InvalidVertexError",
    "InvariantError",
    "PartialResultError",
    "PercolataError",
    "ResourceLimitError",
    "Window",
    "ball",
    "locality_radius",
    "make_window",
    "rooted_ball_isomorphic",
]
