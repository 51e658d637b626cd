"""Counter-based uniforms keyed by (seed, sample, edge).

Every edge of the ambient graph gets a 64-bit key computed from its
canonical endpoint coordinates and direction. The uniform attached to an
edge in sample ``i`` under seed ``s`` is a pure hash of ``(s, i, key)``, so
nested windows and different retention parameters see exactly the same
randomness. That is what makes ``open(p) <= open(p')`` hold pathwise.

The mixer is the SplitMix64 finaliser.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finaliser on a uint64 array (wrapping arithmetic)."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def edge_keys(coords: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Keys for edges given by their canonical start vertex and axis index."""
    coords = np.ascontiguousarray(coords, dtype=np.int64)
    h = mix64(np.asarray(directions, dtype=np.int64).view(np.uint64) + np.uint64(0x5851F42D4C957F2D))
    for k in range(coords.shape[1]):
        h = mix64(h ^ coords[:, k].view(np.uint64))
    return h


def stream_key(seed: int, sample: int) -> np.uint64:
    s = mix64(np.array([int(seed) & _MASK64], dtype=np.uint64))
    s = mix64(s ^ np.array([int(sample) & _MASK64], dtype=np.uint64))
    return s[0]


def uniforms(keys: np.ndarray, seed: int, sample: int = 0) -> np.ndarray:
    """Uniforms in [0, 1) for the given edge keys in one sample."""
    h = mix64(np.asarray(keys, dtype=np.uint64) ^ stream_key(seed, sample))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
