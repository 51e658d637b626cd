"""Finite windows ``B_R(o)`` used as stand-ins for the infinite graph.

Reaching the window boundary ``S_R(o)`` plays the role of reaching infinity.
Windows are cached per ``(spec, radius)`` and are read-only once built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import rng
from .errors import ArgumentError, InvalidVertexError, ResourceLimitError
from .graphs import INF, DEFAULT_VERTEX_BUDGET, GraphSpec, as_spec, ball


@dataclass(eq=False)
class Window:
    spec: GraphSpec
    radius: int
    coords: np.ndarray  # (V, k) int64
    dist: np.ndarray  # (V,) distance to the origin
    edges: np.ndarray  # (E, 2) vertex indices, edges[:, 1] = edges[:, 0] + e_axis
    edge_axis: np.ndarray  # (E,)
    edge_keys: np.ndarray  # (E,) uint64 keys for the counter-based RNG
    index: dict = field(repr=False)
    indptr: np.ndarray = field(repr=False)  # CSR adjacency
    nbr: np.ndarray = field(repr=False)
    nbr_edge: np.ndarray = field(repr=False)
    _lookup: np.ndarray = field(repr=False)
    _offset: np.ndarray = field(repr=False)
    _edge_lookup: np.ndarray = field(repr=False)
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def boundary(self) -> np.ndarray:
        return self.dist == self.radius

    @property
    def origin(self) -> int:
        return 0

    def vertex_index(self, v) -> int:
        v = self.spec.vertex(v)
        try:
            return self.index[v]
        except KeyError:
            raise InvalidVertexError(f"vertex {v} is outside the window of radius {self.radius}") from None

    def vertex(self, i: int) -> tuple:
        return tuple(int(c) for c in self.coords[i])

    def distances_from(self, i: int) -> np.ndarray:
        return self.spec.distances(self.coords, self.coords[i])

    def distance(self, i: int, j: int) -> int:
        return int(self.spec.distances(self.coords[i], self.coords[j]))

    def ball_indices(self, center: int, r: int) -> np.ndarray:
        return np.flatnonzero(self.distances_from(center) <= r)

    def neighbors_of(self, i: int) -> np.ndarray:
        return self.nbr[self.indptr[i] : self.indptr[i + 1]]

    def lookup(self, coords: np.ndarray) -> np.ndarray:
        """Vectorised coordinate -> vertex index, -1 outside the window."""
        coords = np.asarray(coords, dtype=np.int64)
        mod = self.spec.moduli
        c = np.where(mod > 0, np.mod(coords, np.where(mod > 0, mod, 1)), coords) + self._offset
        shape = np.array(self._lookup.shape)
        ok = np.all((c >= 0) & (c < shape), axis=-1)
        c = np.where(ok[..., None], c, 0)
        out = self._lookup[tuple(np.moveaxis(c, -1, 0))]
        return np.where(ok, out, -1)

    def edge_lookup(self, start: np.ndarray, axis: np.ndarray) -> np.ndarray:
        """Edge index for (canonical start vertex coordinates, axis), -1 if absent."""
        vi = self.lookup(start)
        out = self._edge_lookup[np.where(vi >= 0, vi, 0), np.asarray(axis)]
        return np.where(vi >= 0, out, -1)

    def edge_index(self, a, b) -> int:
        i, j = self.vertex_index(a), self.vertex_index(b)
        for pos in range(self.indptr[i], self.indptr[i + 1]):
            if self.nbr[pos] == j:
                return int(self.nbr_edge[pos])
        raise InvalidVertexError(f"{a} and {b} are not adjacent inside the window")

    def induced_edges(self, mask: np.ndarray) -> np.ndarray:
        """Boolean edge mask: both endpoints inside the vertex mask."""
        return mask[self.edges[:, 0]] & mask[self.edges[:, 1]]


def _centred(spec: GraphSpec, coords: np.ndarray) -> np.ndarray:
    """Lift cycle coordinates to ``[-f//2, (f-1)//2]`` before hashing.

    With this lift a slab and the lattice it approximates assign the same
    uniform to corresponding edges near the origin, so sweeps over specs use
    common random numbers on their shared ball.
    """
    mod = spec.moduli
    lifted = coords.copy()
    for k, f in enumerate(mod):
        if f:
            lifted[:, k] = np.where(coords[:, k] >= (f + 1) // 2, coords[:, k] - f, coords[:, k])
    return lifted


@lru_cache(maxsize=64)
def _cached_window(spec: GraphSpec, radius: int, budget: int) -> Window:
    b = ball(spec, radius, budget)
    coords = np.array(b.vertices, dtype=np.int64).reshape(len(b.vertices), spec.arity)
    dist = np.array(b.dist, dtype=np.int64)
    index = {v: i for i, v in enumerate(b.vertices)}

    lo = np.array([-radius if f == INF else 0 for f in spec.factors], dtype=np.int64)
    hi = np.array([radius if f == INF else f - 1 for f in spec.factors], dtype=np.int64)
    lookup = -np.ones(tuple(hi - lo + 1), dtype=np.int64)
    lookup[tuple((coords - lo).T)] = np.arange(len(coords))

    starts, ends, axes = [], [], []
    for k, f in enumerate(spec.factors):
        nxt = coords.copy()
        nxt[:, k] += 1
        if f != INF:
            nxt[:, k] %= f
        shifted = nxt - lo
        ok = np.all((shifted >= 0) & (shifted <= hi - lo), axis=1)
        j = -np.ones(len(coords), dtype=np.int64)
        j[ok] = lookup[tuple(shifted[ok].T)]
        present = np.flatnonzero(j >= 0)
        starts.append(present)
        ends.append(j[present])
        axes.append(np.full(len(present), k, dtype=np.int64))
    s = np.concatenate(starts)
    e = np.concatenate(ends)
    ax = np.concatenate(axes)
    order = np.lexsort((ax, s))
    edges = np.stack([s[order], e[order]], axis=1)
    ax = ax[order]
    keys = rng.edge_keys(_centred(spec, coords[edges[:, 0]]), ax)

    edge_lookup = -np.ones((len(coords), spec.arity), dtype=np.int64)
    edge_lookup[edges[:, 0], ax] = np.arange(len(edges))

    n = len(coords)
    both = np.concatenate([edges[:, 0], edges[:, 1]])
    other = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(len(edges)), np.arange(len(edges))])
    order = np.lexsort((other, both))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, both + 1, 1)
    indptr = np.cumsum(indptr)

    return Window(
        spec=spec,
        radius=radius,
        coords=coords,
        dist=dist,
        edges=edges,
        edge_axis=ax,
        edge_keys=keys,
        index=index,
        indptr=indptr,
        nbr=other[order],
        nbr_edge=eid[order],
        _lookup=lookup,
        _offset=-lo,
        _edge_lookup=edge_lookup,
    )


def make_window(spec, radius: int, budget: int = DEFAULT_VERTEX_BUDGET) -> Window:
    spec = as_spec(spec)
    if radius < 0:
        raise ArgumentError("window radius must be >= 0")
    try:
        return _cached_window(spec, int(radius), int(budget))
    except ResourceLimitError as exc:
        raise ResourceLimitError(f"window of radius {radius} in {spec}: {exc}") from exc
