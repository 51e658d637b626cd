"""Products of cycle-graphs: Z^d, slabs Z^2 x (Z/n)^k, tori.

A :class:`GraphSpec` is a tuple of factor sizes, ``INF`` for a bi-infinite
line and an integer ``n >= 3`` for a cycle of length ``n``. Vertices are
integer tuples with one entry per factor; entries of finite factors live in
``[0, n)``. The origin is the all-zero tuple.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, InvalidVertexError, ResourceLimitError

INF = math.inf

DEFAULT_VERTEX_BUDGET = 500_000

Vertex = tuple


@dataclass(frozen=True)
class GraphSpec:
    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ArgumentError("a graph spec needs at least one factor")
        cleaned = []
        for f in factors:
            if f == INF:
                cleaned.append(INF)
                continue
            if isinstance(f, float) and not f.is_integer():
                raise ArgumentError(f"cycle length must be an integer, got {f!r}")
            f = int(f)
            if f < 3:
                raise ArgumentError(f"cycle length must be >= 3, got {f}")
            cleaned.append(f)
        object.__setattr__(self, "factors", tuple(cleaned))

    @classmethod
    def parse(cls, text: str) -> "GraphSpec":
        """Parse the comma-separated text form, e.g. ``"inf,inf,6"``."""
        parts = [s.strip().lower() for s in str(text).split(",") if s.strip()]
        factors = []
        for s in parts:
            if s in ("inf", "z", "infinity"):
                factors.append(INF)
            else:
                try:
                    factors.append(int(s))
                except ValueError:
                    raise ArgumentError(f"bad factor {s!r} in graph spec {text!r}") from None
        return cls(tuple(factors))

    def __str__(self) -> str:
        return ",".join("inf" if f == INF else str(f) for f in self.factors)

    @property
    def dimension(self) -> int:
        return sum(1 for f in self.factors if f == INF)

    @property
    def degree(self) -> int:
        return 2 * len(self.factors)

    @property
    def arity(self) -> int:
        return len(self.factors)

    @property
    def origin(self) -> Vertex:
        return (0,) * len(self.factors)

    @property
    def moduli(self) -> np.ndarray:
        """Cycle lengths as an int array, 0 marking infinite factors."""
        return np.array([0 if f == INF else f for f in self.factors], dtype=np.int64)

    def vertex(self, coords: Iterable[int]) -> Vertex:
        coords = tuple(coords)
        if len(coords) != len(self.factors):
            raise InvalidVertexError(
                f"vertex {coords} has {len(coords)} coordinates, spec {self} needs {len(self.factors)}"
            )
        out = []
        for c, f in zip(coords, self.factors):
            if int(c) != c:
                raise InvalidVertexError(f"non-integer coordinate in {coords}")
            out.append(int(c) if f == INF else int(c) % f)
        return tuple(out)

    def distance(self, a: Sequence[int], b: Sequence[int]) -> int:
        total = 0
        for x, y, f in zip(a, b, self.factors):
            d = abs(x - y)
            if f != INF:
                d %= f
                d = min(d, f - d)
            total += d
        return total

    def distances(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorised graph distance between coordinate arrays (broadcasting)."""
        diff = np.abs(np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64))
        mod = self.moduli
        if np.any(mod):
            wrapped = np.where(mod > 0, np.mod(diff, np.where(mod > 0, mod, 1)), diff)
            diff = np.where(mod > 0, np.minimum(wrapped, mod - wrapped), diff)
        return diff.sum(axis=-1)

    def axis_point(self, i: int) -> Vertex:
        """The point ``i * e`` on the axis of the first infinite factor."""
        k = self.first_infinite_axis()
        coords = [0] * len(self.factors)
        coords[k] = i
        return tuple(coords)

    def first_infinite_axis(self) -> int:
        for k, f in enumerate(self.factors):
            if f == INF:
                return k
        raise ArgumentError(f"spec {self} has no infinite factor, no bi-infinite geodesic axis")


def as_spec(spec) -> GraphSpec:
    if isinstance(spec, GraphSpec):
        return spec
    if isinstance(spec, str):
        return GraphSpec.parse(spec)
    return GraphSpec(tuple(spec))


def neighbors(spec: GraphSpec, v: Sequence[int]) -> list:
    """The ``degree`` neighbours of ``v``, factor by factor, ``+1`` before ``-1``."""
    v = tuple(v)
    if len(v) != len(spec.factors):
        raise InvalidVertexError(
            f"vertex {v} has {len(v)} coordinates, spec {spec} needs {len(spec.factors)}"
        )
    out = []
    for k, f in enumerate(spec.factors):
        for step in (1, -1):
            c = v[k] + step
            if f != INF:
                c %= f
            out.append(v[:k] + (c,) + v[k + 1 :])
    return out


@dataclass(frozen=True)
class RootedBall:
    """Induced subgraph on ``B_r(o)``; vertex 0 is the root."""

    spec: GraphSpec
    radius: int
    vertices: tuple
    dist: tuple
    edges: tuple
    _adj: tuple = field(default=(), repr=False, compare=False)

    @property
    def root(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def adjacency(self) -> tuple:
        return self._adj

    def sphere(self, r: int) -> list:
        return [v for v, d in zip(self.vertices, self.dist) if d == r]


def ball(spec, r: int, budget: int = DEFAULT_VERTEX_BUDGET) -> RootedBall:
    """Breadth-first ball of radius ``r`` around the origin, with induced edges."""
    spec = as_spec(spec)
    if r < 0:
        raise ArgumentError(f"radius must be >= 0, got {r}")
    origin = spec.origin
    index = {origin: 0}
    verts = [origin]
    dist = [0]
    queue = deque([origin])
    while queue:
        v = queue.popleft()
        dv = dist[index[v]]
        if dv == r:
            continue
        for w in neighbors(spec, v):
            if w not in index:
                if len(verts) >= budget:
                    raise ResourceLimitError(
                        f"ball of radius {r} in {spec} exceeds the vertex budget {budget}"
                    )
                index[w] = len(verts)
                verts.append(w)
                dist.append(dv + 1)
                queue.append(w)
    edges = set()
    adj = [set() for _ in verts]
    for i, v in enumerate(verts):
        for w in neighbors(spec, v):
            j = index.get(w)
            if j is not None and j != i:
                adj[i].add(j)
                edges.add((min(i, j), max(i, j)))
    return RootedBall(
        spec=spec,
        radius=r,
        vertices=tuple(verts),
        dist=tuple(dist),
        edges=tuple(sorted(edges)),
        _adj=tuple(frozenset(s) for s in adj),
    )


def _refine(a: RootedBall, b: RootedBall):
    """Joint colour refinement seeded with (distance label, degree).

    Returns the stable colourings, or ``None`` as soon as the colour
    histograms of the two balls disagree.
    """
    ca = [(d, len(n)) for d, n in zip(a.dist, a.adjacency)]
    cb = [(d, len(n)) for d, n in zip(b.dist, b.adjacency)]
    palette: dict = {}
    ca = [palette.setdefault(c, len(palette)) for c in ca]
    cb = [palette.setdefault(c, len(palette)) for c in cb]
    n_classes = len(palette)
    while True:
        if Counter(ca) != Counter(cb):
            return None
        palette = {}
        sa = [(ca[i], tuple(sorted(ca[j] for j in a.adjacency[i]))) for i in range(len(ca))]
        sb = [(cb[i], tuple(sorted(cb[j] for j in b.adjacency[i]))) for i in range(len(cb))]
        ca = [palette.setdefault(s, len(palette)) for s in sa]
        cb = [palette.setdefault(s, len(palette)) for s in sb]
        if len(palette) == n_classes:
            if Counter(ca) != Counter(cb):
                return None
            return ca, cb
        n_classes = len(palette)


def rooted_ball_isomorphic(a: RootedBall, b: RootedBall, node_budget: int = 5_000_000) -> bool:
    """Is there a root-preserving isomorphism between the two induced balls?

    Backtracking over a breadth-first vertex order of ``a``. Candidates
    must carry the same refined colour (which encodes the distance label and
    degree) and must preserve adjacency to every already-mapped vertex.
    """
    if a.radius != b.radius:
        raise ArgumentError(f"radius mismatch: {a.radius} vs {b.radius}")
    if len(a) != len(b) or len(a.edges) != len(b.edges):
        return False
    colours = _refine(a, b)
    if colours is None:
        return False
    ca, cb = colours
    if ca[0] != cb[0]:
        return False

    order = sorted(range(len(a)), key=lambda i: (a.dist[i], i))
    # parent in the BFS tree: any neighbour one level closer, already placed
    pos = {v: k for k, v in enumerate(order)}
    parent = [-1] * len(a)
    for v in order[1:]:
        parent[v] = min((w for w in a.adjacency[v] if pos[w] < pos[v]), key=lambda w: pos[w])

    fwd = [-1] * len(a)
    used = [False] * len(b)
    n = len(order)

    def candidates(k):
        u = order[k]
        if k == 0:
            pool = [0]
        else:
            pool = b.adjacency[fwd[parent[u]]]
        mapped_nb = [w for w in a.adjacency[u] if fwd[w] >= 0]
        out = []
        for c in pool:
            if used[c] or cb[c] != ca[u]:
                continue
            nb_c = b.adjacency[c]
            if any(fwd[w] not in nb_c for w in mapped_nb):
                continue
            if sum(1 for x in nb_c if used[x]) != len(mapped_nb):
                continue
            out.append(c)
        return out

    stack = [iter(candidates(0))]
    nodes = 0
    while stack:
        k = len(stack) - 1
        u = order[k]
        if fwd[u] >= 0:
            used[fwd[u]] = False
            fwd[u] = -1
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            continue
        nodes += 1
        if nodes > node_budget:
            raise ResourceLimitError(f"isomorphism search exceeded {node_budget} nodes")
        fwd[u] = nxt
        used[nxt] = True
        if k + 1 == n:
            return True
        stack.append(iter(candidates(k + 1)))
    return False


class AtLeast(int):
    """Marker for a locality radius that reached the cap: ``R >= value``."""

    capped = True

    def __repr__(self) -> str:
        return f"AtLeast({int(self)})"

    def __str__(self) -> str:
        return f">={int(self)}"


def locality_radius(a, b, r_max: int, budget: int = DEFAULT_VERTEX_BUDGET) -> int:
    """Largest ``r <= r_max`` with isomorphic rooted balls, or ``AtLeast(r_max)``."""
    a, b = as_spec(a), as_spec(b)
    if r_max < 0:
        raise ArgumentError("r_max must be >= 0")
    for r in range(1, r_max + 1):
        try:
            ba, bb = ball(a, r, budget), ball(b, r, budget)
        except ResourceLimitError as exc:
            raise ResourceLimitError(f"locality radius: budget exhausted at radius {r}: {exc}") from exc
        if not rooted_ball_isomorphic(ba, bb):
            return r - 1
    return AtLeast(r_max)
