"""Minimal vertex and bond cutsets, coarse connectivity and exposed boundaries.

Graphs are small explicit adjacency structures. A window becomes a
:class:`CutGraph` with one extra sink vertex joined to every vertex of the
window boundary, so "separate ``u`` from infinity" means "separate ``u``
from the sink". Cutsets touching the window boundary are flagged as
censored: they are artefacts of truncation.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import ArgumentError, InconclusiveError, PartialResultError
from .graphs import GraphSpec, as_spec
from .window import Window

SINK = "inf"
DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(eq=False)
class CutGraph:
    """Undirected graph with a metric for k-connectivity certificates.

    ``dist[i, j]`` is the ambient distance used by the E_k relation (the
    sink, if any, is never part of a certified set). ``censor[i]`` marks
    vertices whose presence in a cutset makes it a truncation artefact.
    """

    names: list
    adj: list
    dist: np.ndarray
    censor: np.ndarray
    sink: int | None = None
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {n: i for i, n in enumerate(self.names)}

    @property
    def n(self) -> int:
        return len(self.names)

    def vertex(self, name) -> int:
        if isinstance(name, str) and name == SINK:
            if self.sink is None:
                raise ArgumentError("this graph has no sink vertex")
            return self.sink
        key = tuple(name) if isinstance(name, (list, tuple)) else name
        try:
            return self.index[key]
        except KeyError:
            raise ArgumentError(f"vertex {name!r} is not in the graph") from None

    def edge_pairs(self) -> list:
        return [(i, j) for i in range(self.n) for j in self.adj[i] if i < j]

    @classmethod
    def from_edges(cls, edges: Iterable[tuple]) -> "CutGraph":
        """Generic graph; the metric is the graph distance itself."""
        names: list = []
        index: dict = {}
        pairs = []
        for a, b in edges:
            for x in (a, b):
                if x not in index:
                    index[x] = len(names)
                    names.append(x)
            pairs.append((index[a], index[b]))
        adj = [set() for _ in names]
        for i, j in pairs:
            if i != j:
                adj[i].add(j)
                adj[j].add(i)
        n = len(names)
        rows = [i for i in range(n) for _ in adj[i]]
        cols = [j for i in range(n) for j in adj[i]]
        mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        dist = shortest_path(mat, unweighted=True, directed=False)
        return cls(names, [sorted(a) for a in adj], dist, np.zeros(n, dtype=bool), None, index)

    @classmethod
    def from_window(cls, window: Window, sink: bool = True) -> "CutGraph":
        key = ("cutgraph", sink)
        if key in window.cache:
            return window.cache[key]
        n = window.n_vertices
        names = [window.vertex(i) for i in range(n)]
        adj = [list(map(int, window.neighbors_of(i))) for i in range(n)]
        coords = window.coords
        dist = window.spec.distances(coords[:, None, :], coords[None, :, :]).astype(float)
        censor = window.boundary.copy()
        s = None
        if sink:
            s = n
            bnd = np.flatnonzero(window.boundary).tolist()
            for b in bnd:
                adj[b].append(s)
            adj.append(bnd)
            names.append(SINK)
            big = np.full((n + 1, n + 1), np.inf)
            big[:n, :n] = dist
            big[n, n] = 0
            dist = big
            censor = np.append(censor, True)
        g = cls(names, [sorted(a) for a in adj], dist, censor, s)
        window.cache[key] = g
        return g


def as_cutgraph(g) -> CutGraph:
    if isinstance(g, CutGraph):
        return g
    if isinstance(g, Window):
        return CutGraph.from_window(g)
    return CutGraph.from_edges(g)


@dataclass
class Cutset:
    kind: str  # "vertex" or "bond"
    members: tuple  # sorted vertex names, or sorted (name, name) edges
    source: object
    target: object
    is_cutset: bool
    is_minimal: bool
    k_certificate: int
    censored: bool = False

    def as_record(self) -> dict:
        return {
            "kind": self.kind,
            "members": [list(m) if isinstance(m, tuple) else m for m in self.members],
            "source": self.source,
            "target": self.target,
            "is_cutset": self.is_cutset,
            "is_minimal": self.is_minimal,
            "k_certificate": self.k_certificate,
            "censored": self.censored,
        }


def _sort_key(x):
    return (0, x) if isinstance(x, tuple) else (1, str(x))


def _reachable(g: CutGraph, u: int, t: int, removed_v=frozenset(), removed_e=frozenset()) -> bool:
    if u in removed_v or t in removed_v:
        return False
    seen = {u}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        if x == t:
            return True
        for y in g.adj[x]:
            if y in seen or y in removed_v:
                continue
            if removed_e and (min(x, y), max(x, y)) in removed_e:
                continue
            seen.add(y)
            queue.append(y)
    return False


def bottleneck(dmat: np.ndarray) -> int:
    """Least k making the points k-connected: the largest edge of a minimum spanning tree."""
    n = len(dmat)
    if n <= 1:
        return 1
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dmat[0].astype(float).copy()
    worst = 0.0
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        worst = max(worst, cand[j])
        in_tree[j] = True
        best = np.minimum(best, dmat[j])
    return max(1, int(worst))


def _vertex_certificate(g: CutGraph, members: Sequence[int]) -> int:
    idx = np.asarray(members, dtype=np.int64)
    return bottleneck(g.dist[np.ix_(idx, idx)])


def _edge_certificate(g: CutGraph, edges: Sequence[tuple]) -> int:
    """Edges are k-adjacent when some endpoints lie within distance k."""
    m = len(edges)
    if m <= 1:
        return 1
    a = np.array([e[0] for e in edges])
    b = np.array([e[1] for e in edges])
    d = np.minimum.reduce(
        [g.dist[np.ix_(a, a)], g.dist[np.ix_(a, b)], g.dist[np.ix_(b, a)], g.dist[np.ix_(b, b)]]
    )
    d = np.maximum(d, 1.0)
    return bottleneck(d)


def _edge_key(g: CutGraph, e) -> tuple:
    a, b = g.vertex(e[0]), g.vertex(e[1])
    if b not in g.adj[a]:
        raise ArgumentError(f"{e[0]} and {e[1]} are not adjacent")
    return (min(a, b), max(a, b))


def _status(g: CutGraph, members, kind: str, u: int, t: int) -> Cutset:
    if kind == "vertex":
        ms = frozenset(members)
        if u in ms or t in ms:
            raise ArgumentError("source and target must not belong to a vertex cutset")
        is_cut = not _reachable(g, u, t, removed_v=ms)
        minimal = is_cut and all(_reachable(g, u, t, removed_v=ms - {x}) for x in ms)
        real = sorted(x for x in ms if x != g.sink)
        cert = _vertex_certificate(g, real) if real else 1
        censored = bool(any(g.censor[x] for x in ms))
        names = tuple(sorted((g.names[x] for x in ms), key=_sort_key))
    elif kind == "bond":
        ms = frozenset(members)
        is_cut = not _reachable(g, u, t, removed_e=ms)
        minimal = is_cut and all(_reachable(g, u, t, removed_e=ms - {e}) for e in ms)
        real = [e for e in ms if g.sink not in e]
        cert = _edge_certificate(g, sorted(real)) if real else 1
        censored = bool(any(g.censor[a] or g.censor[b] for a, b in ms))
        names = tuple(sorted(((g.names[a], g.names[b]) for a, b in ms), key=lambda e: (_sort_key(e[0]), _sort_key(e[1]))))
    else:
        raise ArgumentError(f"kind must be 'vertex' or 'bond', got {kind!r}")
    return Cutset(kind, names, g.names[u], g.names[t], is_cut, minimal, cert, censored)


def cutset_status(graph, members, kind: str, u, t) -> Cutset:
    """Separation, inclusion-minimality and k-connectivity certificate of a set."""
    g = as_cutgraph(graph)
    ui, ti = g.vertex(u), g.vertex(t)
    if kind == "vertex":
        ids = [g.vertex(m) for m in members]
    else:
        ids = [_edge_key(g, e) for e in members]
    return _status(g, ids, kind, ui, ti)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def _augment(res: dict, sources: list, target, limit: int) -> int:
    """Unit augmenting paths in a residual dict-of-dicts, at most ``limit``."""
    total = 0
    while total < limit:
        parent = {s: None for s in sources}
        queue = deque(sources)
        while queue and target not in parent:
            a = queue.popleft()
            for b, c in res[a].items():
                if c > 0 and b not in parent:
                    parent[b] = a
                    queue.append(b)
        if target not in parent:
            break
        b = target
        while parent[b] is not None:
            a = parent[b]
            res[a][b] -= 1
            res[b][a] = res[b].get(a, 0) + 1
            b = a
        total += 1
    return total


def _close(res: dict) -> dict:
    for v in list(res):
        for w in list(res[v]):
            res.setdefault(w, {}).setdefault(v, 0)
    return res


def _flow_vertex(g: CutGraph, D: frozenset, targets: set, blocked: frozenset, limit: int,
                 other: int | None = None) -> int:
    """Vertex-disjoint paths from the contracted set ``D`` to ``targets`` avoiding ``blocked``.

    Every vertex except those of ``D`` and ``other`` (which can never join a
    separator) carries unit capacity, split into an in-node and an out-node.
    Capped at ``limit``.
    """
    big = limit + 1
    res: dict = {}
    for v in range(g.n):
        if v in blocked:
            continue
        res.setdefault(("i", v), {})[("o", v)] = big if (v in D or v == other) else 1
        out = res.setdefault(("o", v), {})
        for w in g.adj[v]:
            if w in blocked or (v in D and w in D):
                continue
            out[("i", w)] = big
        if v in targets:
            out["T"] = big
    res.setdefault("T", {})
    return _augment(_close(res), [("o", s) for s in D], "T", limit)


def _flow_edge(g: CutGraph, D: frozenset, targets: set, cut: set, limit: int) -> int:
    """Edge-disjoint paths from the contracted set ``D`` to ``targets`` avoiding ``cut``."""
    big = limit + 1
    res: dict = {}
    for v in range(g.n):
        out = res.setdefault(v, {})
        for w in g.adj[v]:
            if (v in D and w in D) or (min(v, w), max(v, w)) in cut:
                continue
            out[w] = 1
        if v in targets:
            out["T"] = big
    res.setdefault("T", {})
    return _augment(_close(res), list(D), "T", limit)


def _component(g: CutGraph, start: int, removed) -> set:
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in g.adj[x]:
            if y not in seen and y not in removed:
                seen.add(y)
                queue.append(y)
    return seen


def _grow_vertex(g: CutGraph, root: int, other: int, k: int, budget: list, forbid: frozenset, found: dict):
    """Minimal ``root``-``other`` separators ``N(D)`` with ``D`` grown from ``root`` inside the
    complement of ``forbid``.

    Every neighbour of the current ``D`` ends up either inside ``D`` or in
    the separator; both branches are explored. A branch dies when the
    committed separator ``F`` plus a max-flow lower bound for separating the
    rest of ``D`` from the targets exceeds ``k``.
    """
    targets = {other} | (set(forbid) - {root})
    stack = [(frozenset([root]), frozenset())]
    while stack:
        D, F = stack.pop()
        budget[0] -= 1
        if budget[0] < 0:
            raise PartialResultError(
                "cutset enumeration exceeded its search budget", partial=list(found.values())
            )
        nd = {y for x in D for y in g.adj[x] if y not in D}
        if other in nd or len(F) > k:
            continue
        free = nd - F
        if not free:
            S = frozenset(nd)
            if S and S not in found:
                side = _component(g, other, S)
                if all(any(y in side for y in g.adj[s]) for s in S):
                    found[S] = S
            continue
        if len(F) + _flow_vertex(g, D, targets - F, F, k - len(F) + 1, other) > k:
            continue
        v = min(free)
        stack.append((D, F | {v}))
        if v not in forbid:
            stack.append((D | {v}, F))


def _grow_bond(g: CutGraph, root: int, other: int, k: int, budget: list, forbid: frozenset, found: dict):
    """Minimal bond cutsets ``\\partial_E D``: ``D`` connected around ``root``, complement connected."""
    targets = {other} | (set(forbid) - {root})
    everything = set(range(g.n))
    stack = [(frozenset([root]), frozenset())]
    while stack:
        D, F = stack.pop()
        budget[0] -= 1
        if budget[0] < 0:
            raise PartialResultError(
                "bond-cutset enumeration exceeded its search budget", partial=list(found.values())
            )
        cut = {(min(x, y), max(x, y)) for x in D for y in g.adj[x] if y in F}
        if len(cut) > k:
            continue
        nd = {y for x in D for y in g.adj[x] if y not in D}
        free = nd - F
        if not free:
            E = frozenset(cut)
            if E not in found and len(_component(g, other, D)) == len(everything - D):
                found[E] = E
            continue
        if len(cut) + _flow_edge(g, D, targets - F, cut, k - len(cut) + 1) > k:
            continue
        v = min(free)
        if v != other and v not in forbid:
            stack.append((D | {v}, F))
        stack.append((D, F | {v}))


def enumerate_minimal_cutsets(graph, u, t, max_size: int, kind: str = "vertex",
                              budget: int = DEFAULT_NODE_BUDGET, prune_censored: bool = False) -> list:
    """All inclusion-minimal ``u``-``t`` cutsets with at most ``max_size`` members.

    Exhaustive by default. With ``prune_censored`` the search only explores
    sides that avoid censored vertices (window boundary, sink), growing from
    both ``u`` and ``t``: this returns exactly the minimal cutsets having a
    side free of censored vertices, which are the ones that stand for finite
    cutsets of the infinite graph. Cutsets whose every side meets the window
    boundary are not produced in that mode.
    """
    g = as_cutgraph(graph)
    ui, ti = g.vertex(u), g.vertex(t)
    if ui == ti:
        raise ArgumentError("source and target coincide")
    if max_size < 0:
        raise ArgumentError("max_size must be >= 0")
    if kind not in ("vertex", "bond"):
        raise ArgumentError(f"kind must be 'vertex' or 'bond', got {kind!r}")
    grow = _grow_vertex if kind == "vertex" else _grow_bond
    found: dict = {}
    left = [budget]
    if prune_censored:
        forbid = frozenset(np.flatnonzero(g.censor).tolist())
        for root, other in ((ui, ti), (ti, ui)):
            if root not in forbid:
                grow(g, root, other, max_size, left, forbid, found)
    else:
        grow(g, ui, ti, max_size, left, frozenset(), found)
    out = [_status(g, S, kind, ui, ti) for S in found.values()]
    out.sort(key=lambda c: (len(c.members), str(c.members)))
    return out


def brute_force_minimal_cutsets(graph, u, t, max_size: int, kind: str = "vertex") -> list:
    """Reference oracle: test every subset of at most ``max_size`` vertices or edges.

    Exponential; meant for graphs with a handful of vertices.
    """
    g = as_cutgraph(graph)
    ui, ti = g.vertex(u), g.vertex(t)
    if ui == ti:
        raise ArgumentError("source and target coincide")
    if kind == "vertex":
        pool = [x for x in range(g.n) if x not in (ui, ti)]
        nbr = [sum(1 << y for y in g.adj[x]) for x in range(g.n)]

        def separated(removed: int) -> bool:
            seen = 1 << ui
            frontier = seen
            while frontier:
                nxt = 0
                f = frontier
                while f:
                    low = f & -f
                    nxt |= nbr[low.bit_length() - 1]
                    f ^= low
                nxt &= ~seen & ~removed
                seen |= nxt
                frontier = nxt
            return not (seen >> ti) & 1

        bit = {x: 1 << x for x in pool}
    elif kind == "bond":
        pool = g.edge_pairs()
        incident = [[] for _ in range(g.n)]
        for k, (a, b) in enumerate(pool):
            incident[a].append((b, k))
            incident[b].append((a, k))

        def separated(removed: int) -> bool:
            seen = {ui}
            stack = [ui]
            while stack:
                x = stack.pop()
                for y, k in incident[x]:
                    if y not in seen and not (removed >> k) & 1:
                        if y == ti:
                            return False
                        seen.add(y)
                        stack.append(y)
            return True

        bit = {e: 1 << k for k, e in enumerate(pool)}
    else:
        raise ArgumentError(f"kind must be 'vertex' or 'bond', got {kind!r}")
    out = []
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(pool, size):
            mask = sum(bit[x] for x in combo)
            if not separated(mask):
                continue
            if all(not separated(mask ^ bit[x]) for x in combo):
                out.append(_status(g, combo, kind, ui, ti))
    out.sort(key=lambda c: (len(c.members), str(c.members)))
    return out


@dataclass
class CutConnectivity:
    kind: str
    value: int  # empirical C* (or C*_E): max certificate over uncensored cutsets
    n_cutsets: int
    n_censored: int
    per_pair: list

    def as_record(self) -> dict:
        return {
            "kind": self.kind,
            "empirical_C_star" if self.kind == "vertex" else "empirical_C_star_E": self.value,
            "n_cutsets": self.n_cutsets,
            "n_censored": self.n_censored,
            "per_pair": self.per_pair,
        }


def cut_connectivity(graph, pairs: Sequence[tuple], max_size: int, kind: str = "vertex",
                     budget: int = DEFAULT_NODE_BUDGET) -> CutConnectivity:
    """Empirical C* (``kind="vertex"``) or C*_E (``kind="bond"``); a lower bound on the true constant."""
    g = as_cutgraph(graph)
    best = 0
    total = 0
    cens = 0
    per_pair = []
    for u, t in pairs:
        cs = enumerate_minimal_cutsets(g, u, t, max_size, kind, budget, prune_censored=True)
        good = [c for c in cs if not c.censored]
        cens += len(cs) - len(good)
        total += len(good)
        kmax = max((c.k_certificate for c in good), default=0)
        per_pair.append({"u": u, "t": t, "n_cutsets": len(good), "n_censored": len(cs) - len(good), "max_k": kmax})
        best = max(best, kmax)
    if total == 0:
        raise InconclusiveError(f"every enumerated {kind} cutset was censored or none exist up to size {max_size}")
    return CutConnectivity(kind, best, total, cens, per_pair)


# ---------------------------------------------------------------------------
# boundaries and t-components
# ---------------------------------------------------------------------------


@dataclass
class BoundaryReport:
    members: list
    exposed: list  # vertices of A adjacent to the outside component of the complement
    edge_boundary: list  # edges with exactly one endpoint in A
    exterior: list  # vertices outside A, in the outside component, adjacent to A
    ratio: float  # |exposed| / |A|^((d-1)/d)


def outside_mask(window: Window, A: np.ndarray) -> np.ndarray:
    """Vertices of the complement of ``A`` whose component meets the window boundary."""
    from . import _kernels

    free = ~A
    keep = free[window.edges[:, 0]] & free[window.edges[:, 1]]
    lab = _kernels.uf_labels(window.n_vertices, window.edges[:, 0], window.edges[:, 1], keep)
    roots = np.unique(lab[window.boundary & free])
    return free & np.isin(lab, roots)


def exposed_boundary_mask(window: Window, A: np.ndarray) -> np.ndarray:
    """Vertices of ``A`` adjacent to the outside component; boundary vertices of ``A`` count as exposed."""
    out = outside_mask(window, A)
    e0, e1 = window.edges[:, 0], window.edges[:, 1]
    hit = np.zeros(window.n_vertices, dtype=bool)
    hit[e0[out[e1]]] = True
    hit[e1[out[e0]]] = True
    return A & (hit | window.boundary)


def boundaries(window: Window, A: Iterable) -> BoundaryReport:
    mask = np.zeros(window.n_vertices, dtype=bool)
    for v in A:
        mask[window.vertex_index(v)] = True
    if not mask.any():
        raise ArgumentError("the set A is empty")
    if np.any(mask & window.boundary):
        raise ArgumentError("A touches the window boundary; its exposed boundary is not determined")
    exp = exposed_boundary_mask(window, mask)
    out = outside_mask(window, mask)
    e0, e1 = window.edges[:, 0], window.edges[:, 1]
    cross = mask[e0] != mask[e1]
    ext = np.zeros(window.n_vertices, dtype=bool)
    ext[e0[cross & out[e0]]] = True
    ext[e1[cross & out[e1]]] = True
    d = window.spec.dimension
    size = int(mask.sum())
    ratio = int(exp.sum()) / size ** ((d - 1) / d) if d >= 1 else float(exp.sum())
    return BoundaryReport(
        members=[window.vertex(i) for i in np.flatnonzero(mask)],
        exposed=[window.vertex(i) for i in np.flatnonzero(exp)],
        edge_boundary=[(window.vertex(a), window.vertex(b)) for a, b in window.edges[cross]],
        exterior=[window.vertex(i) for i in np.flatnonzero(ext)],
        ratio=float(ratio),
    )


def t_components(spec, S: Iterable, t: int) -> list:
    """Partition of ``S`` into classes of the relation ``d <= t`` (transitive closure)."""
    if t < 1:
        raise ArgumentError("t must be >= 1")
    spec = as_spec(spec)
    pts = sorted({spec.vertex(v) for v in S})
    if not pts:
        return []
    arr = np.array(pts, dtype=np.int64)
    d = spec.distances(arr[:, None, :], arr[None, :, :])
    n_comp, lab = connected_components(csr_matrix(d <= t), directed=False)
    parts: dict = {}
    for p, l in zip(pts, lab):
        parts.setdefault(int(l), []).append(p)
    return sorted(parts.values(), key=lambda part: part[0])
