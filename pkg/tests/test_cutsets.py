from __future__ import annotations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from percolata import ArgumentError, InconclusiveError
from percolata.cutsets import (
    SINK,
    CutGraph,
    boundaries,
    bottleneck,
    brute_force_minimal_cutsets,
    cut_connectivity,
    cutset_status,
    enumerate_minimal_cutsets,
    t_components,
)
from percolata.window import make_window


def members(cs):
    return [c.members for c in cs]


@pytest.mark.parametrize("spec,r", [("inf,inf", 2), ("inf,inf,inf", 1), ("inf,inf,3", 1), ("inf,3", 2)])
@pytest.mark.parametrize("kind", ["vertex", "bond"])
def test_window_enumeration_matches_brute_force(spec, r, kind):
    w = make_window(spec, r)
    g = CutGraph.from_window(w)
    o = w.vertex(w.origin)
    targets = [SINK] + [w.vertex(i) for i in range(1, w.n_vertices) if w.dist[i] == r][:2]
    for t in targets:
        assert members(enumerate_minimal_cutsets(g, o, t, 6, kind)) == members(
            brute_force_minimal_cutsets(g, o, t, 6, kind)
        )


@given(st.integers(5, 9), st.floats(0.3, 0.7), st.integers(0, 10**6), st.sampled_from(["vertex", "bond"]))
def test_random_graphs_match_brute_force(n, prob, seed, kind):
    g = nx.gnp_random_graph(n, prob, seed=seed)
    if not nx.is_connected(g):
        g = nx.compose(g, nx.path_graph(n))
    cg = CutGraph.from_edges(g.edges())
    u, t = 0, n - 1
    if kind == "vertex" and g.has_edge(u, t):
        return
    fast = enumerate_minimal_cutsets(cg, u, t, 4, kind)
    assert members(fast) == members(brute_force_minimal_cutsets(cg, u, t, 4, kind))
    for c in fast:
        assert c.is_cutset and c.is_minimal


@given(st.integers(0, 10**6))
def test_prune_mode_keeps_exactly_the_censor_free_sides(seed):
    w = make_window("inf,inf", 3)
    g = CutGraph.from_window(w)
    rng = np.random.default_rng(seed)
    t = w.vertex(int(rng.integers(1, w.n_vertices)))
    if g.vertex(t) in g.adj[0]:
        return
    full = enumerate_minimal_cutsets(g, (0, 0), t, 5, "vertex")
    pruned = enumerate_minimal_cutsets(g, (0, 0), t, 5, "vertex", prune_censored=True)
    assert set(members(pruned)) <= set(members(full))
    for c in full:
        removed = {g.vertex(m) for m in c.members}
        sides = []
        for root in (0, g.vertex(t)):
            seen, stack = {root}, [root]
            while stack:
                x = stack.pop()
                for y in g.adj[x]:
                    if y not in seen and y not in removed:
                        seen.add(y)
                        stack.append(y)
            sides.append(not any(g.censor[x] for x in seen))
        assert (c.members in set(members(pruned))) == any(sides)


def test_cycle_graph_cutsets():
    # on C_6 the minimal vertex cutsets between opposite vertices are one vertex from each arc
    g = CutGraph.from_edges([(i, (i + 1) % 6) for i in range(6)])
    cs = enumerate_minimal_cutsets(g, 0, 3, 4, "vertex")
    assert sorted(members(cs)) == [(1, 4), (1, 5), (2, 4), (2, 5)]
    bonds = enumerate_minimal_cutsets(g, 0, 3, 4, "bond")
    assert len(bonds) == 9


def test_status_and_certificates():
    w = make_window("inf,inf", 4)
    ring = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    st_ = cutset_status(w, ring, "vertex", (0, 0), SINK)
    assert st_.is_cutset and st_.is_minimal and st_.k_certificate == 2 and not st_.censored
    assert not cutset_status(w, ring[:3], "vertex", (0, 0), SINK).is_cutset
    edges = [((0, 0), v) for v in ring]
    b = cutset_status(w, edges, "bond", (0, 0), SINK)
    assert b.is_minimal and b.k_certificate == 1
    with pytest.raises(ArgumentError):
        cutset_status(w, [(0, 0)], "vertex", (0, 0), SINK)


def test_bottleneck_is_mst_max_edge():
    pts = np.array([[0, 0], [1, 0], [5, 0], [6, 0]])
    d = np.abs(pts[:, None, :] - pts[None, :, :]).sum(-1)
    assert bottleneck(d) == 4


def test_empirical_connectivity_on_square_lattice():
    w = make_window("inf,inf", 5)
    pairs = [((0, 0), SINK), ((0, 0), (2, 0)), ((0, 0), (1, 1))]
    v = cut_connectivity(w, pairs, 8, "vertex")
    b = cut_connectivity(w, pairs, 8, "bond")
    assert (v.value, b.value) == (2, 1)
    assert v.value <= b.value + 2
    with pytest.raises(InconclusiveError):
        cut_connectivity(w, [((0, 0), SINK)], 1, "vertex")


def test_boundaries_of_a_square():
    w = make_window("inf,inf", 8)
    A = [(x, y) for x in range(3) for y in range(3)]
    rep = boundaries(w, A)
    assert len(rep.exposed) == 8 and len(rep.edge_boundary) == 12 and len(rep.exterior) == 12
    assert rep.ratio == pytest.approx(8 / 3)
    # a hole is not exposed: the ring around (0,0) has inner vertices off the outside component
    ring = [(x, y) for x in range(-2, 3) for y in range(-2, 3) if max(abs(x), abs(y)) == 2]
    assert len(boundaries(w, ring).exposed) == 16 - 4 + 4  # every ring vertex touches the outside
    with pytest.raises(ArgumentError):
        boundaries(w, [])


@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=25), st.integers(1, 3))
def test_t_components_match_networkx(pts, t):
    comps = t_components("inf,inf", pts, t)
    g = nx.Graph()
    uniq = sorted(set(pts))
    g.add_nodes_from(uniq)
    for i, a in enumerate(uniq):
        for b in uniq[i + 1 :]:
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) <= t:
                g.add_edge(a, b)
    ref = sorted(sorted(c) for c in nx.connected_components(g))
    assert sorted(comps) == ref
