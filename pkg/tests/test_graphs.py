from __future__ import annotations

import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from percolata import ArgumentError, InvalidVertexError, ResourceLimitError
from percolata.graphs import INF, GraphSpec, ball, locality_radius, neighbors, rooted_ball_isomorphic
from percolata.window import make_window


def lattice_ball_size(d: int, r: int) -> int:
    """Independent count of Z^d points with |x|_1 <= r."""
    return sum(1 for x in itertools.product(range(-r, r + 1), repeat=d) if sum(map(abs, x)) <= r)


def product_ball(factors, r):
    """Ball via networkx products of paths and cycles, an independent construction."""
    parts = []
    for f in factors:
        parts.append(nx.path_graph(range(-r, r + 1)) if f == INF else nx.cycle_graph(f))
    g = parts[0]
    for h in parts[1:]:
        g = nx.cartesian_product(g, h)
    origin = 0
    for _ in factors[1:]:
        origin = (origin, 0)  # repeated products nest their node tuples
    return nx.ego_graph(g, origin, radius=r)


def test_parse_round_trip():
    spec = GraphSpec.parse("inf, inf,6")
    assert spec.factors == (INF, INF, 6)
    assert str(spec) == "inf,inf,6"
    assert spec.dimension == 2 and spec.degree == 6 and spec.arity == 3


@pytest.mark.parametrize("text", ["", "inf,2", "inf,x", "inf,2.5"])
def test_parse_rejects(text):
    with pytest.raises(ArgumentError):
        GraphSpec.parse(text) if text != "inf,2.5" else GraphSpec((INF, 2.5))


def test_vertex_validation_and_wrap():
    spec = GraphSpec.parse("inf,5")
    assert spec.vertex((3, 7)) == (3, 2)
    with pytest.raises(InvalidVertexError):
        spec.vertex((1,))
    with pytest.raises(InvalidVertexError):
        neighbors(spec, (0, 0, 0))


@pytest.mark.parametrize("d,r", [(1, 5), (2, 4), (3, 3), (4, 2)])
def test_lattice_ball_sizes(d, r):
    b = ball(",".join(["inf"] * d), r)
    assert len(b) == lattice_ball_size(d, r)
    assert len(b.sphere(r)) == lattice_ball_size(d, r) - lattice_ball_size(d, r - 1)


@pytest.mark.parametrize("spec,r", [("inf,inf,3", 3), ("inf,4", 4), ("inf,inf,5", 2), ("inf,6,3", 3)])
def test_ball_matches_networkx_product(spec, r):
    ours = ball(spec, r)
    ref = product_ball(GraphSpec.parse(spec).factors, r)
    assert len(ours) == ref.number_of_nodes()
    assert len(ours.edges) == ref.number_of_edges()


def test_ball_budget():
    with pytest.raises(ResourceLimitError):
        ball("inf,inf,inf", 10, budget=100)


@given(st.integers(3, 9), st.integers(0, 6))
def test_slab_balls_isomorphic_below_half_cycle(n, r):
    a, b = ball(f"inf,inf,{n}", r), ball("inf,inf,inf", r)
    iso = rooted_ball_isomorphic(a, b)
    assert iso == (r <= n // 2 - 1 or r == 0)


def test_isomorphism_distinguishes_equal_sized_balls():
    # same vertex count but not isomorphic: Z x C_4 vs Z^2 at radius 2 differ in edges
    a, b = ball("inf,4", 2), ball("inf,inf", 2)
    assert not rooted_ball_isomorphic(a, b)
    assert rooted_ball_isomorphic(a, a)


@pytest.mark.parametrize("n,expected", [(3, 0), (4, 1), (5, 1), (6, 2), (7, 2), (8, 3), (9, 3)])
def test_locality_radius_values(n, expected):
    # expected values confirmed independently in the acceptance suite by VF2 isomorphism
    assert locality_radius(f"inf,inf,{n}", "inf,inf,inf", 10) == expected


def test_locality_radius_cap():
    r = locality_radius("inf,inf", "inf,inf", 3)
    assert int(r) == 3 and getattr(r, "capped", False)


@given(st.sampled_from(["inf", "inf,inf", "inf,inf,inf", "inf,inf,4", "inf,5", "inf,inf,3"]), st.integers(0, 5))
def test_window_matches_ball(spec, r):
    w = make_window(spec, r)
    b = ball(spec, r)
    assert w.n_vertices == len(b) and w.n_edges == len(b.edges)
    assert w.vertex(w.origin) == GraphSpec.parse(spec).origin
    assert np.all(w.dist <= r) and np.array_equal(np.sort(w.dist), np.sort(np.array(b.dist)))


@given(st.sampled_from(["inf,inf", "inf,inf,5", "inf,3"]), st.integers(1, 4), st.data())
def test_distances_are_graph_distances(spec, r, data):
    w = make_window(spec, r)
    i = data.draw(st.integers(0, w.n_vertices - 1))
    g = nx.Graph(list(map(tuple, w.edges)))
    g.add_nodes_from(range(w.n_vertices))
    # inside the window the path metric may exceed the ambient one; the ambient one is a lower bound
    sp = nx.single_source_shortest_path_length(g, i)
    amb = w.distances_from(i)
    assert all(amb[j] <= d for j, d in sp.items())
    assert amb[i] == 0 and all(amb[j] == 1 for j in w.neighbors_of(i))


def test_distance_wraps_on_cycles():
    spec = GraphSpec.parse("inf,7")
    assert spec.distance((0, 0), (0, 6)) == 1
    assert spec.distance((2, 1), (-1, 5)) == 3 + 3
    assert math.isinf(INF)
