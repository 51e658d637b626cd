from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from percolata import ArgumentError, CensoredError
from percolata.interfaces import (
    GeodesicAxis,
    Interface,
    MultiInterface,
    enumerate_interfaces,
    expansion_term,
    extract_interface,
    interface_occurs,
    multi_interfaces,
    occurring_census,
    occurring_interfaces,
    subset_size_counts,
    theta_series,
)
from percolata.oracle import expansion_tables
from percolata.percolation import (
    Configuration,
    Scales,
    close_edge_boundary,
    sample_configuration,
)
from percolata.window import make_window

TOY = Scales.toy()


def brute_force_interfaces(window, t, max_size):
    out = []
    for size in range(1, max_size + 1):
        for S in itertools.combinations(range(window.n_vertices), size):
            if Interface(window, S, TOY, t).is_interface():
                out.append(S)
    return out


@pytest.mark.parametrize("spec,r,t,max_size", [("inf,inf", 2, 2, 13), ("inf,inf", 2, 1, 13),
                                                ("inf,inf,3", 1, 2, 7), ("inf,inf", 3, 1, 5)])
def test_enumeration_matches_all_subsets(spec, r, t, max_size):
    w = make_window(spec, r)
    got = [i.members for i in enumerate_interfaces(w, 1, t, max_size, TOY)]
    assert len(got) == len(set(got))
    assert sorted(got) == sorted(brute_force_interfaces(w, t, max_size))


def test_toy_window_candidate_count():
    # frozen from the brute-force enumeration above
    assert len(enumerate_interfaces(make_window("inf,inf", 2), 1, 2, 13, TOY)) == 4529


def test_subset_size_counts_by_brute_force():
    sizes = [2, 3, 3, 5, 1]
    signed, unsigned = subset_size_counts(sizes)
    ref_s = [0] * (sum(sizes) + 1)
    ref_u = [0] * (sum(sizes) + 1)
    for k in range(1, len(sizes) + 1):
        for combo in itertools.combinations(sizes, k):
            ref_s[sum(combo)] += (-1) ** (k + 1)
            ref_u[sum(combo)] += 1
    assert signed == ref_s and unsigned == ref_u
    assert subset_size_counts([4], 2) == ([0, 0, 0], [0, 0, 0])


def test_multi_interfaces_are_disjoint_collections():
    w = make_window("inf,inf", 2)
    cands = enumerate_interfaces(w, 1, 2, 2, TOY)
    for n in (1, 2, 3, 4):
        for m in multi_interfaces(cands, n):
            assert m.size == n
    a = Interface(w, (0, 1), TOY, 2)
    with pytest.raises(ArgumentError):
        MultiInterface((a, Interface(w, (1, 2), TOY, 2)))
    assert MultiInterface((a,)).sign == 1


@given(st.integers(0, 2**16 - 1))
def test_component_route_matches_literal_clauses(mask):
    w = make_window("inf,inf", 2)
    cfg = Configuration(w, np.array([(mask >> e) & 1 for e in range(w.n_edges)], dtype=bool))
    found = {i.members for i in occurring_interfaces(cfg, 1, 2, TOY, clipped=True)}
    literal = {i.members for i in enumerate_interfaces(w, 1, 2, 13, TOY)
               if interface_occurs(cfg, i, 1, 2, TOY, clipped=True)}
    assert found == literal


@given(st.integers(0, 10**6), st.floats(0.5, 0.9))
def test_census_audits_hold(seed, p):
    w = make_window("inf,inf", 6)
    c = occurring_census(sample_configuration(w, p, seed, 0), 1, 2, 30, TOY, clipped=True)
    assert c.disjoint and c.geodesic_ok
    assert c.counts[0] == 0


def test_geodesic_axis():
    w = make_window("inf,inf,4", 3)
    ax = GeodesicAxis(w)
    assert ax.point(2) == (2, 0, 0)
    assert len(ax.indices(10)) == 4
    m = np.zeros(w.n_vertices, dtype=bool)
    m[ax.index(3)] = True
    assert ax.first_hit(m) == 3


def planted(seed, radius=40, half=12):
    w = make_window("inf,inf", radius)
    region = w.dist <= half
    return close_edge_boundary(sample_configuration(w, 0.7, seed, 0), region)


def test_extraction_invariants_on_planted_clusters():
    qualifying = 0
    for seed in range(12):
        try:
            ex = extract_interface(planted(seed), 1, 2)
        except CensoredError:
            continue
        if ex is None:
            continue
        qualifying += 1
        assert ex.all_boundary_bad and ex.closure_bar_cuts
        c = occurring_census(planted(seed), 1, 2, len(ex.interface))
        assert c.disjoint and c.geodesic_ok and len(c.interfaces) >= 1
    assert qualifying >= 4


def test_extraction_preconditions():
    w = make_window("inf,inf", 30)
    assert extract_interface(Configuration.constant(w, True), 1, 2) is None
    assert extract_interface(Configuration.constant(w, False), 1, 2) is None  # diameter 0
    small = make_window("inf,inf", 12)
    cfg = close_edge_boundary(sample_configuration(small, 0.9, 1, 0), small.dist <= 11)
    with pytest.raises(CensoredError):
        extract_interface(cfg, 1, 2)
    with pytest.raises(ArgumentError):
        extract_interface(cfg, 1, 0)


def test_series_reproduces_one_minus_connection_exactly():
    w = make_window("inf,inf", 2)
    tab = expansion_tables(w, 1, 2, TOY)
    p = Fraction(7, 10)
    series = tab.diameter_small.evaluate(p) + sum(tab.term(n).evaluate(p) for n in range(1, tab.max_size + 1))
    assert series == 1 - tab.connection.evaluate(p)
    sv = theta_series(w, 1, 2, 0.7, tab.max_size, TOY)
    assert abs(sv.value - float(1 - tab.connection.evaluate(p))) < 1e-12 and not sv.truncated
    assert theta_series(w, 1, 2, 0.7, 6, TOY).truncated


def test_monte_carlo_term_agrees_with_exact():
    w = make_window("inf,inf", 2)
    exact = float(expansion_term(w, 1, 2, 5, "exact", TOY).evaluate(Fraction(1, 2)))
    mc = expansion_term(w, 1, 2, 5, "monte_carlo", TOY, p=0.5, samples=4000, seed=3)
    assert abs(mc.estimate - exact) < 5 * mc.stderr + 1e-12
    with pytest.raises(ArgumentError):
        expansion_term(w, 1, 2, 5, "monte_carlo", TOY, p=0.5)
