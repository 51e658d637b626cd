from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from percolata import ArgumentError, InvariantError, ResourceLimitError, _kernels
from percolata.oracle import (
    EventPolynomial,
    connection_event,
    evaluate,
    exact_event_polynomial,
    expansion_tables,
    tail_event,
    two_point_event,
    verify_inclusion_exclusion,
)
from percolata.percolation import Scales, label_clusters
from percolata.window import make_window

TOY = Scales.toy()


def test_star_window():
    w = make_window("inf,inf", 1)
    poly = exact_event_polynomial(w, connection_event(w), vectorized=True)
    assert poly.coefficients == (0, 4, 6, 4, 1)
    assert evaluate(poly, Fraction(1, 2)) == Fraction(15, 16)
    assert [int(c) for c in poly.power_basis()] == [0, 4, -6, 4, -1]


@pytest.mark.parametrize("spec,r", [("inf,inf", 1), ("inf,inf", 2), ("inf,inf,inf", 1), ("inf,inf,3", 1)])
def test_scalar_and_vectorised_predicates_agree(spec, r):
    w = make_window(spec, r)

    def scalar(cfg):
        return label_clusters(cfg).touches_boundary(w.origin)

    a = exact_event_polynomial(w, scalar)
    b = exact_event_polynomial(w, connection_event(w), vectorized=True)
    assert a == b


def test_frozen_toy_window_tables():
    # values computed by the exhaustive oracle and frozen as regressions
    w = make_window("inf,inf", 2)
    two = exact_event_polynomial(w, two_point_event(w, (0, 0), (1, 0)), vectorized=True)
    assert two.coefficients == (0, 1, 12, 57, 139, 195, 174, 102, 39, 9, 1, 0, 0, 0, 0, 0, 0)
    conn = exact_event_polynomial(w, connection_event(w), vectorized=True)
    assert conn.coefficients == (0, 0, 12, 156, 886, 2940, 6486, 10276, 12225, 11184, 7938, 4356, 1819, 560,
                                 120, 16, 1)


@given(st.floats(0, 1))
def test_power_basis_matches_direct_evaluation_on_unit_interval(p):
    w = make_window("inf,inf", 2)
    poly = exact_event_polynomial(w, connection_event(w), vectorized=True)
    assert abs(poly.evaluate(p) - poly.evaluate_power_basis(p)) <= 1e-12


@given(st.floats(0, 1), st.floats(-0.25, 0.25))
def test_power_basis_matches_direct_evaluation_near_the_unit_interval(re_, im):
    w = make_window("inf,inf", 2)
    poly = exact_event_polynomial(w, connection_event(w), vectorized=True)
    z = complex(re_, im)
    # rounding error of either form scales with the sum of its absolute terms
    power = sum(abs(float(c)) * abs(z) ** k for k, c in enumerate(poly.power_basis()))
    bern = sum(c * abs(z) ** a * abs(1 - z) ** (poly.m - a) for a, c in enumerate(poly.coefficients))
    assert abs(poly.evaluate(z) - poly.evaluate_power_basis(z)) <= 1e-12 * max(1.0, power, bern)


def test_complement_identity():
    w = make_window("inf,inf", 2)
    m = w.n_edges
    full = EventPolynomial(m, tuple(math.comb(m, a) for a in range(m + 1)))
    conn = exact_event_polynomial(w, connection_event(w), vectorized=True)

    def disconnected(mat):
        return ~connection_event(w)(mat)

    comp = exact_event_polynomial(w, disconnected, vectorized=True)
    assert conn + comp == full and full.is_probability_table()
    assert (conn - conn).is_zero() and (-conn + conn).is_zero()


def test_increasing_events_evaluate_monotonically():
    w = make_window("inf,inf", 2)
    grid = [Fraction(i, 100) for i in range(101)]
    far = w.vertex_index((1, 1))

    def linked(mat):
        lab = _kernels.batch_labels(mat, w.edges[:, 0], w.edges[:, 1], w.n_vertices)
        return lab[:, w.origin] == lab[:, far]

    for pred in (connection_event(w), linked):
        poly = exact_event_polynomial(w, pred, vectorized=True)
        vals = [poly.evaluate(p) for p in grid]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert vals[0] == 0 and vals[-1] == 1


def test_tail_event_counts_with_brute_force_definition():
    w = make_window("inf,inf", 2)
    poly = exact_event_polynomial(w, tail_event(w, 2), vectorized=True)

    def scalar(cfg):
        lab = label_clusters(cfg)
        return lab.size(w.origin) > 2 and not lab.touches_boundary(w.origin)

    assert poly == exact_event_polynomial(w, scalar)


def test_edge_cap():
    with pytest.raises(ResourceLimitError):
        exact_event_polynomial(make_window("inf,inf", 3), connection_event(make_window("inf,inf", 3)), True)


def test_polynomial_validation():
    with pytest.raises(ArgumentError):
        EventPolynomial(2, (1, 2))
    with pytest.raises(ArgumentError):
        EventPolynomial(1, (0, 1)) + EventPolynomial(2, (0, 0, 1))


def test_inclusion_exclusion_on_toy_window():
    w = make_window("inf,inf", 2)
    rep = verify_inclusion_exclusion(w, 1, 2, TOY)
    assert rep.equal and rep.theta_identity and rep.defect.is_zero()
    tab = expansion_tables(w, 1, 2, TOY)
    assert tab.available_sizes() == [5, 8, 10, 11]
    assert tab.lhs.coefficients == (0, 0, 6, 40, 103, 132, 94, 36, 6, 0, 0, 0, 0, 0, 0, 0, 0)
    assert tab.term(5).coefficients[4:9] == (67, 120, 94, 36, 6)


def test_inclusion_exclusion_on_other_windows():
    for spec in ("inf,inf,inf", "inf,inf,3", "inf,inf,4"):
        rep = verify_inclusion_exclusion(make_window(spec, 1), 1, 2, TOY)
        assert rep.equal and rep.theta_identity


def test_inclusion_exclusion_failure_raises():
    w = make_window("inf,inf", 2)
    tab = expansion_tables(w, 1, 2, TOY)
    saved = tab.signed[5]
    try:
        tab.signed[5] = saved + EventPolynomial(w.n_edges, (1,) + (0,) * w.n_edges)
        with pytest.raises(InvariantError):
            verify_inclusion_exclusion(w, 1, 2, TOY)
        assert not verify_inclusion_exclusion(w, 1, 2, TOY, raise_on_failure=False).equal
    finally:
        tab.signed[5] = saved
