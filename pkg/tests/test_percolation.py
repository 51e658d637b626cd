from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from percolata import ArgumentError
from percolata.percolation import (
    Configuration,
    EstimateWithError,
    GoodnessField,
    Scales,
    _explore,
    close_edge_boundary,
    cluster_tail_estimate,
    connection_estimate,
    decay_fit,
    is_good,
    label_clusters,
    local_event,
    sample_configuration,
    set_diameter,
    stretch_exponent_fit,
    tail_profile,
    theta_sweep,
    truncated_two_point,
    two_point_profile,
)
from percolata.window import make_window


@given(st.integers(0, 10**6), st.floats(0.2, 0.8), st.sampled_from(["inf,inf", "inf,inf,3", "inf,inf,inf"]))
def test_exploration_matches_labelling(seed, p, spec):
    w = make_window(spec, 6)
    cfg = sample_configuration(w, p, seed, 0)
    lab = label_clusters(cfg)
    touched, size, visited = _explore(w, p, seed, 0, w.origin, stop_at_boundary=False)
    assert bool(touched) == lab.touches_boundary(w.origin)
    assert size == lab.size(w.origin)
    assert set(visited[:size].tolist()) == set(lab.members(w.origin).tolist())


def test_labelling_partitions_vertices():
    w = make_window("inf,inf", 8)
    lab = label_clusters(sample_configuration(w, 0.5, 1, 0))
    assert sum(lab.size(int(r)) for r in np.unique(lab.labels)) == w.n_vertices
    assert lab.n_clusters == len(np.unique(lab.labels))


def test_constant_configurations():
    w = make_window("inf,inf", 4)
    assert label_clusters(Configuration.constant(w, True)).touches_boundary(w.origin)
    assert label_clusters(Configuration.constant(w, False)).size(w.origin) == 1
    assert connection_estimate("inf,inf", 0.0, 4, 50, 1).estimate == 0.0
    assert connection_estimate("inf,inf", 1.0, 4, 50, 1).estimate == 1.0


def test_from_open_edges_and_errors():
    w = make_window("inf,inf", 2)
    cfg = Configuration.from_open_edges(w, [((0, 0), (1, 0)), ((1, 0), (2, 0))])
    assert label_clusters(cfg).touches_boundary(w.origin)
    with pytest.raises(ArgumentError):
        sample_configuration(w, 1.5, 0)
    with pytest.raises(ArgumentError):
        truncated_two_point("inf,inf", 0.5, (0, 0), (5, 0), 8, 10, 1)


def test_zero_hit_upper_bound_is_clopper_pearson():
    est = EstimateWithError.from_tally(0, 1000, 1, {})
    assert est.estimate == 0.0
    assert est.upper == pytest.approx(1 - 0.05 ** (1 / 1000), rel=1e-9)
    assert "upper95" in est.as_record()


def test_theta_sweep_is_pathwise_monotone():
    ests = theta_sweep("inf,inf", [0.3, 0.45, 0.5, 0.55, 0.7], 10, 300, 9)
    vals = [e.estimate for e in ests]
    assert vals == sorted(vals)


@pytest.mark.parametrize("p", [0.25, 0.7])
def test_profiles_agree_with_fixed_pair_estimators(p):
    # off criticality the translation average and the fixed pair at the origin share their mean
    prof = two_point_profile("inf,inf", p, [1, 2], 16, 2000, 3)
    for d, est in zip([1, 2], prof):
        fixed = truncated_two_point("inf,inf", p, (0, 0), (d, 0), 16, 20000, 4)
        assert abs(est.estimate - fixed.estimate) < 5 * math.hypot(est.stderr, fixed.stderr)
    tail = tail_profile("inf,inf", p, [3], 16, 2000, 5)[0]
    fixed = cluster_tail_estimate("inf,inf", p, 3, 16, 20000, 6)
    assert abs(tail.estimate - fixed.estimate) < 5 * math.hypot(tail.stderr, fixed.stderr)


def test_fits_recover_known_curves():
    d = np.arange(2, 11)
    fit = decay_fit(d, np.exp(-0.8 * d + 0.1))
    assert fit.slope == pytest.approx(-0.8) and fit.r2 == pytest.approx(1.0)
    k = np.array([16, 32, 64, 128])
    fit = stretch_exponent_fit(k, np.exp(-0.3 * k**0.5))
    assert fit.slope == pytest.approx(0.5)
    # zeros are dropped before fitting
    assert decay_fit([1, 2, 3], [0.1, 0.01, 0.0]).n_points == 2
    assert math.isnan(decay_fit([1, 2], [0.1, 0.0]).slope)


@given(st.integers(0, 10**6), st.integers(1, 40))
def test_set_diameter_matches_pairwise(seed, size):
    w = make_window("inf,inf", 12)
    idx = np.random.default_rng(seed).choice(w.n_vertices, size=size, replace=False)
    ref = int(cdist(w.coords[idx], w.coords[idx], "cityblock").max())
    assert set_diameter(w, idx) == ref


def test_set_diameter_large_sets():
    w = make_window("inf,inf", 20)
    idx = np.random.default_rng(0).choice(w.n_vertices, size=700, replace=False)
    assert set_diameter(w, idx) == int(cdist(w.coords[idx], w.coords[idx], "cityblock").max())


def test_scales():
    s = Scales.standard(2)
    assert (s.inner, s.cross, s.uniq_inner, s.uniq_outer, s.closure, s.closure_bar, s.diam) == (2, 20, 4, 10, 10, 20, 40)
    assert s.reach == 20
    with pytest.raises(ArgumentError):
        Scales.standard(0)


@pytest.mark.parametrize("scales,radius", [(Scales.toy(), 6), (Scales.standard(1), 14)])
@pytest.mark.parametrize("clipped", [False, True])
def test_batched_goodness_matches_direct_events(scales, radius, clipped):
    w = make_window("inf,inf", radius)
    for sample in range(2):
        cfg = sample_configuration(w, 0.6, 11, sample)
        gf = GoodnessField.compute(cfg, scales, clipped)
        for x in range(0, w.n_vertices, 7):
            if not gf.decided[x]:
                continue
            direct = all(local_event(cfg, int(z), scales, strict=not clipped) for z in [x, *w.neighbors_of(x)])
            assert gf.good[x] == direct
            if not clipped:
                assert is_good(cfg, x, scales=scales) == direct


def test_goodness_is_fully_open_and_closed_sensible():
    w = make_window("inf,inf", 14)
    sc = Scales.standard(1)
    assert GoodnessField.compute(Configuration.constant(w, True), sc).good[w.origin]
    assert not GoodnessField.compute(Configuration.constant(w, False), sc).good[w.origin]


@given(st.integers(0, 10**6))
def test_close_edge_boundary_plants_a_finite_cluster(seed):
    w = make_window("inf,inf", 10)
    region = w.dist <= 4
    cfg = close_edge_boundary(sample_configuration(w, 0.9, seed, 0), region)
    members = label_clusters(cfg).members(w.origin)
    assert region[members].all()
