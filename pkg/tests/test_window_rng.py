from __future__ import annotations

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from percolata import _kernels, rng
from percolata.percolation import sample_configuration
from percolata.window import make_window


def test_kernel_uniforms_match_numpy():
    w = make_window("inf,inf,inf", 4)
    for seed, sample in [(0, 0), (7, 3), (2**40 + 5, 99)]:
        ref = rng.uniforms(w.edge_keys, seed, sample)
        got = _kernels.hashed_uniforms(w.edge_keys, rng.stream_key(seed, sample))
        assert np.array_equal(ref, got)
        assert np.all((ref >= 0) & (ref < 1))


def test_edge_keys_unique():
    for spec in ("inf,inf", "inf,inf,3", "inf,inf,8", "inf,4,5"):
        w = make_window(spec, 6)
        assert len(np.unique(w.edge_keys)) == w.n_edges


def test_uniforms_look_uniform():
    w = make_window("inf,inf", 30)
    u = np.concatenate([rng.uniforms(w.edge_keys, 3, i) for i in range(20)])
    hist = np.histogram(u, bins=10, range=(0, 1))[0] / len(u)
    assert np.all(np.abs(hist - 0.1) < 0.01)


@given(st.integers(0, 2**32), st.integers(0, 1000), st.integers(2, 6))
def test_nested_windows_share_uniforms(seed, sample, r):
    small, big = make_window("inf,inf", r), make_window("inf,inf", r + 3)
    us = sample_configuration(small, 0.5, seed, sample).uniforms
    ub = sample_configuration(big, 0.5, seed, sample).uniforms
    for e in range(small.n_edges):
        a, b = small.vertex(small.edges[e, 0]), small.vertex(small.edges[e, 1])
        assert ub[big.edge_index(a, b)] == us[e]


def test_slab_and_lattice_share_uniforms_on_common_ball():
    # the centred lift makes corresponding edges near the origin agree
    slab, lat = make_window("inf,inf,8", 3), make_window("inf,inf,inf", 3)
    us = rng.uniforms(slab.edge_keys, 5, 0)
    ul = rng.uniforms(lat.edge_keys, 5, 0)
    assert slab.n_edges == lat.n_edges
    for e in range(lat.n_edges):
        a, b = lat.vertex(lat.edges[e, 0]), lat.vertex(lat.edges[e, 1])
        assert us[slab.edge_index(a, b)] == ul[e]


@given(st.integers(0, 10**6), st.floats(0, 1), st.floats(0, 1))
def test_monotone_coupling(seed, p, q):
    w = make_window("inf,inf", 5)
    lo, hi = sorted((p, q))
    a = sample_configuration(w, lo, seed, 1).open
    b = sample_configuration(w, hi, seed, 1).open
    assert not np.any(a & ~b)
