"""Bernoulli bond percolation on finite windows.

Configurations are thresholded counter-based uniforms, so for a fixed seed
the open edge set grows with ``p`` and agrees on nested windows. Cluster
labelling is union-find over open edges. The estimators below use the
window boundary as the proxy for infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import _kernels, rng
from .errors import ArgumentError, CensoredError
from .graphs import ball as rooted_ball
from .window import Window, make_window

EXACT_DIAMETER_LIMIT = 512


# ---------------------------------------------------------------------------
# configurations and labelling
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Configuration:
    window: Window
    open: np.ndarray
    p: float = float("nan")
    seed: int | None = None
    sample: int = 0
    uniforms: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_open_edges(cls, window: Window, edges: Iterable) -> "Configuration":
        """Hand-built configuration; ``edges`` are (a, b) vertex pairs or edge indices."""
        state = np.zeros(window.n_edges, dtype=bool)
        for e in edges:
            if isinstance(e, (int, np.integer)):
                state[int(e)] = True
            else:
                a, b = e
                state[window.edge_index(a, b)] = True
        return cls(window, state)

    @classmethod
    def constant(cls, window: Window, is_open: bool) -> "Configuration":
        return cls(window, np.full(window.n_edges, bool(is_open)), p=1.0 if is_open else 0.0)

    def with_states(self, states: np.ndarray) -> "Configuration":
        return replace(self, open=np.asarray(states, dtype=bool), uniforms=None)

    def open_edges(self) -> np.ndarray:
        return np.flatnonzero(self.open)


def sample_configuration(window: Window, p: float, seed: int, sample: int = 0) -> Configuration:
    """Edge ``e`` is open iff its hashed uniform for ``(seed, sample, e)`` is below ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ArgumentError(f"p must lie in [0, 1], got {p}")
    u = rng.uniforms(window.edge_keys, seed, sample)
    return Configuration(window, u < p, p=float(p), seed=int(seed), sample=int(sample), uniforms=u)


def close_edge_boundary(config: Configuration, region: np.ndarray) -> Configuration:
    """Close every edge with exactly one endpoint in ``region``.

    Applied to a sample whose region contains the origin, this plants a
    finite cluster of the origin inside ``region`` while leaving all other
    edges at their sampled states.
    """
    w = config.window
    region = np.asarray(region, dtype=bool)
    if region.shape != (w.n_vertices,):
        raise ArgumentError("region must be a vertex mask of the window")
    cross = region[w.edges[:, 0]] != region[w.edges[:, 1]]
    return replace(config, open=config.open & ~cross, uniforms=None)


@dataclass(eq=False)
class ClusterLabeling:
    config: Configuration
    labels: np.ndarray  # root vertex per vertex
    sizes: np.ndarray  # sizes[root] = cluster size, 0 for non-roots
    touches: np.ndarray  # touches[root]
    _diam: dict = field(default_factory=dict, repr=False)

    @property
    def n_clusters(self) -> int:
        return int(np.count_nonzero(self.sizes))

    def members(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.labels == self.labels[v])

    def size(self, v: int) -> int:
        return int(self.sizes[self.labels[v]])

    def touches_boundary(self, v: int) -> bool:
        return bool(self.touches[self.labels[v]])

    def connected(self, u: int, v: int) -> bool:
        return bool(self.labels[u] == self.labels[v])

    def diameter(self, v: int) -> float:
        """Extrinsic diameter of the cluster of ``v``, in the ambient metric.

        Exact below ``EXACT_DIAMETER_LIMIT`` vertices. Above, the largest
        distance among extreme points of the coordinate spread (a lower bound,
        exact on Z^d). Clusters touching the boundary report ``inf``.
        """
        root = int(self.labels[v])
        if root not in self._diam:
            if self.touches[root]:
                self._diam[root] = math.inf
            else:
                self._diam[root] = float(
                    set_diameter(self.config.window, self.members(v))
                )
        return self._diam[root]


def set_diameter(window: Window, idx: np.ndarray) -> int:
    idx = np.asarray(idx)
    if len(idx) <= 1:
        return 0
    pts = window.coords[idx]
    spec = window.spec
    if len(idx) <= EXACT_DIAMETER_LIMIT:
        return int(spec.distances(pts[:, None, :], pts[None, :, :]).max())
    k = pts.shape[1]
    signs = np.array(np.meshgrid(*[[1, -1]] * k)).reshape(k, -1).T
    proj = pts @ signs.T
    cand = np.unique(np.concatenate([proj.argmax(axis=0), proj.argmin(axis=0)]))
    sub = pts[cand]
    return int(spec.distances(sub[:, None, :], sub[None, :, :]).max())


def label_clusters(config: Configuration) -> ClusterLabeling:
    w = config.window
    labels = _kernels.uf_labels(w.n_vertices, w.edges[:, 0], w.edges[:, 1], config.open)
    sizes = np.bincount(labels, minlength=w.n_vertices)
    touches = np.zeros(w.n_vertices, dtype=bool)
    touches[labels[w.boundary]] = True
    return ClusterLabeling(config, labels, sizes, touches)


# ---------------------------------------------------------------------------
# estimates
# ---------------------------------------------------------------------------


@dataclass
class EstimateWithError:
    estimate: float
    samples: int
    stderr: float
    seed: int
    params: dict = field(default_factory=dict)
    upper: float | None = None  # one-sided 95% bound, reported on zero successes

    @classmethod
    def from_tally(cls, hits: int, samples: int, seed: int, params: dict) -> "EstimateWithError":
        phat = hits / samples
        upper = None
        if hits == 0:
            upper = float(stats.beta.ppf(0.95, 1, samples))
        return cls(phat, samples, math.sqrt(phat * (1 - phat) / samples), seed, dict(params), upper)

    @classmethod
    def from_means(cls, values: np.ndarray, seed: int, params: dict) -> "EstimateWithError":
        """Estimate from per-sample averages (translation-averaged estimators)."""
        values = np.asarray(values, dtype=float)
        n = len(values)
        sd = float(values.std(ddof=1)) if n > 1 else 0.0
        return cls(float(values.mean()), n, sd / math.sqrt(n), seed, dict(params))

    def as_record(self) -> dict:
        rec = {
            "params": self.params,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }
        if self.upper is not None:
            rec["upper95"] = self.upper
        return rec


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise ArgumentError(f"p must lie in [0, 1], got {p}")


def _explore(window: Window, p: float, seed: int, sample: int, source: int, stop_at_boundary=True):
    return _kernels.explore(
        window.indptr,
        window.nbr,
        window.nbr_edge,
        window.edge_keys,
        rng.stream_key(seed, sample),
        float(p),
        window.boundary,
        int(source),
        stop_at_boundary,
        window.n_vertices + 1,
    )


def connection_estimate(spec, p: float, radius: int, samples: int, seed: int) -> EstimateWithError:
    """Monte Carlo frequency of ``{o <-> S_radius}``, an upper proxy for theta(p)."""
    _check_p(p)
    if samples < 1:
        raise ArgumentError("samples must be >= 1")
    w = make_window(spec, radius)
    hits = 0
    for i in range(samples):
        touched, _, _ = _explore(w, p, seed, i, w.origin)
        hits += touched
    params = {"spec": str(w.spec), "p": p, "radius": radius}
    return EstimateWithError.from_tally(hits, samples, seed, params)


def connection_indicators(window: Window, ps: Sequence[float], samples: int, seed: int) -> np.ndarray:
    """``out[i, j] = 1{o <-> boundary}`` in sample ``i`` at ``ps[j]`` (shared uniforms)."""
    out = np.zeros((samples, len(ps)), dtype=bool)
    for i in range(samples):
        for j, p in enumerate(ps):
            out[i, j] = _explore(window, p, seed, i, window.origin)[0]
    return out


def theta_sweep(spec, ps: Sequence[float], radius: int, samples: int, seed: int) -> list:
    for p in ps:
        _check_p(p)
    w = make_window(spec, radius)
    ind = connection_indicators(w, ps, samples, seed)
    out = []
    for j, p in enumerate(ps):
        params = {"spec": str(w.spec), "p": float(p), "radius": radius}
        out.append(EstimateWithError.from_tally(int(ind[:, j].sum()), samples, seed, params))
    return out


def truncated_two_point(spec, p: float, u, v, radius: int, samples: int, seed: int) -> EstimateWithError:
    """Frequency of ``{u <-> v}`` with the common cluster off the boundary."""
    _check_p(p)
    w = make_window(spec, radius)
    ui, vi = w.vertex_index(u), w.vertex_index(v)
    d = w.distance(ui, vi)
    for x in (ui, vi):
        if radius - w.dist[x] <= d:
            raise ArgumentError(
                f"vertex {w.vertex(x)} is within {d} of the boundary of the radius-{radius} window"
            )
    hits = 0
    for i in range(samples):
        touched, _, visited = _explore(w, p, seed, i, ui)
        if not touched and (ui == vi or vi in set(visited.tolist())):
            hits += 1
    params = {"spec": str(w.spec), "p": p, "u": list(w.vertex(ui)), "v": list(w.vertex(vi)), "radius": radius}
    return EstimateWithError.from_tally(hits, samples, seed, params)


def cluster_tail_estimate(spec, p: float, k: int, radius: int, samples: int, seed: int) -> EstimateWithError:
    """Frequency of ``{|C_o| > k}`` with ``C_o`` off the boundary."""
    _check_p(p)
    if k < 0:
        raise ArgumentError("k must be >= 0")
    w = make_window(spec, radius)
    hits = 0
    for i in range(samples):
        touched, size, _ = _explore(w, p, seed, i, w.origin)
        hits += (not touched) and size > k
    params = {"spec": str(w.spec), "p": p, "k": k, "radius": radius}
    return EstimateWithError.from_tally(hits, samples, seed, params)


def _interior(window: Window, margin: int) -> np.ndarray:
    return np.flatnonzero(window.dist <= window.radius - margin)


def two_point_profile(spec, p: float, distances: Sequence[int], radius: int, samples: int, seed: int) -> list:
    """Truncated two-point function along coordinate axes, averaged over translates.

    In each sample every base point ``u`` with ``d(o, u) <= radius // 2`` and
    each direction ``+-e_k`` of an infinite factor contribute the indicator
    for the pair ``(u, u + d e_k)``. In infinite volume each indicator has the
    mean of the fixed-pair quantity by transitivity. In a window the boundary
    proxy for infinity sits closer to the outer base points, so near the
    critical point this estimator is biased low relative to the fixed pair at
    the origin; away from it the two agree within error.
    """
    _check_p(p)
    w = make_window(spec, radius)
    dmax = max(distances)
    if radius // 2 + dmax >= radius:
        raise ArgumentError(f"radius {radius} too small for distance {dmax}")
    base = _interior(w, radius - radius // 2)
    axes = [k for k, f in enumerate(w.spec.factors) if f == math.inf]
    partners = {}
    for d in distances:
        cols = []
        for k in axes:
            for s in (1, -1):
                shifted = w.coords[base].copy()
                shifted[:, k] += s * d
                cols.append(w.lookup(shifted))
        partners[d] = np.stack(cols, axis=1)
    vals = np.zeros((samples, len(distances)))
    for i in range(samples):
        lab = label_clusters(sample_configuration(w, p, seed, i))
        lu = lab.labels[base]
        finite = ~lab.touches[lu]
        for j, d in enumerate(distances):
            same = lab.labels[partners[d]] == lu[:, None]
            vals[i, j] = (same & finite[:, None]).mean()
    out = []
    for j, d in enumerate(distances):
        params = {"spec": str(w.spec), "p": p, "distance": int(d), "radius": radius, "averaged": "axis-translates"}
        out.append(EstimateWithError.from_means(vals[:, j], seed, params))
    return out


def tail_profile(spec, p: float, ks: Sequence[int], radius: int, samples: int, seed: int, report_every=0) -> list:
    """``P(k < |C_u| < inf)`` averaged over translates ``u`` with ``d(o,u) <= radius // 2``.

    The same boundary-proxy caveat as for :func:`two_point_profile` applies.
    """
    _check_p(p)
    w = make_window(spec, radius)
    base = _interior(w, radius - radius // 2)
    ks = np.asarray(ks)
    sums = np.zeros(len(ks))
    sq = np.zeros(len(ks))
    counts = np.zeros(len(ks), dtype=np.int64)
    nb = len(base)
    for i in range(samples):
        lab = label_clusters(sample_configuration(w, p, seed, i))
        lu = lab.labels[base]
        sz = np.where(lab.touches[lu], 0, lab.sizes[lu])
        if sz.max() <= ks.min():
            continue
        c = (sz[:, None] > ks[None, :]).sum(axis=0)
        counts += c
        frac = c / nb
        sums += frac
        sq += frac * frac
    out = []
    for j, k in enumerate(ks):
        mean = sums[j] / samples
        var = max(sq[j] / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
        params = {"spec": str(w.spec), "p": p, "k": int(k), "radius": radius, "averaged": "translates",
                  "vertex_hits": int(counts[j])}
        est = EstimateWithError(float(mean), samples, math.sqrt(var / samples), seed, params)
        if counts[j] == 0:
            est.upper = float(stats.beta.ppf(0.95, 1, samples))
        out.append(est)
    return out


@dataclass
class LineFit:
    slope: float
    intercept: float
    r2: float
    n_points: int


def decay_fit(distances: Sequence[float], estimates: Sequence[float]) -> LineFit:
    """Least squares fit of ``log(estimate)`` against distance (positive estimates only)."""
    x = np.asarray(distances, float)
    y = np.asarray(estimates, float)
    keep = y > 0
    if keep.sum() < 2:
        return LineFit(float("nan"), float("nan"), float("nan"), int(keep.sum()))
    res = stats.linregress(x[keep], np.log(y[keep]))
    return LineFit(float(res.slope), float(res.intercept), float(res.rvalue**2), int(keep.sum()))


def stretch_exponent_fit(ks: Sequence[float], estimates: Sequence[float]) -> LineFit:
    """Slope of ``log(-log P)`` against ``log k``; compare with ``(d - 1) / d``."""
    x = np.asarray(ks, float)
    y = np.asarray(estimates, float)
    keep = (y > 0) & (y < 1)
    if keep.sum() < 2:
        return LineFit(float("nan"), float("nan"), float("nan"), int(keep.sum()))
    res = stats.linregress(np.log(x[keep]), np.log(-np.log(y[keep])))
    return LineFit(float(res.slope), float(res.intercept), float(res.rvalue**2), int(keep.sum()))


# ---------------------------------------------------------------------------
# local events: crossing, uniqueness, goodness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scales:
    """Radii used by goodness, interfaces and the diameter event at scale ``N``.

    ``standard(N)`` gives the multiples ``N, 10N, 2N, 5N, 5N, 10N, 20N``.
    """

    inner: int
    cross: int
    uniq_inner: int
    uniq_outer: int
    closure: int
    closure_bar: int
    diam: int
    N: int = 1

    @classmethod
    def standard(cls, N: int) -> "Scales":
        if N < 1:
            raise ArgumentError("N must be >= 1")
        return cls(N, 10 * N, 2 * N, 5 * N, 5 * N, 10 * N, 20 * N, N)

    @classmethod
    def toy(cls) -> "Scales":
        """Radii for exhaustive checks on the 16-edge square-lattice window of radius 2.

        The multiples above divided by 5 and floored, except the diameter
        threshold, which drops to 1 because a finite cluster in a radius-2
        window has diameter at most 2. The expansion identities hold for any
        radii, so these exercise the same code paths at a size the exact
        oracle can afford.
        """
        return cls(0, 2, 0, 1, 1, 2, 1, 1)

    @property
    def reach(self) -> int:
        """Radius of the ball a single event ``E(z)`` depends on."""
        return max(self.cross, self.uniq_outer)


def _ball_edges(spec, r):
    """Offsets of ``B_r(0)`` and its edges as (local a, local b, start, axis)."""
    b = rooted_ball(spec, r)
    offs = np.array(b.vertices, dtype=np.int64).reshape(len(b), spec.arity)
    dist = np.array(b.dist, dtype=np.int64)
    mod = spec.moduli
    la, lb, start, axis = [], [], [], []
    for i, j in b.edges:
        diff = offs[j] - offs[i]
        k = int(np.flatnonzero(diff)[0])
        step = offs[i][k] + 1
        if mod[k]:
            step %= mod[k]
        if step == offs[j][k]:
            s = i
        else:
            s = j
        la.append(i)
        lb.append(j)
        start.append(s)
        axis.append(k)
    return offs, dist, np.array(la), np.array(lb), np.array(start), np.array(axis)


@dataclass(eq=False)
class LocalStructure:
    """Per-centre gather tables for the crossing and uniqueness events."""

    scales: Scales
    clipped: bool
    glob_v: np.ndarray
    glob_e: np.ndarray
    le_a: np.ndarray
    le_b: np.ndarray
    le_in_cross: np.ndarray
    le_in_uniq: np.ndarray
    f_inner: np.ndarray
    f_cross_target: np.ndarray
    f_uniq: np.ndarray
    f_uniq_inner: np.ndarray
    f_uniq_target: np.ndarray
    bt_cross: np.ndarray
    bt_uniq: np.ndarray
    decidable: np.ndarray  # event at centre c depends only on edges present in the window


def local_structure(window: Window, scales: Scales, clipped: bool = False) -> LocalStructure:
    key = ("local", scales, clipped)
    if key in window.cache:
        return window.cache[key]
    spec = window.spec
    R = scales.reach
    offs, d, la, lb, start, axis = _ball_edges(spec, R)
    centres = window.coords
    glob_v = window.lookup(centres[:, None, :] + offs[None, :, :])
    glob_e = window.edge_lookup(centres[:, None, :] + offs[start][None, :, :], axis[None, :])
    # an edge counts only when both endpoints were mapped into the window
    glob_e = np.where((glob_v[:, la] >= 0) & (glob_v[:, lb] >= 0), glob_e, -1)
    in_window = glob_v >= 0
    bnd = np.zeros_like(in_window)
    bnd[in_window] = window.boundary[glob_v[in_window]]
    if clipped:
        bt_cross = bnd & (d[None, :] <= scales.cross)
        bt_uniq = bnd & (d[None, :] <= scales.uniq_outer)
    else:
        bt_cross = np.zeros_like(bnd)
        bt_uniq = np.zeros_like(bnd)
    decidable = window.dist + R <= window.radius
    if clipped:
        decidable = np.ones(window.n_vertices, dtype=bool)
    ls = LocalStructure(
        scales=scales,
        clipped=clipped,
        glob_v=glob_v,
        glob_e=glob_e,
        le_a=la,
        le_b=lb,
        le_in_cross=(d[la] <= scales.cross) & (d[lb] <= scales.cross),
        le_in_uniq=(d[la] <= scales.uniq_outer) & (d[lb] <= scales.uniq_outer),
        f_inner=d <= scales.inner,
        f_cross_target=d == scales.cross,
        f_uniq=d <= scales.uniq_outer,
        f_uniq_inner=d <= scales.uniq_inner,
        f_uniq_target=d == scales.uniq_outer,
        bt_cross=bt_cross,
        bt_uniq=bt_uniq,
        decidable=decidable,
    )
    window.cache[key] = ls
    return ls


def local_events(open_mat: np.ndarray, ls: LocalStructure, centres: np.ndarray | None = None):
    """``E(z) = crossing(z) & uniqueness(z)`` for every configuration row and centre."""
    open_mat = np.atleast_2d(np.asarray(open_mat, dtype=bool))
    if centres is None:
        sel = slice(None)
    else:
        sel = np.asarray(centres)
    crossing, n_unique = _kernels.local_events(
        open_mat,
        np.ascontiguousarray(ls.glob_v[sel]),
        np.ascontiguousarray(ls.glob_e[sel]),
        ls.le_a,
        ls.le_b,
        ls.le_in_cross,
        ls.le_in_uniq,
        ls.f_inner,
        ls.f_cross_target,
        ls.f_uniq,
        ls.f_uniq_inner,
        ls.f_uniq_target,
        np.ascontiguousarray(ls.bt_cross[sel]),
        np.ascontiguousarray(ls.bt_uniq[sel]),
    )
    return crossing & (n_unique <= 1)


def closed_neighbourhoods(window: Window):
    """Padded table of ``{x} + neighbours(x)`` (window indices, -1 padding)."""
    key = "closed_nbhd"
    if key not in window.cache:
        deg = np.diff(window.indptr)
        table = -np.ones((window.n_vertices, 1 + 2 * window.spec.arity), dtype=np.int64)
        table[:, 0] = np.arange(window.n_vertices)
        for i in range(window.n_vertices):
            table[i, 1 : 1 + deg[i]] = window.nbr[window.indptr[i] : window.indptr[i + 1]]
        full = deg == window.spec.degree
        window.cache[key] = (table, full)
    return window.cache[key]


@dataclass(eq=False)
class GoodnessField:
    """Goodness of every vertex of a window in one configuration.

    ``decided[x]`` is False when ``x``'s goodness depends on edges outside the
    window (strict mode). In clipped mode every vertex is decided, balls are
    intersected with the window and the window boundary counts as reached.
    """

    config: Configuration
    scales: Scales
    clipped: bool
    events: np.ndarray
    good: np.ndarray
    decided: np.ndarray

    @classmethod
    def compute(cls, config: Configuration, scales: Scales, clipped: bool = False) -> "GoodnessField":
        w = config.window
        ls = local_structure(w, scales, clipped)
        events = local_events(config.open, ls)[0]
        good, decided = goodness_from_events(w, events, ls.decidable, clipped)
        return cls(config, scales, clipped, events, good, decided)

    def is_bad(self, x: int) -> bool:
        if not self.decided[x]:
            raise CensoredError(f"goodness of {self.config.window.vertex(x)} is not decidable in this window")
        return not self.good[x]


def goodness_from_events(window: Window, events: np.ndarray, decidable: np.ndarray, clipped: bool):
    """Vectorised ``good[x] = all(E(z) for z in {x} + nbrs(x))`` over the last axis."""
    table, full = closed_neighbourhoods(window)
    present = table >= 0
    idx = np.where(present, table, 0)
    ev = events[..., idx]
    good = np.all(ev | ~present, axis=-1)
    decided = np.all(decidable[idx] | ~present, axis=-1)
    if not clipped:
        decided = decided & full
    return good, np.broadcast_to(decided, good.shape)


def _ball_mask(window: Window, x: int, r: int) -> np.ndarray:
    return window.distances_from(x) <= r


def _check_inside(window: Window, x: int, r: int, strict: bool):
    if strict and window.dist[x] + r > window.radius:
        need = int(window.dist[x]) + r
        raise ArgumentError(
            f"B_{r}({window.vertex(x)}) leaves the window: radius >= {need} required, have {window.radius}"
        )


def _restricted_labels(config: Configuration, mask: np.ndarray) -> np.ndarray:
    w = config.window
    edges_in = w.induced_edges(mask) & config.open
    return _kernels.uf_labels(w.n_vertices, w.edges[:, 0], w.edges[:, 1], edges_in)


def _target(window: Window, dist_x: np.ndarray, r: int, strict: bool) -> np.ndarray:
    tgt = dist_x == r
    if not strict:
        tgt = tgt | (window.boundary & (dist_x <= r))
    return tgt


def crossing_event(config: Configuration, x: int, inner: int, outer: int, strict: bool = True) -> bool:
    """Open path from ``B_inner(x)`` to ``S_outer(x)`` using edges inside ``B_outer(x)``."""
    w = config.window
    _check_inside(w, x, outer, strict)
    dx = w.distances_from(x)
    ball_mask = dx <= outer
    lab = _restricted_labels(config, ball_mask)
    src = set(lab[ball_mask & (dx <= inner)].tolist())
    dst = set(lab[ball_mask & _target(w, dx, outer, strict)].tolist())
    return bool(src & dst)


def uniqueness_event(config: Configuration, x: int, m: int, n: int, strict: bool = True) -> bool:
    """At most one cluster of ``omega`` restricted to ``B_n(x)`` meets ``B_m(x)`` and ``S_n(x)``."""
    if m > n:
        raise ArgumentError(f"uniqueness event needs m <= n, got m={m}, n={n}")
    w = config.window
    _check_inside(w, x, n, strict)
    dx = w.distances_from(x)
    ball_mask = dx <= n
    lab = _restricted_labels(config, ball_mask)
    src = set(lab[ball_mask & (dx <= m)].tolist())
    dst = set(lab[ball_mask & _target(w, dx, n, strict)].tolist())
    return len(src & dst) <= 1


def local_event(config: Configuration, z: int, scales: Scales, strict: bool = True) -> bool:
    return crossing_event(config, z, scales.inner, scales.cross, strict) and uniqueness_event(
        config, z, scales.uniq_inner, scales.uniq_outer, strict
    )


def is_good(config: Configuration, x: int, N: int = 1, scales: Scales | None = None, strict: bool = True) -> bool:
    """``x`` is N-good when ``E(z)`` holds at ``x`` and at each of its neighbours."""
    scales = scales or Scales.standard(N)
    w = config.window
    nbrs = w.neighbors_of(x)
    if strict:
        need = int(w.dist[x]) + 1 + scales.reach
        if len(nbrs) < w.spec.degree or need > w.radius:
            raise ArgumentError(f"goodness of {w.vertex(x)} needs a window of radius >= {need}, have {w.radius}")
    return all(local_event(config, int(z), scales, strict) for z in [x, *nbrs.tolist()])
