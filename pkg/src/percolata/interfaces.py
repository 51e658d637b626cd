"""Bad components, interfaces and the signed multi-interface expansion.

All sets are boolean masks or sorted index arrays over a window. Goodness
is decided by :class:`~percolata.percolation.GoodnessField`; in strict mode
only vertices whose events fit inside the window are decided and touching an
undecided vertex raises :class:`CensoredError`. Clipped mode intersects
every ball with the window, which is what the exhaustive oracle uses.

Occurring interfaces are exactly the bad t-components that contain or
surround the origin and whose closure cuts it from the boundary, since
conditions 1 and 2 of occurrence say the set is bad and its t-fringe is
good. :func:`occurring_interfaces` uses that shortcut; :func:`interface_occurs`
checks the three clauses literally.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .cutsets import exposed_boundary_mask, outside_mask
from .errors import ArgumentError, CensoredError, InvariantError, PartialResultError
from .graphs import ball as rooted_ball
from .percolation import (
    Configuration,
    GoodnessField,
    Scales,
    label_clusters,
    set_diameter,
)
from .window import Window

DEFAULT_ENUM_BUDGET = 2_000_000


# ---------------------------------------------------------------------------
# window geometry helpers
# ---------------------------------------------------------------------------


def within_table(window: Window, r: int) -> np.ndarray:
    """``table[x]`` lists window vertices at distance <= r from ``x`` (-1 padded)."""
    key = ("within", r)
    if key not in window.cache:
        b = rooted_ball(window.spec, r)
        offs = np.array(b.vertices, dtype=np.int64).reshape(len(b), window.spec.arity)
        window.cache[key] = window.lookup(window.coords[:, None, :] + offs[None, :, :])
    return window.cache[key]


def dilate(window: Window, mask: np.ndarray, r: int) -> np.ndarray:
    """Vertices within distance ``r`` of the set (ambient metric, clipped to the window)."""
    if r == 0:
        return mask.copy()
    tab = within_table(window, r)[mask]
    out = np.zeros(window.n_vertices, dtype=bool)
    out[tab[tab >= 0]] = True
    return out


def t_labels(window: Window, mask: np.ndarray, t: int) -> np.ndarray:
    """Union-find roots of the E_t relation restricted to ``mask`` (-1 off the mask)."""
    idx = np.flatnonzero(mask)
    tab = within_table(window, t)[idx]
    a = np.repeat(idx, tab.shape[1])
    b = tab.ravel()
    keep = (b >= 0) & mask[np.where(b >= 0, b, 0)]
    lab = _kernels.uf_labels(window.n_vertices, a[keep], b[keep], np.ones(int(keep.sum()), dtype=bool))
    return np.where(mask, lab, -1)


def surrounds_origin(window: Window, mask: np.ndarray) -> bool:
    """``o`` is in the set, or its component in the complement misses the window boundary."""
    if mask[window.origin]:
        return True
    return not outside_mask(window, mask)[window.origin]


def cut_from_boundary(config: Configuration, region: np.ndarray) -> bool:
    """No path from ``o`` to the boundary whose edges are open or leave ``region``.

    An edge is in the region when both endpoints are. This is the literal
    reading of "the closed edges of the region form a bond-cutset".
    """
    w = config.window
    passable = config.open | ~w.induced_edges(region)
    lab = _kernels.uf_labels(w.n_vertices, w.edges[:, 0], w.edges[:, 1], passable)
    return not np.any(lab[w.boundary] == lab[w.origin])


@dataclass(frozen=True)
class GeodesicAxis:
    """``gamma(i) = i e`` along the first infinite factor through the origin."""

    window: Window = field(compare=False)

    def point(self, i: int) -> tuple:
        return self.window.spec.axis_point(i)

    def index(self, i: int) -> int:
        return self.window.vertex_index(self.point(i))

    def indices(self, i_max: int) -> list:
        """Window indices of ``gamma(0..i_max)``, stopping at the window edge."""
        out = []
        for i in range(i_max + 1):
            j = self.window.lookup(np.array(self.point(i)))
            if j < 0:
                break
            out.append(int(j))
        return out

    def first_hit(self, mask: np.ndarray) -> int | None:
        for i, j in enumerate(self.indices(self.window.radius)):
            if mask[j]:
                return i
        return None


# ---------------------------------------------------------------------------
# interfaces
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Interface:
    window: Window
    members: tuple  # sorted window indices
    scales: Scales
    t: int

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(int(i) for i in self.members)))

    def __eq__(self, other):
        return isinstance(other, Interface) and self.members == other.members and self.window is other.window

    def __hash__(self):
        return hash(self.members)

    def __len__(self):
        return len(self.members)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.window.n_vertices, dtype=bool)
        m[list(self.members)] = True
        return m

    @property
    def vertices(self) -> list:
        return [self.window.vertex(i) for i in self.members]

    @property
    def closure(self) -> np.ndarray:
        """Vertices within ``scales.closure`` (5N) of the members: the occurrence closure."""
        return dilate(self.window, self.mask, self.scales.closure)

    @property
    def closure_bar(self) -> np.ndarray:
        """Vertices within ``scales.closure_bar`` (10N): the extraction closure."""
        return dilate(self.window, self.mask, self.scales.closure_bar)

    def fringe(self) -> np.ndarray:
        """Non-members within distance ``t``."""
        m = self.mask
        return dilate(self.window, m, self.t) & ~m

    def is_t_connected(self) -> bool:
        lab = t_labels(self.window, self.mask, self.t)
        return len(np.unique(lab[list(self.members)])) == 1

    def is_interface(self) -> bool:
        return bool(self.members) and self.is_t_connected() and surrounds_origin(self.window, self.mask)

    def as_record(self) -> dict:
        return {"size": len(self), "members": [list(v) for v in self.vertices]}


@dataclass
class MultiInterface:
    interfaces: tuple

    def __post_init__(self):
        seen: set = set()
        for iface in self.interfaces:
            if seen & set(iface.members):
                raise ArgumentError("interfaces of a multi-interface must be pairwise disjoint")
            seen |= set(iface.members)

    @property
    def size(self) -> int:
        return sum(len(i) for i in self.interfaces)

    @property
    def count(self) -> int:
        return len(self.interfaces)

    @property
    def sign(self) -> int:
        return 1 if self.count % 2 == 1 else -1


def _scales(N: int, scales: Scales | None) -> Scales:
    return scales if scales is not None else Scales.standard(N)


def _check_t(N: int, t: int):
    if t < 1:
        raise ArgumentError("t must be >= 1")
    if N < 1:
        raise ArgumentError("N must be >= 1")


def goodness(config: Configuration, N: int = 1, scales: Scales | None = None, clipped: bool = False) -> GoodnessField:
    sc = _scales(N, scales)
    key = ("goodness", id(config), sc, clipped)
    cache = config.__dict__.setdefault("_gcache", {})
    if key not in cache:
        cache[key] = GoodnessField.compute(config, sc, clipped)
    return cache[key]


def bad_component(config: Configuration, x, N: int, t: int, scales: Scales | None = None,
                  clipped: bool = False, field_: GoodnessField | None = None) -> np.ndarray:
    """Sorted window indices of the t-component of bad vertices containing ``x`` (empty if ``x`` is good)."""
    _check_t(N, t)
    w = config.window
    xi = w.vertex_index(x) if not isinstance(x, (int, np.integer)) else int(x)
    gf = field_ or goodness(config, N, scales, clipped)
    if not gf.decided[xi]:
        raise CensoredError(f"goodness of {w.vertex(xi)} is not decidable in this window")
    if gf.good[xi]:
        return np.zeros(0, dtype=np.int64)
    tab = within_table(w, t)
    seen = {xi}
    queue = deque([xi])
    while queue:
        v = queue.popleft()
        for y in tab[v]:
            y = int(y)
            if y < 0 or y in seen:
                continue
            if not gf.decided[y]:
                raise CensoredError(f"bad component of {w.vertex(xi)} reaches the undecidable margin at {w.vertex(y)}")
            if not gf.good[y]:
                seen.add(y)
                queue.append(y)
    return np.array(sorted(seen), dtype=np.int64)


@dataclass
class Extraction:
    interface: Interface
    boundary: np.ndarray  # exposed boundary of the dilated cluster
    boundary_t_connected: bool
    all_boundary_bad: bool  # no good vertex on the exposed boundary
    closure_bar_cuts: bool  # closed edges of the 10N closure cut o from the boundary
    occurs: bool  # the extracted set occurs with the 5N closure
    diameter: float


def extract_interface(config: Configuration, N: int, t: int, scales: Scales | None = None,
                      clipped: bool = False, field_: GoodnessField | None = None,
                      raise_on_violation: bool = True) -> Extraction | None:
    """Extract the interface around a large finite cluster of the origin.

    Returns ``None`` when the cluster touches the boundary or has diameter at
    most ``scales.diam``. Raises :class:`CensoredError` if the goodness of a
    needed vertex is not decidable, and :class:`InvariantError` if some vertex
    of the exposed boundary of the dilated cluster is good.
    """
    _check_t(N, t)
    sc = _scales(N, scales)
    w = config.window
    lab = label_clusters(config)
    o = w.origin
    if lab.touches_boundary(o):
        return None
    members = lab.members(o)
    diam = float(set_diameter(w, members))
    if diam <= sc.diam:
        return None
    cmask = np.zeros(w.n_vertices, dtype=bool)
    cmask[members] = True
    dil = dilate(w, cmask, sc.inner)
    if not clipped and np.any(dil & w.boundary):
        raise CensoredError("the dilated cluster reaches the window boundary")
    bnd = exposed_boundary_mask(w, dil)
    gf = field_ or goodness(config, N, sc, clipped)
    bidx = np.flatnonzero(bnd)
    if not np.all(gf.decided[bidx]):
        raise CensoredError("goodness on the exposed boundary is not decidable in this window")
    good_on_boundary = bidx[gf.good[bidx]]
    all_bad = len(good_on_boundary) == 0
    if not all_bad and raise_on_violation:
        raise InvariantError(
            f"good vertex {w.vertex(int(good_on_boundary[0]))} on the exposed boundary of a cluster of diameter {diam:g}",
            witness={"seed": config.seed, "sample": config.sample, "p": config.p,
                     "vertex": w.vertex(int(good_on_boundary[0]))},
        )
    bad = gf.decided & ~gf.good
    tl = t_labels(w, bad, t)
    roots = np.unique(tl[bidx[~gf.good[bidx]]])
    comp = np.isin(tl, roots) & bad
    # the bad component must not run into the undecided margin
    if not clipped:
        margin = dilate(w, comp, t) & ~gf.decided
        if margin.any():
            raise CensoredError("the bad component reaches the undecidable margin")
    iface = Interface(w, tuple(np.flatnonzero(comp)), sc, t)
    b_tl = t_labels(w, bnd, t)
    return Extraction(
        interface=iface,
        boundary=bidx,
        boundary_t_connected=len(np.unique(b_tl[bidx])) == 1,
        all_boundary_bad=all_bad,
        closure_bar_cuts=cut_from_boundary(config, iface.closure_bar),
        occurs=interface_occurs(config, iface, N, t, sc, clipped, gf),
        diameter=diam,
    )


def interface_occurs(config: Configuration, iface: Interface, N: int, t: int, scales: Scales | None = None,
                     clipped: bool = False, field_: GoodnessField | None = None) -> bool:
    """The three occurrence clauses, checked one by one."""
    sc = _scales(N, scales)
    if iface.scales != sc or iface.t != t:
        iface = Interface(iface.window, iface.members, sc, t)
    gf = field_ or goodness(config, N, sc, clipped)
    m = iface.mask
    fringe = iface.fringe()
    need = m | fringe
    if not np.all(gf.decided[need]):
        raise ArgumentError("window too small: goodness of the interface or its t-fringe is not decidable")
    if np.any(gf.good[m]):
        return False
    if not np.all(gf.good[fringe]):
        return False
    return cut_from_boundary(config, iface.closure)


def occurring_interfaces(config: Configuration, N: int, t: int, scales: Scales | None = None,
                         clipped: bool = False, field_: GoodnessField | None = None) -> list:
    """Occurring interfaces via bad t-components (see the module docstring)."""
    _check_t(N, t)
    sc = _scales(N, scales)
    w = config.window
    gf = field_ or goodness(config, N, sc, clipped)
    bad = gf.decided & ~gf.good
    if not bad.any():
        return []
    tl = t_labels(w, bad, t)
    out = []
    for root in np.unique(tl[bad]):
        comp = tl == root
        if not clipped and np.any(dilate(w, comp, t) & ~gf.decided):
            continue  # not certifiable: its fringe is undecided
        if not surrounds_origin(w, comp):
            continue
        iface = Interface(w, tuple(np.flatnonzero(comp)), sc, t)
        if cut_from_boundary(config, iface.closure):
            out.append(iface)
    out.sort(key=lambda i: (len(i), i.members))
    return out


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def enumerate_interfaces(window: Window, N: int, t: int, max_size: int, scales: Scales | None = None,
                         budget: int = DEFAULT_ENUM_BUDGET) -> list:
    """All interfaces of the window with at most ``max_size`` members.

    Every such set meets the axis at ``gamma(i)`` with ``i <= t(max_size-1)``,
    so t-connected sets are grown from those seeds: for seed ``j`` only sets
    avoiding the earlier seeds are produced, which makes the output duplicate
    free. Each set is generated once by the standard extension scheme.
    """
    _check_t(N, t)
    if max_size < 1:
        return []
    sc = _scales(N, scales)
    axis = GeodesicAxis(window)
    seeds = axis.indices(t * (max_size - 1))
    tab = within_table(window, t)
    nb = [set(int(y) for y in row if y >= 0) - {i} for i, row in enumerate(tab)]
    out = []
    count = [0]

    def emit(S):
        count[0] += 1
        if count[0] > budget:
            raise PartialResultError(f"interface enumeration exceeded {budget} sets", partial=out)
        m = np.zeros(window.n_vertices, dtype=bool)
        m[list(S)] = True
        if surrounds_origin(window, m):
            out.append(Interface(window, tuple(S), sc, t))

    for j, s in enumerate(seeds):
        banned = set(seeds[:j])
        stack = [((s,), tuple(sorted(nb[s] - banned)), frozenset(banned | {s}))]
        while stack:
            S, cand, excluded = stack.pop()
            emit(S)
            if len(S) == max_size:
                continue
            for i, v in enumerate(cand):
                excl = excluded | set(cand[: i + 1])
                new = tuple(sorted(set(cand[i + 1 :]) | (nb[v] - excl - set(cand))))
                stack.append((S + (v,), new, excl))
    out.sort(key=lambda i: (len(i), i.members))
    return out


def multi_interfaces(candidates: Sequence[Interface], n: int) -> list:
    """Collections of pairwise disjoint candidates with total size ``n``."""
    cands = sorted(candidates, key=lambda i: (len(i), i.members))
    out = []

    def rec(start, chosen, used, size):
        if size == n and chosen:
            out.append(MultiInterface(tuple(chosen)))
            return
        for k in range(start, len(cands)):
            c = cands[k]
            if size + len(c) > n or used & set(c.members):
                continue
            rec(k + 1, chosen + [c], used | set(c.members), size + len(c))

    rec(0, [], set(), 0)
    return out


# ---------------------------------------------------------------------------
# census and expansion terms
# ---------------------------------------------------------------------------


def subset_size_counts(sizes: Sequence[int], n_max: int | None = None):
    """Signed and unsigned counts of nonempty sub-collections by total size.

    ``signed[n] = sum (-1)^(k+1)`` and ``unsigned[n] = #`` over sub-collections
    of ``k`` items whose sizes add to ``n``.
    """
    total = sum(sizes)
    top = total if n_max is None else min(total, n_max)
    # poly[k][n]: number of k-item sub-collections of size n
    poly = np.zeros((len(sizes) + 1, total + 1), dtype=object)
    poly[0, 0] = 1
    for s in sizes:
        poly[1:, s:] = poly[1:, s:] + poly[:-1, : total + 1 - s]
    signs = np.array([0] + [1 if k % 2 == 1 else -1 for k in range(1, len(sizes) + 1)], dtype=object)
    signed = (signs[:, None] * poly).sum(axis=0)[: top + 1]
    unsigned = poly[1:].sum(axis=0)[: top + 1]
    return [int(x) for x in signed], [int(x) for x in unsigned]


@dataclass
class Census:
    counts: list  # N_n: occurring multi-interfaces of size n, n = 0..n_max
    interfaces: list
    disjoint: bool
    geodesic_ok: bool
    geodesic_hits: list  # (size, first axis index hit)
    partial: bool = False

    def as_record(self) -> dict:
        return {
            "counts": self.counts,
            "n_interfaces": len(self.interfaces),
            "sizes": [len(i) for i in self.interfaces],
            "disjoint": self.disjoint,
            "geodesic_ok": self.geodesic_ok,
            "geodesic_hits": self.geodesic_hits,
            "partial": self.partial,
        }


def occurring_census(config: Configuration, N: int, t: int, n_max: int, scales: Scales | None = None,
                     clipped: bool = False, field_: GoodnessField | None = None) -> Census:
    """``N_n`` for ``n <= n_max`` with the disjointness and geodesic-hitting audits."""
    ifs = occurring_interfaces(config, N, t, scales, clipped, field_)
    seen: set = set()
    disjoint = True
    for i in ifs:
        if seen & set(i.members):
            disjoint = False
        seen |= set(i.members)
    axis = GeodesicAxis(config.window)
    hits = []
    geo = True
    for i in ifs:
        h = axis.first_hit(i.mask)
        hits.append((len(i), h))
        if h is None or h > t * (len(i) - 1):
            geo = False
    _, unsigned = subset_size_counts([len(i) for i in ifs], n_max)
    counts = unsigned + [0] * (n_max + 1 - len(unsigned))
    return Census(counts[: n_max + 1], ifs, disjoint, geo, hits)


@dataclass
class ExpansionTerm:
    n: int
    mode: str  # "exact" or "monte_carlo"
    coefficients: list | None = None  # c[a]: signed configuration count with a open edges
    n_edges: int | None = None
    estimate: float | None = None
    stderr: float | None = None
    samples: int | None = None
    seed: int | None = None

    def evaluate(self, z):
        if self.mode != "exact":
            raise ArgumentError("only exact terms can be evaluated at arbitrary parameters")
        from .oracle import EventPolynomial

        return EventPolynomial(self.n_edges, self.coefficients).evaluate(z)

    def as_record(self) -> dict:
        rec = {"n": self.n, "mode": self.mode}
        if self.mode == "exact":
            rec.update(coefficients=self.coefficients, n_edges=self.n_edges)
        else:
            rec.update(estimate=self.estimate, stderr=self.stderr, samples=self.samples, seed=self.seed)
        return rec


def expansion_term(window: Window, N: int, t: int, n: int, mode: str = "exact", scales: Scales | None = None,
                   p: float | None = None, samples: int = 0, seed: int | None = None,
                   clipped: bool = True) -> ExpansionTerm:
    """``F_n``: signed sum over multi-interfaces of size ``n`` of ``P(D_N^c, M occurs)``."""
    sc = _scales(N, scales)
    if mode == "exact":
        from .oracle import expansion_tables

        tab = expansion_tables(window, N, t, sc, clipped)
        poly = tab.term(n)
        return ExpansionTerm(n, "exact", coefficients=list(poly.coefficients), n_edges=poly.m)
    if mode != "monte_carlo":
        raise ArgumentError(f"mode must be 'exact' or 'monte_carlo', got {mode!r}")
    if p is None or samples < 1 or seed is None:
        raise ArgumentError("monte_carlo mode needs p, samples >= 1 and seed")
    from .percolation import sample_configuration

    vals = np.zeros(samples)
    for i in range(samples):
        cfg = sample_configuration(window, p, seed, i)
        if not diameter_exceeds(cfg, sc.diam):
            continue
        ifs = occurring_interfaces(cfg, N, t, sc, clipped)
        signed, _ = subset_size_counts([len(x) for x in ifs], n)
        vals[i] = signed[n] if n < len(signed) else 0
    sd = float(vals.std(ddof=1)) if samples > 1 else 0.0
    return ExpansionTerm(n, "monte_carlo", estimate=float(vals.mean()), stderr=sd / math.sqrt(samples),
                         samples=samples, seed=seed)


def diameter_exceeds(config: Configuration, threshold: float) -> bool:
    """The complement of ``D_N``: the origin's cluster touches the boundary or is wider than ``threshold``."""
    lab = label_clusters(config)
    o = config.window.origin
    if lab.touches_boundary(o):
        return True
    return set_diameter(config.window, lab.members(o)) > threshold


@dataclass
class SeriesValue:
    z: complex
    value: complex
    diameter_part: complex
    terms: list  # F_n(z), n = 1..n_max
    magnitudes: list
    decay_rate: float  # fitted geometric rate of |F_n(z)| over nonzero terms
    truncated: bool  # some nonzero term lies beyond n_max

    def as_record(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "value": [self.value.real, self.value.imag],
            "diameter_part": [complex(self.diameter_part).real, complex(self.diameter_part).imag],
            "magnitudes": self.magnitudes,
            "decay_rate": self.decay_rate,
            "truncated": self.truncated,
        }


def theta_series(window: Window, N: int, t: int, z, n_max: int, scales: Scales | None = None,
                 clipped: bool = True) -> SeriesValue:
    """``P_z(D_N) + sum_{n <= n_max} F_n(z)``, the truncated expansion of ``1 - theta``."""
    from .oracle import expansion_tables

    sc = _scales(N, scales)
    tab = expansion_tables(window, N, t, sc, clipped)
    if n_max < 0:
        raise ArgumentError("n_max must be >= 0")
    zc = complex(z)
    d_part = tab.diameter_small.evaluate(zc)
    terms = [tab.term(n).evaluate(zc) for n in range(1, n_max + 1)]
    mags = [abs(v) for v in terms]
    nz = [(n, m) for n, m in enumerate(mags, start=1) if m > 0]
    rate = float("nan")
    if len(nz) >= 2:
        ns = np.array([n for n, _ in nz], float)
        ls = np.log([m for _, m in nz])
        rate = float(np.exp(np.polyfit(ns, ls, 1)[0]))
    return SeriesValue(
        z=zc,
        value=complex(d_part) + sum(terms),
        diameter_part=d_part,
        terms=terms,
        magnitudes=mags,
        decay_rate=rate,
        truncated=tab.max_size > n_max and any(not tab.term(n).is_zero() for n in range(n_max + 1, tab.max_size + 1)),
    )
