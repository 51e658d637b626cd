"""Exact event polynomials by exhaustive enumeration of tiny windows.

An event on a window with ``m`` edges is summarised by integer counts
``c[a]`` of satisfying configurations with ``a`` open edges, so that
``P_p(event) = sum_a c[a] p^a (1 - p)^(m - a)``. Bit ``e`` of a
configuration bitmask is the state of window edge ``e``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable

import numpy as np

from . import _kernels
from .errors import ArgumentError, InvariantError, ResourceLimitError
from .percolation import Configuration, Scales, goodness_from_events, local_events, local_structure
from .window import Window

EDGE_CAP = 22
CHUNK = 1 << 16


@dataclass(frozen=True)
class EventPolynomial:
    m: int
    coefficients: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.coefficients)
        if len(c) != self.m + 1:
            raise ArgumentError(f"need {self.m + 1} coefficients, got {len(c)}")
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zero(cls, m: int) -> "EventPolynomial":
        return cls(m, (0,) * (m + 1))

    def __add__(self, other: "EventPolynomial") -> "EventPolynomial":
        self._same(other)
        return EventPolynomial(self.m, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "EventPolynomial") -> "EventPolynomial":
        self._same(other)
        return EventPolynomial(self.m, tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self) -> "EventPolynomial":
        return EventPolynomial(self.m, tuple(-a for a in self.coefficients))

    def _same(self, other):
        if self.m != other.m:
            raise ArgumentError(f"edge counts differ: {self.m} vs {other.m}")

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def is_probability_table(self) -> bool:
        """``0 <= c[a] <= binom(m, a)``: the table of an honest event."""
        return all(0 <= c <= math.comb(self.m, a) for a, c in enumerate(self.coefficients))

    def evaluate(self, z):
        """Exact at rationals; complex floating point with compensated sums otherwise."""
        if isinstance(z, (int, Rational)) and not isinstance(z, bool):
            q = Fraction(z)
            return sum((c * q**a * (1 - q) ** (self.m - a) for a, c in enumerate(self.coefficients) if c), Fraction(0))
        zc = complex(z)
        parts = [c * zc**a * (1 - zc) ** (self.m - a) for a, c in enumerate(self.coefficients) if c]
        return complex(math.fsum(v.real for v in parts), math.fsum(v.imag for v in parts))

    def power_basis(self) -> list:
        """Integer coefficients ``b[j]`` with ``P(z) = sum_j b[j] z^j``."""
        out = [0] * (self.m + 1)
        for a, c in enumerate(self.coefficients):
            if not c:
                continue
            k = self.m - a
            for i in range(k + 1):
                out[a + i] += c * math.comb(k, i) * (-1) ** i
        return out

    def evaluate_power_basis(self, z) -> complex:
        """Horner evaluation in the monomial basis (an independent evaluation route)."""
        acc = 0j
        for b in reversed(self.power_basis()):
            acc = acc * complex(z) + b
        return acc

    def as_record(self) -> dict:
        return {"m": self.m, "coefficients": list(self.coefficients)}


def _check_cap(window: Window, cap: int):
    if window.n_edges > cap:
        raise ResourceLimitError(
            f"window has {window.n_edges} edges, the exhaustive oracle is capped at {cap}"
        )


def configuration_chunks(m: int, chunk: int = CHUNK):
    """Yield ``(bitmasks, open_matrix)`` covering all ``2^m`` configurations in order."""
    total = 1 << m
    bits = np.arange(m, dtype=np.int64)
    for start in range(0, total, chunk):
        masks = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield masks, ((masks[:, None] >> bits[None, :]) & 1).astype(bool)


def exact_event_polynomial(window: Window, predicate: Callable, vectorized: bool = False,
                           cap: int = EDGE_CAP) -> EventPolynomial:
    """Count satisfying configurations by open-edge number.

    A scalar predicate receives a :class:`Configuration`; a vectorised one
    receives a boolean ``(configs, edges)`` matrix and returns a boolean vector.
    """
    _check_cap(window, cap)
    m = window.n_edges
    counts = np.zeros(m + 1, dtype=np.int64)
    for masks, mat in configuration_chunks(m):
        if vectorized:
            hit = np.asarray(predicate(mat), dtype=bool)
        else:
            hit = np.fromiter((bool(predicate(Configuration(window, row))) for row in mat), dtype=bool, count=len(mat))
        counts += np.bincount(mat[hit].sum(axis=1), minlength=m + 1)
    return EventPolynomial(m, tuple(int(c) for c in counts))


def evaluate(poly: EventPolynomial, z):
    return poly.evaluate(z)


# ---------------------------------------------------------------------------
# ready-made events
# ---------------------------------------------------------------------------


def connection_event(window: Window) -> Callable:
    """Vectorised ``{o <-> boundary}``."""

    def pred(mat):
        lab = _kernels.batch_labels(mat, window.edges[:, 0], window.edges[:, 1], window.n_vertices)
        return np.any(lab[:, window.boundary] == lab[:, [window.origin]], axis=1)

    return pred


def two_point_event(window: Window, u, v) -> Callable:
    """Vectorised ``{u <-> v, their cluster misses the boundary}``."""
    ui, vi = window.vertex_index(u), window.vertex_index(v)

    def pred(mat):
        lab = _kernels.batch_labels(mat, window.edges[:, 0], window.edges[:, 1], window.n_vertices)
        same = lab[:, ui] == lab[:, vi]
        touch = np.any(lab[:, window.boundary] == lab[:, [ui]], axis=1)
        return same & ~touch

    return pred


def tail_event(window: Window, k: int) -> Callable:
    """Vectorised ``{k < |C_o|, C_o misses the boundary}``."""

    def pred(mat):
        lab = _kernels.batch_labels(mat, window.edges[:, 0], window.edges[:, 1], window.n_vertices)
        own = lab == lab[:, [window.origin]]
        touch = np.any(own[:, window.boundary], axis=1)
        return (own.sum(axis=1) > k) & ~touch

    return pred


# ---------------------------------------------------------------------------
# interface expansion on a whole window
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ExpansionTables:
    """Every polynomial of the interface expansion of one tiny window.

    ``signed[n]`` is ``F_n``; ``unsigned[n]`` sums ``P(D_N^c, M occurs)``
    over multi-interfaces of size ``n`` without signs (the envelope input).
    ``lhs`` is ``P(D_N^c, some interface occurs)`` computed from bad
    t-components; the signed terms come from literal occurrence checks of
    every enumerated interface.
    """

    window: Window
    scales: Scales
    t: int
    clipped: bool
    connection: EventPolynomial
    diameter_small: EventPolynomial  # D_N
    lhs: EventPolynomial
    signed: list
    unsigned: list
    n_candidates: int
    mismatch_witness: int | None  # bitmask where the two routes disagree
    defect: EventPolynomial  # D_N^c, o cut from the boundary, no interface occurs
    max_size: int = 0

    def term(self, n: int) -> EventPolynomial:
        if n < 1:
            raise ArgumentError("expansion terms start at n = 1")
        if n < len(self.signed):
            return self.signed[n]
        return EventPolynomial.zero(self.window.n_edges)

    def unsigned_term(self, n: int) -> EventPolynomial:
        if 1 <= n < len(self.unsigned):
            return self.unsigned[n]
        return EventPolynomial.zero(self.window.n_edges)

    def rhs(self) -> EventPolynomial:
        acc = EventPolynomial.zero(self.window.n_edges)
        for poly in self.signed[1:]:
            acc = acc + poly
        return acc

    def available_sizes(self) -> list:
        return [n for n in range(1, len(self.signed)) if not self.signed[n].is_zero()]


def _diameters(window: Window, labels: np.ndarray) -> np.ndarray:
    """Extrinsic diameter of the origin's cluster per row (inf when it touches the boundary)."""
    own = labels == labels[:, [window.origin]]
    touch = np.any(own[:, window.boundary], axis=1)
    dmat = window.spec.distances(window.coords[:, None, :], window.coords[None, :, :])
    out = np.empty(len(labels))
    for i in range(len(labels)):
        if touch[i]:
            out[i] = np.inf
        else:
            idx = np.flatnonzero(own[i])
            out[i] = dmat[np.ix_(idx, idx)].max()
    return out


def expansion_tables(window: Window, N: int, t: int, scales: Scales | None = None, clipped: bool = True,
                     cap: int = EDGE_CAP) -> ExpansionTables:
    from .interfaces import (
        Interface,
        cut_from_boundary,
        enumerate_interfaces,
        occurring_interfaces,
        subset_size_counts,
    )
    from .percolation import GoodnessField

    sc = scales if scales is not None else Scales.standard(N)
    key = ("expansion", sc, t, clipped)
    if key in window.cache:
        return window.cache[key]
    _check_cap(window, cap)
    m = window.n_edges
    V = window.n_vertices
    ls = local_structure(window, sc, clipped)
    cands = enumerate_interfaces(window, N, t, V, sc)
    cand_masks = np.array([c.mask for c in cands]).reshape(len(cands), V)
    fringes = np.array([c.fringe() for c in cands]).reshape(len(cands), V)
    closures = [c.closure for c in cands]

    zero = np.zeros(m + 1, dtype=object)
    conn = zero.copy()
    dsmall = zero.copy()
    lhs = zero.copy()
    defect = zero.copy()
    signed: dict = {}
    unsigned: dict = {}
    witness = None
    for masks, mat in configuration_chunks(m):
        pop = mat.sum(axis=1)
        labels = _kernels.batch_labels(mat, window.edges[:, 0], window.edges[:, 1], V)
        connected = np.any(labels[:, window.boundary] == labels[:, [window.origin]], axis=1)
        diam = _diameters(window, labels)
        small = diam <= sc.diam
        conn += np.bincount(pop[connected], minlength=m + 1)
        dsmall += np.bincount(pop[small], minlength=m + 1)
        events = local_events(mat, ls)
        good, decided = goodness_from_events(window, events, ls.decidable, clipped)
        bad = decided & ~good
        # literal route: each candidate checked clause by clause
        occ_lists = [[] for _ in range(len(mat))]
        rows_dc = ~small
        for ci in range(len(cands)):
            c1 = np.all(bad[:, cand_masks[ci]], axis=1)
            c2 = np.all(good[:, fringes[ci]] & decided[:, fringes[ci]], axis=1)
            for r in np.flatnonzero(c1 & c2 & rows_dc):
                cfg = Configuration(window, mat[r])
                if cut_from_boundary(cfg, closures[ci]):
                    occ_lists[r].append(len(cands[ci]))
        for r in np.flatnonzero(rows_dc & ~connected):
            cfg = Configuration(window, mat[r])
            gf = GoodnessField(cfg, sc, clipped, events[r], good[r], decided[r])
            found = occurring_interfaces(cfg, N, t, sc, clipped, gf)
            sizes = occ_lists[r]
            if sorted(len(i) for i in found) != sorted(sizes) and witness is None:
                witness = int(masks[r])
            if found:
                lhs[pop[r]] += 1
            else:
                defect[pop[r]] += 1
            if sizes:
                sg, us = subset_size_counts(sizes)
                for n in range(1, len(sg)):
                    if sg[n]:
                        signed.setdefault(n, zero.copy())[pop[r]] += sg[n]
                    if us[n]:
                        unsigned.setdefault(n, zero.copy())[pop[r]] += us[n]
        # configurations connected to the boundary cannot host an occurring interface
        for r in np.flatnonzero(connected):
            if occ_lists[r] and witness is None:
                witness = int(masks[r])
    top = max(list(signed) + list(unsigned) + [0])
    mk = lambda arr: EventPolynomial(m, tuple(int(x) for x in arr))
    tables = ExpansionTables(
        window=window,
        scales=sc,
        t=t,
        clipped=clipped,
        connection=mk(conn),
        diameter_small=mk(dsmall),
        lhs=mk(lhs),
        signed=[EventPolynomial.zero(m)] + [mk(signed.get(n, zero)) for n in range(1, top + 1)],
        unsigned=[EventPolynomial.zero(m)] + [mk(unsigned.get(n, zero)) for n in range(1, top + 1)],
        n_candidates=len(cands),
        mismatch_witness=witness,
        defect=mk(defect),
        max_size=top,
    )
    window.cache[key] = tables
    return tables


@dataclass
class InclusionExclusionReport:
    equal: bool
    lhs: EventPolynomial
    rhs: EventPolynomial
    terms: list
    n_candidates: int
    theta_identity: bool  # 1 - P(o <-> boundary) == P(D_N) + lhs, coefficientwise
    defect: EventPolynomial
    witness: int | None

    def as_record(self) -> dict:
        return {
            "equal": self.equal,
            "lhs": list(self.lhs.coefficients),
            "rhs": list(self.rhs.coefficients),
            "terms": {n: list(p.coefficients) for n, p in enumerate(self.terms) if n and not p.is_zero()},
            "n_candidates": self.n_candidates,
            "theta_identity": self.theta_identity,
            "defect": list(self.defect.coefficients),
            "witness": self.witness,
        }


def verify_inclusion_exclusion(window: Window, N: int, t: int, scales: Scales | None = None,
                               clipped: bool = True, raise_on_failure: bool = True) -> InclusionExclusionReport:
    """Coefficientwise check of ``P(D_N^c, some interface occurs) = sum_n F_n``."""
    tab = expansion_tables(window, N, t, scales, clipped)
    rhs = tab.rhs()
    equal = rhs == tab.lhs and tab.mismatch_witness is None
    m = window.n_edges
    full = EventPolynomial(m, tuple(math.comb(m, a) for a in range(m + 1)))
    theta_ok = (full - tab.connection) == (tab.diameter_small + tab.lhs)
    report = InclusionExclusionReport(equal, tab.lhs, rhs, tab.signed, tab.n_candidates, theta_ok, tab.defect,
                                      tab.mismatch_witness)
    if not equal and raise_on_failure:
        raise InvariantError("inclusion-exclusion identity fails", witness=report.as_record())
    return report
