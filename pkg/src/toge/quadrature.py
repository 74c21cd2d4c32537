"""Tensor Gauss-Legendre rules over convex polytopes.

The polytope is integrated by iterated (Fubini) integration.  The outer
coordinate range is split at the projections of the vertices, so that on each
slab the slice has fixed combinatorial type and the inner integral is a
smooth function of the outer variable.  Every 1D range is cut into equal
cells, and the cells touching a range end are graded geometrically toward
that end, where integrands concentrate when a lattice point sits on a facet.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .polytope import DelzantPolytope

__all__ = ["QuadratureRule", "polytope_rule", "interval_breaks"]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray  # (N, m)
    weights: np.ndarray  # (N,)

    @property
    def size(self) -> int:
        return self.weights.shape[0]


@lru_cache(maxsize=None)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def interval_breaks(a: float, b: float, cells: int, grade_levels: int, grade_ratio: float):
    """Cell boundaries on [a, b]: ``cells`` equal cells, end cells graded."""
    edges = np.linspace(a, b, cells + 1)
    if grade_levels <= 0 or cells < 1:
        return edges
    h = (b - a) / cells
    left = a + h * grade_ratio ** -np.arange(grade_levels, 0, -1, dtype=float)
    right = b - h * grade_ratio ** -np.arange(1, grade_levels + 1, dtype=float)
    return np.unique(np.concatenate([edges, left, right]))


def _gauss_on_breaks(breaks, order):
    g, w = _gauss(order)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _slice_vertices(normals, offsets):
    """Vertices of {y : normals @ y >= offsets} (float offsets, small d)."""
    d, m = normals.shape
    out = []
    for S in itertools.combinations(range(d), m):
        A = normals[list(S)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        y = np.linalg.solve(A, offsets[list(S)])
        if np.all(normals @ y - offsets >= -1e-10 * (1 + np.abs(offsets).max())):
            out.append(y)
    return np.array(out) if out else np.zeros((0, m))


def _rule(normals, offsets, cells, order, grade_levels, grade_ratio):
    d, m = normals.shape
    if m == 1:
        v = normals[:, 0]
        lo = np.max(offsets[v > 0] / v[v > 0])
        hi = np.min(offsets[v < 0] / v[v < 0])
        if hi <= lo:
            return np.zeros((0, 1)), np.zeros(0)
        br = interval_breaks(lo, hi, cells, grade_levels, grade_ratio)
        x, w = _gauss_on_breaks(br, order)
        return x[:, None], w

    verts = _slice_vertices(normals, offsets)
    if verts.shape[0] == 0:
        return np.zeros((0, m)), np.zeros(0)
    cuts = np.unique(np.round(verts[:, 0], 13))
    lo, hi = cuts[0], cuts[-1]
    if hi - lo <= 0:
        return np.zeros((0, m)), np.zeros(0)
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        n_cells = max(1, int(round(cells * (b - a) / (hi - lo))))
        br = interval_breaks(a, b, n_cells, grade_levels, grade_ratio)
        xs, ws = _gauss_on_breaks(br, order)
        inner_normals = normals[:, 1:]
        keep = np.any(inner_normals != 0, axis=1)
        for x1, w1 in zip(xs, ws):
            inner_off = offsets - normals[:, 0] * x1
            # facets with no dependence on the inner variables are slack here
            yi, wi = _rule(inner_normals[keep], inner_off[keep], cells, order,
                           grade_levels, grade_ratio)
            if wi.size == 0:
                continue
            nodes.append(np.hstack([np.full((yi.shape[0], 1), x1), yi]))
            weights.append(w1 * wi)
    if not nodes:
        return np.zeros((0, m)), np.zeros(0)
    return np.vstack(nodes), np.concatenate(weights)


@lru_cache(maxsize=64)
def polytope_rule(P: DelzantPolytope, cells: int = 32, order: int = 16,
                  grade_levels: int = 3, grade_ratio: float = 4.0) -> QuadratureRule:
    """Interior quadrature nodes and weights for P.

    Exact for polynomials of degree ``< 2 * order`` on every slab piece of
    P; node count grows like ``(cells * order) ** m``.
    """
    x, w = _rule(P.normals.astype(float), P.offsets.astype(float), int(cells), int(order),
                 int(grade_levels), float(grade_ratio))
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w)
