"""Delzant lattice polytopes, their lattice points and facet proximity.

A polytope is stored by its facet data: primitive inward normals ``v_r`` and
integer offsets ``lambda_r`` so that

    P = {x : l_r(x) = <x, v_r> - lambda_r >= 0 for all r}.

Facet order is the declaration order and is preserved everywhere (reports
index facets by position).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .errors import (
    DimensionMismatch,
    EmptyInterior,
    LatticeOverflow,
    NotDelzant,
    OutsidePolytope,
    PolytopeError,
    Unbounded,
)

__all__ = [
    "DelzantPolytope",
    "LatticeSet",
    "FacetProximity",
    "build_polytope",
    "interval",
    "simplex",
    "cube",
    "hirzebruch",
    "facet_values",
    "lattice_points",
    "near_facets",
]

DEFAULT_LATTICE_CAP = 10**7
MAX_DIM = 3


@dataclass(frozen=True, eq=False)
class DelzantPolytope:
    normals: np.ndarray  # (d, m) int
    offsets: np.ndarray  # (d,) int
    name: str = "custom"
    vertices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        normals = np.atleast_2d(np.asarray(self.normals, dtype=np.int64))
        offsets = np.asarray(self.offsets, dtype=np.int64).reshape(-1)
        if normals.shape[0] != offsets.shape[0]:
            raise PolytopeError("need one offset per facet normal")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "vertices", _validate(normals, offsets))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def n_facets(self) -> int:
        return self.normals.shape[0]

    @cached_property
    def euclidean_volume(self) -> float:
        if self.dim == 1:
            return float(self.vertices.max() - self.vertices.min())
        return float(ConvexHull(self.vertices).volume)

    @cached_property
    def analytic_center(self) -> np.ndarray:
        """Minimizer of ``-sum_r log l_r`` over the interior."""
        x = _chebyshev_center(self.normals, self.offsets)
        V = self.normals.astype(float)
        for _ in range(100):
            ell = V @ x - self.offsets
            g = -(V / ell[:, None]).sum(axis=0)
            H = (V / ell[:, None] ** 2).T @ V
            dx = -np.linalg.solve(H, g)
            # keep every l_r above half its current value
            dl = V @ dx
            shrink = dl < 0
            step = 1.0
            if shrink.any():
                step = min(1.0, 0.5 * np.min(-ell[shrink] / dl[shrink]))
            x = x + step * dx
            if np.linalg.norm(dx) < 1e-15 * (1 + np.linalg.norm(x)):
                break
            if step == 1.0 and np.sqrt(-g @ dx) < 1e-14:
                break
        return x

    def facet_values(self, x):
        return facet_values(self, x)

    def contains(self, x, tol=0.0) -> bool:
        return bool(np.min(facet_values(self, x)) >= -tol)

    def describe(self) -> list[dict]:
        return [
            {"normal": [int(c) for c in v], "offset": int(lam)}
            for v, lam in zip(self.normals, self.offsets)
        ]


@dataclass(frozen=True)
class LatticeSet:
    k: int
    points: np.ndarray  # (count, m) int, lexicographically sorted

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    def __len__(self):
        return self.count

    def index(self) -> dict[tuple, int]:
        return {tuple(int(c) for c in p): i for i, p in enumerate(self.points)}


@dataclass(frozen=True)
class FacetProximity:
    near_set: frozenset
    distances: np.ndarray

    @property
    def near_count(self) -> int:
        return len(self.near_set)


def _chebyshev_center(normals, offsets):
    d, m = normals.shape
    V = normals.astype(float)
    norms = np.linalg.norm(V, axis=1)
    # max s  s.t.  <x, v_r> - s |v_r| >= lambda_r
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A = np.hstack([-V, norms[:, None]])
    res = linprog(c, A_ub=A, b_ub=-offsets.astype(float),
                  bounds=[(None, None)] * m + [(None, 1.0)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-12:
        raise EmptyInterior("polytope has empty interior")
    return res.x[:m]


def _check_bounded(normals, offsets):
    m = normals.shape[1]
    V = normals.astype(float)
    for i in range(m):
        for sign in (1.0, -1.0):
            c = np.zeros(m)
            c[i] = -sign
            res = linprog(c, A_ub=-V, b_ub=-offsets.astype(float),
                          bounds=[(None, None)] * m, method="highs")
            if res.status == 3:
                raise Unbounded("polytope is unbounded")
            if res.status == 2:
                raise EmptyInterior("polytope is empty")


def _validate(normals, offsets) -> np.ndarray:
    d, m = normals.shape
    if not 1 <= m <= MAX_DIM:
        raise PolytopeError(f"dimension {m} not supported (1..{MAX_DIM})")
    for r, v in enumerate(normals):
        if math.gcd(*(int(c) for c in v)) != 1:
            raise PolytopeError(f"facet {r} normal {v.tolist()} is not primitive")
    _check_bounded(normals, offsets)
    _chebyshev_center(normals, offsets)

    V = normals.astype(float)
    verts = []
    for S in itertools.combinations(range(d), m):
        A = V[list(S)]
        if abs(np.linalg.det(A)) < 0.5:
            continue  # integer matrix: det is 0 or |det| >= 1
        x = np.linalg.solve(A, offsets[list(S)].astype(float))
        if np.min(V @ x - offsets) < -1e-9:
            continue
        xi = np.rint(x)
        if np.max(np.abs(x - xi)) > 1e-9:
            raise NotDelzant(f"vertex {x.tolist()} is not a lattice point")
        verts.append(xi.astype(np.int64))
    if not verts:
        raise EmptyInterior("no vertices found")
    verts = np.unique(np.array(verts), axis=0)
    for x in verts:
        active = np.flatnonzero(normals @ x - offsets == 0)
        if len(active) != m:
            raise NotDelzant(
                f"{len(active)} facets meet at vertex {x.tolist()}, expected {m}")
        det = round(np.linalg.det(V[active]))
        if abs(det) != 1:
            raise NotDelzant(
                f"normals at vertex {x.tolist()} have determinant {det}")
    return verts


def interval() -> DelzantPolytope:
    return DelzantPolytope([[1], [-1]], [0, -1], name="interval")


def simplex(m: int = 2) -> DelzantPolytope:
    normals = np.vstack([np.eye(m, dtype=int), -np.ones((1, m), dtype=int)])
    offsets = [0] * m + [-1]
    return DelzantPolytope(normals, offsets, name=f"simplex{m}")


def cube(m: int = 2) -> DelzantPolytope:
    eye = np.eye(m, dtype=int)
    normals = np.vstack([eye, -eye])
    offsets = [0] * m + [-1] * m
    return DelzantPolytope(normals, offsets, name=f"cube{m}")


def hirzebruch(a: int = 1) -> DelzantPolytope:
    """Trapezoid x >= 0, y >= 0, 1 - y >= 0, (1 + a) - x - a y >= 0."""
    if a < 0 or int(a) != a:
        raise PolytopeError("hirzebruch parameter must be a nonnegative integer")
    a = int(a)
    normals = [[1, 0], [0, 1], [0, -1], [-1, -a]]
    offsets = [0, 0, -1, -(1 + a)]
    return DelzantPolytope(normals, offsets, name=f"hirzebruch{a}")


_BUILTINS = {
    "interval": lambda spec: interval(),
    "simplex": lambda spec: simplex(int(spec.get("m", 2))),
    "cube": lambda spec: cube(int(spec.get("m", 2))),
    "hirzebruch": lambda spec: hirzebruch(spec.get("a", 1)),
}


def build_polytope(spec) -> DelzantPolytope:
    """Build a polytope from a built-in name or an explicit facet list.

    ``spec`` is a name (``"interval"``), a dict such as
    ``{"name": "hirzebruch", "a": 1}``, or
    ``{"facets": [{"normal": [1, 0], "offset": 0}, ...]}``.
    """
    if isinstance(spec, DelzantPolytope):
        return spec
    if isinstance(spec, str):
        spec = {"name": spec}
    if "facets" in spec:
        normals = [f["normal"] for f in spec["facets"]]
        offsets = [f["offset"] for f in spec["facets"]]
        for o in offsets:
            if int(o) != o:
                raise PolytopeError("facet offsets must be integers")
        return DelzantPolytope(normals, [int(o) for o in offsets],
                               name=spec.get("name", "custom"))
    name = spec.get("name")
    if name not in _BUILTINS:
        raise PolytopeError(f"unknown polytope {name!r}")
    return _BUILTINS[name](spec)


def facet_values(P: DelzantPolytope, x) -> np.ndarray:
    """Return ``(l_1(x), ..., l_d(x))``; works on stacked points ``(..., m)``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != P.dim:
        raise DimensionMismatch(f"expected points of dimension {P.dim}, got {x.shape}")
    return x @ P.normals.T.astype(float) - P.offsets


def lattice_points(P: DelzantPolytope, k: int, cap: int = DEFAULT_LATTICE_CAP) -> LatticeSet:
    """All integer alpha with alpha/k in P, in lexicographic order.

    Membership uses exact integer arithmetic on ``<alpha, v_r> - k lambda_r``.
    """
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    k = int(k)
    lo = k * P.vertices.min(axis=0)
    hi = k * P.vertices.max(axis=0)
    V = P.normals
    rhs = k * P.offsets
    chunks = []
    count = 0
    tail_ranges = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo[1:], hi[1:])]
    if tail_ranges:
        tail = np.stack(np.meshgrid(*tail_ranges, indexing="ij"), axis=-1).reshape(-1, P.dim - 1)
    else:
        tail = np.zeros((1, 0), dtype=np.int64)
    for a0 in range(lo[0], hi[0] + 1):
        pts = np.hstack([np.full((tail.shape[0], 1), a0, dtype=np.int64), tail])
        keep = np.all(pts @ V.T - rhs >= 0, axis=1)
        pts = pts[keep]
        count += pts.shape[0]
        if count > cap:
            raise LatticeOverflow(f"{k}P has more than {cap} lattice points")
        chunks.append(pts)
    return LatticeSet(k, np.vstack(chunks))


def near_facets(P: DelzantPolytope, x, delta: float, tol: float = 1e-12) -> FacetProximity:
    ell = facet_values(P, x)
    if ell.ndim != 1:
        raise DimensionMismatch("near_facets takes a single point")
    if np.min(ell) < -tol:
        raise OutsidePolytope(f"point {np.asarray(x).tolist()} is outside P")
    near = frozenset(int(r) for r in np.flatnonzero(ell < delta))
    return FacetProximity(near, ell)
