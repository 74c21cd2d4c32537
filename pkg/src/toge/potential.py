"""Symplectic potentials on Delzant polytopes and their Legendre duals.

Coordinates on the open orbit are fixed as ``|z_j|^2 = exp(rho_j)``.  With
that convention

    phi(rho) = max_x <x, rho> - u(x),   mu(rho) = grad phi(rho),
    u(x) = <x, rho_x> - phi(rho_x),     rho_x = grad u(x).

A potential is ``u = sum_r l_r log l_r + f`` with ``f`` a polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NewtonDivergence,
    NonConvexAt,
    OutsidePolytope,
    TooCloseToBoundary,
)
from .polynomial import Polynomial
from .polytope import DelzantPolytope, build_polytope

__all__ = [
    "SymplecticPotential",
    "LegendreResult",
    "HessianPair",
    "eval_u",
    "grad_u",
    "hess_u",
    "legendre",
    "legendre_batch",
    "moment_map",
    "inverse_moment",
    "convexity_check",
    "canonical",
    "bargmann_fock",
]

EPS_BOUNDARY = 1e-12
NEWTON_RTOL = 1e-12
NEWTON_MAX_ITER = 200
FRACTION_TO_BOUNDARY = 0.5


class SymplecticPotential:
    """``u(x) = sum_{r in log_facets} l_r(x) log l_r(x) + f(x)``.

    ``log_facets`` defaults to every facet (the Guillemin form).  Restricting
    it is only meant for local models such as a truncated Bargmann-Fock
    orthant, where the far facet carries no logarithmic term.
    """

    def __init__(self, polytope, smooth_part=None, log_facets=None, label=None):
        self.polytope: DelzantPolytope = build_polytope(polytope)
        m = self.polytope.dim
        if smooth_part is None:
            smooth_part = Polynomial(m)
        elif not isinstance(smooth_part, Polynomial):
            smooth_part = Polynomial(m, smooth_part)
        if smooth_part.dim != m:
            raise DimensionMismatch("smooth part dimension differs from polytope")
        self.f = smooth_part
        d = self.polytope.n_facets
        self.log_facets = tuple(range(d)) if log_facets is None else tuple(sorted(log_facets))
        self.label = label
        V = self.polytope.normals.astype(float)
        self._V = V
        self._Vlog = V[list(self.log_facets)]
        self._lam = self.polytope.offsets.astype(float)

    def __repr__(self):
        return f"SymplecticPotential({self.polytope.name}, f={self.f.terms}, label={self.label!r})"

    @property
    def dim(self):
        return self.polytope.dim

    def same_log_part(self, other) -> bool:
        return (self.polytope is other.polytope or (
            np.array_equal(self.polytope.normals, other.polytope.normals)
            and np.array_equal(self.polytope.offsets, other.polytope.offsets))
        ) and self.log_facets == other.log_facets

    def interpolate(self, other: SymplecticPotential, t: float) -> SymplecticPotential:
        """``(1 - t) self + t other``; both must share the logarithmic part."""
        if not self.same_log_part(other):
            raise ValueError("potentials live on different polytopes")
        f = self.f.scale(1.0 - t) + other.f.scale(t)
        return SymplecticPotential(self.polytope, f, self.log_facets, label=f"u_t={t:g}")

    def add_smooth(self, g: Polynomial, label=None) -> SymplecticPotential:
        return SymplecticPotential(self.polytope, self.f + g, self.log_facets, label=label)

    # -- facet data --------------------------------------------------------
    def ell(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {x.shape}")
        return x @ self._V.T - self._lam

    def ell_log(self, x):
        return self.ell(x)[..., list(self.log_facets)]

    def _interior(self, x, eps):
        ell = self.ell(x)
        if np.any(ell < eps):
            bad = np.unravel_index(np.argmin(ell), ell.shape)
            raise TooCloseToBoundary(
                f"l_{bad[-1]} = {ell[bad]:.3e} < {eps:.1e}; use boundary-safe forms")
        return ell

    # -- evaluation --------------------------------------------------------
    def value(self, x, tol=1e-14):
        x = np.asarray(x, dtype=float)
        ell = self.ell(x)
        if np.any(ell < -tol):
            raise OutsidePolytope("point outside P")
        L = np.clip(ell[..., list(self.log_facets)], 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            xlogx = np.where(L > 0, L * np.log(np.where(L > 0, L, 1.0)), 0.0)
        return xlogx.sum(axis=-1) + self.f.value(x)

    def gradient(self, x, eps=EPS_BOUNDARY):
        x = np.asarray(x, dtype=float)
        self._interior(x, eps)
        L = self.ell_log(x)
        return (1.0 + np.log(L)) @ self._Vlog + self.f.grad(x)

    def hessian(self, x, eps=EPS_BOUNDARY):
        x = np.asarray(x, dtype=float)
        self._interior(x, eps)
        L = self.ell_log(x)
        W = self._Vlog[None, :, :] / L.reshape(-1, L.shape[-1])[:, :, None]
        G = np.einsum("nri,rj->nij", W, self._Vlog).reshape(x.shape + (self.dim,))
        return G + self.f.hess(x)

    def boundary_det(self, x):
        """``det(grad^2 u) * prod_{log facets} l_r``, finite up to the boundary.

        Uses the bordered matrix [[F, V^T], [V, -diag(l)]] whose determinant
        equals ``(-1)^d prod(l) det(F + V^T diag(1/l) V)``.
        """
        x = np.asarray(x, dtype=float)
        m = self.dim
        L = self.ell_log(x)
        dlog = L.shape[-1]
        F = self.f.hess(x)
        batch = x.shape[:-1]
        M = np.zeros(batch + (m + dlog, m + dlog))
        M[..., :m, :m] = F
        M[..., :m, m:] = self._Vlog.T
        M[..., m:, :m] = self._Vlog
        idx = np.arange(dlog) + m
        M[..., idx, idx] = -L
        return (-1.0) ** dlog * np.linalg.det(M)

    def delta_factor(self, x):
        """Smooth positive ``delta`` with ``det(G^{-1}) = delta * prod l_r``."""
        return 1.0 / self.boundary_det(x)


@dataclass(frozen=True)
class LegendreResult:
    value: float
    maximizer: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class HessianPair:
    G: np.ndarray
    H: np.ndarray
    detG: float
    delta_factor: float


def canonical(polytope, smooth_part=None, label=None) -> SymplecticPotential:
    """Guillemin potential ``u_0 + f``; ``smooth_part`` may be JSON terms."""
    P = build_polytope(polytope)
    if smooth_part is not None and not isinstance(smooth_part, Polynomial):
        items = list(smooth_part)
        if items and isinstance(items[0], dict):
            smooth_part = Polynomial.from_json(P.dim, items)
        else:
            smooth_part = Polynomial(P.dim, items)
    return SymplecticPotential(P, smooth_part, label=label)


def bargmann_fock(length: float = 1, m: int = 1) -> SymplecticPotential:
    """``sum_j x_j log x_j - x_j`` on the truncated orthant ``[0, length]^m``."""
    from .polytope import DelzantPolytope

    L = int(length)
    eye = np.eye(m, dtype=int)
    P = DelzantPolytope(np.vstack([eye, -eye]), [0] * m + [-L] * m,
                        name=f"orthant{m}[0,{L}]")
    terms = []
    for j in range(m):
        e = [0] * m
        e[j] = 1
        terms.append((tuple(e), -1.0))
    return SymplecticPotential(P, Polynomial(m, terms), log_facets=range(m),
                               label="bargmann-fock")


def eval_u(u: SymplecticPotential, x) -> float:
    return float(u.value(np.atleast_1d(np.asarray(x, dtype=float))))


def grad_u(u: SymplecticPotential, x, eps=EPS_BOUNDARY) -> np.ndarray:
    return u.gradient(np.atleast_1d(np.asarray(x, dtype=float)), eps)


def hess_u(u: SymplecticPotential, x, eps=EPS_BOUNDARY) -> HessianPair:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    G = u.hessian(x, eps)
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise NonConvexAt(f"Hessian not positive definite at {x.tolist()}", x) from None
    H = np.linalg.inv(G)
    return HessianPair(G=G, H=H, detG=float(np.linalg.det(G)),
                       delta_factor=float(u.delta_factor(x)))


def legendre_batch(u: SymplecticPotential, rho, x0=None, rtol=NEWTON_RTOL,
                   max_iter=NEWTON_MAX_ITER):
    """Solve ``grad u(x) = rho`` for a stack of ``rho`` of shape ``(n, m)``.

    Damped Newton on the concave objective ``<x, rho> - u(x)`` with a
    fraction-to-boundary rule (no l_r drops below half its value in one step)
    and Armijo backtracking.  Returns ``(phi, x, iterations, residual)``.
    """
    rho = np.atleast_2d(np.asarray(rho, dtype=float))
    n, m = rho.shape
    if m != u.dim:
        raise DimensionMismatch(f"rho has dimension {m}, expected {u.dim}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("rho must be finite")
    if x0 is None:
        x = np.tile(u.polytope.analytic_center, (n, 1))
    else:
        x = np.array(np.broadcast_to(np.asarray(x0, dtype=float), (n, m)))
    V = u._V
    lam = u._lam
    tol = rtol * (1.0 + np.linalg.norm(rho, axis=1))
    iters = np.zeros(n, dtype=int)
    resid = np.full(n, np.inf)
    active = np.ones(n, dtype=bool)

    def objective(xa, ra):
        return np.einsum("ni,ni->n", xa, ra) - u.value(xa)

    for it in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa, ra = x[idx], rho[idx]
        g = ra - u.gradient(xa, eps=0.0)
        resid[idx] = np.linalg.norm(g, axis=1)
        done = resid[idx] <= tol[idx]
        if it == max_iter:
            break
        G = u.hessian(xa, eps=0.0)
        try:
            np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            bad = idx[np.argmin(np.linalg.eigvalsh(G)[:, 0])]
            raise NonConvexAt(f"Hessian not positive definite at {x[bad].tolist()}",
                              x[bad]) from None
        dx = np.linalg.solve(G, g[..., None])[..., 0]
        ell = xa @ V.T - lam
        dl = dx @ V.T
        with np.errstate(divide="ignore", invalid="ignore"):
            caps = np.where(dl < 0, -FRACTION_TO_BOUNDARY * ell / dl, np.inf)
        step = np.minimum(1.0, caps.min(axis=1))
        f0 = objective(xa, ra)
        slope = np.einsum("ni,ni->n", g, dx)
        for _ in range(60):
            xn = xa + step[:, None] * dx
            ok = objective(xn, ra) >= f0 + 1e-4 * step * slope - 1e-15 * np.abs(f0)
            if not ok.all():
                # objective differences can fall below rounding of u near the
                # boundary; a decreasing residual is then accepted instead
                gn = ra[~ok] - u.gradient(xn[~ok], eps=0.0)
                ok[~ok] = np.linalg.norm(gn, axis=1) <= (1 - 1e-4 * step[~ok]) * resid[idx][~ok]
            if ok.all():
                break
            step = np.where(ok, step, 0.5 * step)
        eps = 4 * np.finfo(float).eps
        stalled = (np.max(np.abs(step[:, None] * dl) / ell, axis=1) <= eps) | (
            np.all(np.abs(step[:, None] * dx) <= eps * np.abs(xa), axis=1))
        x[idx] = np.where(done[:, None], xa, xn)
        iters[idx[~done]] += 1
        # rounding of x limits how well log l_r can be resolved near the boundary
        floor = 100 * np.finfo(float).eps * (1.0 + np.abs(xa).sum(axis=1)) / np.maximum(
            u.ell_log(xa).min(axis=1), 1e-300)
        if np.any(stalled & ~done & (resid[idx] > np.maximum(floor, tol[idx]))):
            bad = idx[np.flatnonzero(stalled & ~done)[0]]
            raise NewtonDivergence(
                f"Legendre line search stalled at rho={rho[bad].tolist()} "
                f"(residual {resid[bad]:.3e})")
        active[idx[done | stalled]] = False
    if active.any():
        bad = np.flatnonzero(active)[0]
        raise NewtonDivergence(
            f"Legendre solve did not converge for rho={rho[bad].tolist()} "
            f"(residual {resid[bad]:.3e})")
    phi = np.einsum("ni,ni->n", x, rho) - u.value(x)
    return phi, x, iters, resid


def legendre(u: SymplecticPotential, rho, x0=None) -> LegendreResult:
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    phi, x, iters, resid = legendre_batch(u, rho[None, :], x0=x0)
    return LegendreResult(float(phi[0]), x[0], int(iters[0]), float(resid[0]))


def moment_map(u: SymplecticPotential, rho) -> np.ndarray:
    return legendre(u, rho).maximizer


def inverse_moment(u: SymplecticPotential, x) -> np.ndarray:
    return grad_u(u, x)


def convexity_check(u: SymplecticPotential, grid_resolution: int = 32, margin=None) -> float:
    """Smallest Hessian eigenvalue over an interior tensor grid.

    The grid has ``grid_resolution + 1`` equispaced points per axis over the
    bounding box; points with some ``l_r < margin`` (default
    ``1 / (4 grid_resolution)``) are dropped.
    """
    P = u.polytope
    if margin is None:
        margin = 1.0 / (4 * grid_resolution)
    lo, hi = P.vertices.min(axis=0), P.vertices.max(axis=0)
    axes = [np.linspace(a, b, grid_resolution + 1) for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, P.dim)
    pts = pts[np.min(u.ell(pts), axis=1) >= margin]
    if pts.shape[0] == 0:
        return float("nan")
    return float(np.linalg.eigvalsh(u.hessian(pts, eps=0.0))[:, 0].min())
