"""Norming constants, dual constants, Szego diagonals and boundary models.

Norming constants are computed in polytope coordinates,

    Q(alpha) = int_P exp(k g_alpha(x)) dx,
    g_alpha(x) = u(x) + <alpha/k - x, grad u(x)>,

which is the L^2 norm of the monomial ``z^alpha`` after pushing the volume
form forward by the moment map.  ``g_alpha`` is maximal at ``x = alpha/k``
with value ``u(alpha/k)``.  For ``u = sum l_r log l_r + f`` it splits as

    k g_alpha(x) = sum_r A_r log l_r(x) + sum_r A_r - k sum_r l_r(x)
                   + k f(x) + <alpha - k x, grad f(x)>,

with integer ``A_r = k l_r(alpha/k)``; that form is linear in alpha, so one
node set serves every lattice point.  Values are kept raw (no
``(d_k + 1)/vol(P)`` factor) and as logarithms.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import OutsideLattice, QuadratureNotConverged
from .oracles import log_bf_law
from .polytope import LatticeSet, lattice_points, near_facets
from .potential import SymplecticPotential, legendre_batch
from .quadrature import polytope_rule

__all__ = [
    "QuadConfig",
    "NormingTable",
    "PValue",
    "AsymptoticModel",
    "norming_table",
    "norming_constant",
    "pkernel",
    "log_p_special",
    "log_p_special_legendre",
    "szego_diagonal",
    "log_szego",
    "localization_profile",
    "asymptotic_model",
    "model_ratios",
    "default_threads",
]

_CHUNK_ENTRIES = 1 << 22


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("TOGE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class QuadConfig:
    cells_per_axis: int = 32
    gauss_order: int = 16
    refine_factor: float = 4.0
    grade_levels: int = 3
    rtol: float = 1e-8

    def rules(self, P):
        fine = polytope_rule(P, self.cells_per_axis, self.gauss_order,
                             self.grade_levels, self.refine_factor)
        coarse = polytope_rule(P, max(1, self.cells_per_axis // 2), self.gauss_order,
                               self.grade_levels, self.refine_factor)
        return coarse, fine


@dataclass
class NormingTable:
    k: int
    potential: SymplecticPotential
    lattice: LatticeSet
    log_q: np.ndarray
    quad_err: np.ndarray
    _index: dict = field(default=None, repr=False)

    @property
    def alphas(self) -> np.ndarray:
        return self.lattice.points

    @property
    def normalization(self) -> float:
        """``(d_k + 1) / vol(P)``; multiplies raw Q into the projective normalization."""
        return self.lattice.count / self.potential.polytope.euclidean_volume

    @property
    def log_q_normalized(self) -> np.ndarray:
        return self.log_q + np.log(self.normalization)

    def index_of(self, alpha) -> int:
        if self._index is None:
            self._index = self.lattice.index()
        key = tuple(int(a) for a in np.atleast_1d(alpha))
        try:
            return self._index[key]
        except KeyError:
            raise OutsideLattice(f"{key} is not a lattice point of {self.k}P") from None

    def __getitem__(self, alpha) -> float:
        return float(self.log_q[self.index_of(alpha)])


def _node_data(u: SymplecticPotential, k: int, rule):
    x = rule.nodes
    logL = np.log(u.ell_log(x))
    gf = u.f.grad(x)
    c = (-k * u.ell_log(x).sum(axis=1) + k * u.f.value(x)
         - k * np.einsum("ni,ni->n", x, gf) + np.log(rule.weights))
    return np.hstack([logL, gf]), c


def _log_integrals(u, k, alphas, rule, threads):
    """``log int_P exp(k g_alpha)`` for every row of ``alphas``."""
    B, c = _node_data(u, k, rule)
    V = u._Vlog
    lam = u._lam[list(u.log_facets)]
    A = alphas @ V.T.astype(np.int64) - np.rint(k * lam).astype(np.int64)
    coef = np.hstack([A, alphas]).astype(float)
    shift = A.sum(axis=1).astype(float)
    rows = max(1, _CHUNK_ENTRIES // max(1, rule.size))
    chunks = [slice(i, i + rows) for i in range(0, coef.shape[0], rows)]

    def work(sl):
        S = coef[sl] @ B.T
        S += c[None, :]
        return logsumexp(S, axis=1) + shift[sl]

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(sl) for sl in chunks]
    return np.concatenate(parts) if parts else np.zeros(0)


def norming_table(u: SymplecticPotential, k: int, quad: QuadConfig | None = None,
                  threads: int | None = None, check: bool = True) -> NormingTable:
    """Raw log norming constants for every lattice point of kP.

    The value on the fine rule is returned; the coarse rule (half as many
    cells per axis) supplies the error estimate ``|log Q_fine - log Q_coarse|``.
    """
    quad = quad or QuadConfig()
    threads = default_threads() if threads is None else threads
    lat = lattice_points(u.polytope, k)
    coarse, fine = quad.rules(u.polytope)
    log_fine = _log_integrals(u, k, lat.points, fine, threads)
    log_coarse = _log_integrals(u, k, lat.points, coarse, threads)
    err = np.abs(log_fine - log_coarse)
    if check and np.any(~np.isfinite(log_fine) | (err > quad.rtol)):
        bad = int(np.argmax(np.where(np.isfinite(err), err, np.inf)))
        raise QuadratureNotConverged(
            f"k={k} alpha={lat.points[bad].tolist()}: refinement changed log Q by {err[bad]:.2e}",
            k=k, alpha=lat.points[bad])
    return NormingTable(k, u, lat, log_fine, err)


def norming_constant(u: SymplecticPotential, k: int, alpha, quad: QuadConfig | None = None) -> float:
    """Raw ``log Q(alpha)`` for a single lattice point."""
    quad = quad or QuadConfig()
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.int64))
    ell_k = alpha @ u.polytope.normals.T - k * u.polytope.offsets
    if alpha.shape[0] != u.dim or np.any(ell_k < 0):
        raise OutsideLattice(f"{alpha.tolist()} is not in {k}P")
    coarse, fine = quad.rules(u.polytope)
    lf = _log_integrals(u, k, alpha[None, :], fine, 1)[0]
    lc = _log_integrals(u, k, alpha[None, :], coarse, 1)[0]
    if not np.isfinite(lf) or abs(lf - lc) > quad.rtol:
        raise QuadratureNotConverged(
            f"k={k} alpha={alpha.tolist()}: refinement changed log Q by {abs(lf - lc):.2e}",
            k=k, alpha=alpha)
    return float(lf)


@dataclass(frozen=True)
class PValue:
    alpha: tuple
    special: float  # log P(alpha)
    at_z: float | None = None  # log P(alpha, z)


def log_p_special(table: NormingTable) -> np.ndarray:
    """``log P(alpha) = k u(alpha/k) - log Q(alpha)`` for every tabulated alpha.

    Exact at boundary lattice points, where ``mu^{-1}(alpha/k)`` is at infinity.
    """
    u, k = table.potential, table.k
    return k * u.value(table.alphas / k) - table.log_q


def log_p_special_legendre(table: NormingTable):
    """Special values through ``rho = grad u(alpha/k)`` and a Legendre solve.

    Independent of :func:`log_p_special` except for ``log Q``; only interior
    alpha are returned (``mask`` marks them).
    """
    u, k = table.potential, table.k
    a = table.alphas / k
    mask = np.min(u.ell_log(a), axis=1) > 0
    out = np.full(table.alphas.shape[0], np.nan)
    if mask.any():
        rho = u.gradient(a[mask], eps=0.0)
        phi, _, _, _ = legendre_batch(u, rho, x0=a[mask])
        out[mask] = (np.einsum("ni,ni->n", table.alphas[mask], rho) - k * phi
                     - table.log_q[mask])
    return out, mask


def pkernel(u: SymplecticPotential, k: int, alpha, rho=None, table: NormingTable | None = None,
            quad: QuadConfig | None = None) -> PValue:
    """``log P(alpha, z) = <alpha, rho> - k phi(rho) - log Q(alpha)`` and its special value."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.int64))
    log_q = table[alpha] if table is not None else norming_constant(u, k, alpha, quad)
    special = k * float(u.value(alpha / k)) - log_q
    at_z = None
    if rho is not None:
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        phi, _, _, _ = legendre_batch(u, rho[None, :])
        at_z = float(alpha @ rho - k * phi[0] - log_q)
    return PValue(tuple(int(a) for a in alpha), special, at_z)


def _log_terms(table: NormingTable, rho, phi):
    """``log P(alpha, z)`` matrix of shape (n_rho, n_alpha)."""
    return rho @ table.alphas.T.astype(float) - table.k * phi[:, None] - table.log_q[None, :]


def log_szego(table: NormingTable, rho, phi=None):
    """``log Pi(rho)`` and the weight matrix ``p_alpha(rho)`` for stacked rho."""
    rho = np.atleast_2d(np.asarray(rho, dtype=float))
    if phi is None:
        phi, _, _, _ = legendre_batch(table.potential, rho)
    T = _log_terms(table, rho, phi)
    lse = logsumexp(T, axis=1)
    return lse, np.exp(T - lse[:, None])


def szego_diagonal(table: NormingTable, rho):
    """Diagonal Szego value ``Pi(rho) = sum_alpha P(alpha, z)`` and its weights."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    lse, w = log_szego(table, rho[None, :])
    return float(np.exp(lse[0])), w[0]


def localization_profile(table: NormingTable, rho, delta: float):
    """Weight inside ``|alpha/k - mu(rho)| <= k^(-1/2 + delta)`` and max P(alpha, z) outside."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    phi, x, _, _ = legendre_batch(table.potential, rho[None, :])
    T = _log_terms(table, rho[None, :], phi)[0]
    w = np.exp(T - logsumexp(T))
    dist = np.linalg.norm(table.alphas / table.k - x[0], axis=1)
    inside = dist <= table.k ** (-0.5 + delta)
    outside_max = float(np.exp(T[~inside].max())) if (~inside).any() else 0.0
    return float(w[inside].sum()), outside_max


@dataclass(frozen=True)
class AsymptoticModel:
    alpha: tuple
    detG_factor: float  # sqrt(det G * prod l), finite up to the boundary
    ptwiddle: float  # log of the product of rescaled one-dimensional laws
    bf_corner: float  # log of the product of laws over the near facets
    gcal: float  # log G_{phi, delta_k}
    near_count: int
    log_model1: float
    log_model2: float
    flagged: bool


def _model_arrays(u: SymplecticPotential, k: int, alphas, delta):
    x = alphas / k
    m = u.dim
    ell = np.clip(u.ell_log(x), 0.0, None)
    bdet = u.boundary_det(x)
    law = log_bf_law(k * ell, k)
    # log prod_j k^{-1} (2 pi l_j)^{1/2} P_BF(k l_j), with the l_j^{1/2} moved into bdet
    ptw_reduced = (-np.log(k) + 0.5 * np.log(2 * np.pi) + law).sum(axis=1)
    log_m1 = 0.5 * m * np.log(k) + 0.5 * np.log(bdet) + ptw_reduced
    near = ell < delta
    n_near = near.sum(axis=1)
    with np.errstate(divide="ignore"):
        log_far_ell = np.where(near, 0.0, np.log(np.where(near, 1.0, ell))).sum(axis=1)
    log_gcal = np.log(bdet) - log_far_ell
    corner = np.where(near, law, 0.0).sum(axis=1)
    log_m2 = 0.5 * (m - n_near) * np.log(k) + 0.5 * log_gcal + corner
    with np.errstate(divide="ignore"):
        log_ptw = ptw_reduced + 0.5 * np.log(ell).sum(axis=1)
    flagged = np.any(ell == 0, axis=1) & np.any((ell >= delta) & (ell <= 2 * delta), axis=1)
    return dict(detG=np.sqrt(bdet), ptwiddle=log_ptw, corner=corner, gcal=log_gcal,
                near=n_near, m1=log_m1, m2=log_m2, flagged=flagged)


def asymptotic_model(u: SymplecticPotential, k: int, alpha, delta: float | None = None) -> AsymptoticModel:
    """Boundary-zone model for ``P(alpha)`` up to the shared constant ``C_m``.

    ``log_model1`` is the uniform form ``k^{m/2} sqrt(det G) P~(alpha/k)``;
    ``log_model2`` is the zone form built from the delta_k-close facets.
    Default ``delta = k^{-2/3}``.
    """
    delta = k ** (-2.0 / 3.0) if delta is None else delta
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    d = _model_arrays(u, k, alpha, delta)
    near_facets(u.polytope, alpha[0] / k, delta)  # validates membership
    return AsymptoticModel(
        alpha=tuple(int(a) for a in alpha[0]), detG_factor=float(d["detG"][0]),
        ptwiddle=float(d["ptwiddle"][0]), bf_corner=float(d["corner"][0]),
        gcal=float(d["gcal"][0]), near_count=int(d["near"][0]),
        log_model1=float(d["m1"][0]), log_model2=float(d["m2"][0]),
        flagged=bool(d["flagged"][0]))


@dataclass
class ModelComparison:
    k: int
    delta: float
    log_ratio1: np.ndarray  # log P(alpha) - log model1
    log_ratio2: np.ndarray
    interior: np.ndarray  # all l_j(alpha/k) >= delta
    flagged: np.ndarray
    log_c1: float  # fitted log C_m (median over interior)
    log_c2: float

    def spread(self, which: int = 1) -> float:
        """``max |ratio / C - 1|`` over interior alpha."""
        lr, lc = (self.log_ratio1, self.log_c1) if which == 1 else (self.log_ratio2, self.log_c2)
        r = np.exp(lr[self.interior] - lc)
        return float(np.max(np.abs(r - 1.0))) if r.size else float("nan")


def model_ratios(table: NormingTable, delta: float | None = None) -> ModelComparison:
    """Measured ``P(alpha)`` against both model forms for every tabulated alpha."""
    u, k = table.potential, table.k
    delta = k ** (-2.0 / 3.0) if delta is None else delta
    d = _model_arrays(u, k, table.alphas.astype(float), delta)
    lp = log_p_special(table)
    interior = np.min(u.ell_log(table.alphas / k), axis=1) >= delta
    r1, r2 = lp - d["m1"], lp - d["m2"]
    c1 = float(np.median(r1[interior])) if interior.any() else float("nan")
    c2 = float(np.median(r2[interior])) if interior.any() else float("nan")
    return ModelComparison(k, delta, r1, r2, interior, d["flagged"], c1, c2)
